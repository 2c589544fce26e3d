//! Call prices from characteristic functions by contour integration: the
//! payoff transform pairs with the characteristic function along a line
//! shifted into the lower half-plane, where the call payoff is damped
//! enough to be integrable.

use std::cell::RefCell;

use num_complex::Complex64;

use crate::error::{LsvaError, Result};
use crate::reference::quad::integrate_adaptive;

/// Contour and budget for Fourier call pricing.
#[derive(Clone, Copy, Debug)]
pub struct FourierContour {
    /// Imaginary part of the integration variable. Must lie below -1 so
    /// the call payoff transform converges; how far below is limited by
    /// the model's moment explosion, which surfaces as a domain error.
    pub lambda_i: f64,
    /// Initial half-width of the real-axis window. The window is extended
    /// automatically until the integrand magnitude at its edge drops below
    /// `quad_tol` times the accumulated integral.
    pub truncation: f64,
    /// Relative tolerance for the adaptive quadrature.
    pub quad_tol: f64,
}

impl Default for FourierContour {
    fn default() -> Self {
        FourierContour { lambda_i: -1.5, truncation: 64.0, quad_tol: 1e-9 }
    }
}

impl FourierContour {
    /// Validates the contour placement and budgets.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_i < -1.0) {
            return Err(LsvaError::invalid(format!(
                "the call payoff transform needs lambda_i < -1, got {}",
                self.lambda_i
            )));
        }
        if !(self.truncation > 0.0 && self.truncation.is_finite()) {
            return Err(LsvaError::invalid(format!(
                "truncation must be a positive finite half-width, got {}",
                self.truncation
            )));
        }
        if !(self.quad_tol > 0.0 && self.quad_tol <= 0.1) {
            return Err(LsvaError::invalid(format!(
                "quad_tol must lie in (0, 0.1], got {}",
                self.quad_tol
            )));
        }
        Ok(())
    }
}

/// Hard cap on how often the integration window may double before the
/// tail is declared non-decaying.
const MAX_EXTENSIONS: usize = 24;

/// Fourier transform of the call payoff `(e^s - e^k)^+` along the shifted
/// contour: `-e^{k - i k lambda} / (i lambda + lambda^2)`.
fn payoff_transform(lambda: Complex64, k: f64) -> Complex64 {
    let i = Complex64::i();
    -((k - i * k * lambda).exp()) / (i * lambda + lambda * lambda)
}

/// Prices a call from its characteristic function by integrating
/// `cf(lambda) * payoff_transform(lambda)` over the horizontal contour
/// `lambda = lambda_r + i lambda_i`. Conjugate symmetry folds the line
/// onto `lambda_r >= 0`, so the price is `1/pi` times the real part of
/// the half-line integral.
///
/// `cf` receives the complex argument and returns the characteristic
/// function value; its errors are forwarded. The window `[0, L]` starts
/// at the contour's truncation and doubles until the integrand magnitude
/// at `L` is negligible against the integral accumulated so far.
pub(crate) fn call_price_via_cf(
    cf: &mut dyn FnMut(Complex64) -> Result<Complex64>,
    x: f64,
    k: f64,
    contour: &FourierContour,
) -> Result<f64> {
    contour.validate()?;
    let first_err: RefCell<Option<LsvaError>> = RefCell::new(None);
    let mut integrand = |lam_r: f64| -> f64 {
        if first_err.borrow().is_some() {
            return f64::NAN;
        }
        let lam = Complex64::new(lam_r, contour.lambda_i);
        match cf(lam) {
            Ok(value) => (value * payoff_transform(lam, k)).re,
            Err(e) => {
                *first_err.borrow_mut() = Some(e);
                f64::NAN
            }
        }
    };
    let mut half_width = contour.truncation;
    let mut integral = 0.0;
    let mut lo = 0.0;
    for _ in 0..MAX_EXTENSIONS {
        let piece = integrate_adaptive(&mut integrand, lo, half_width, contour.quad_tol);
        // Envelope check at the window edge. The integrand magnitude
        // decays monotonically in practice (the characteristic function
        // envelope is smooth even though the integrand oscillates), so a
        // single-point probe bounds the discarded tail to within a decay
        // length. The absolute floor keeps deep out-of-the-money prices
        // from demanding windows past any useful resolution.
        let edge = integrand(half_width).abs();
        if let Some(e) = first_err.borrow_mut().take() {
            return Err(e);
        }
        integral += piece?;
        let scale = integral.abs().max(1e-12 * (x.exp() + k.exp()));
        if edge * half_width < contour.quad_tol * scale {
            let price = integral / std::f64::consts::PI;
            return Ok(price.max((x.exp() - k.exp()).max(0.0)));
        }
        lo = half_width;
        half_width *= 2.0;
    }
    Err(LsvaError::convergence(format!(
        "fourier integrand tail still significant at half-width {half_width:.3e}; \
         the contour lambda_i = {} may sit too close to a moment boundary",
        contour.lambda_i
    )))
}
