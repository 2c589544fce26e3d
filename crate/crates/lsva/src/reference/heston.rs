//! Fourier call pricer for the square-root stochastic-variance model,
//! whose characteristic function closes in terms of a complex Riccati
//! solution.

use num_complex::Complex64;

use crate::error::{LsvaError, Result};
use crate::models::ModelSpec;
use crate::reference::fourier::{call_price_via_cf, FourierContour};

/// Characteristic function `E[e^{i lambda X_t}]` of the log price started
/// at `(x, v)`, for complex `lambda`.
///
/// Uses the decaying-exponential form of the Riccati solution: with
/// `d` the principal square root of `delta^2(lambda^2 + i lambda) +
/// (kappa - i rho delta lambda)^2` and `G` the ratio of the Riccati roots,
/// every exponential involved is `e^{-d t}` with nonnegative real decay,
/// so the expression stays on one branch of the logarithm and cannot
/// overflow. Arguments whose moment `e^{-Im(lambda) X_t}` explodes
/// surface as a domain error.
pub fn heston_cf(model: &ModelSpec, t: f64, x: f64, v: f64, lam: Complex64) -> Result<Complex64> {
    let (kappa, theta, delta, rho) = require_heston(model)?;
    if !(t > 0.0 && t.is_finite()) || !x.is_finite() || !(v > 0.0 && v.is_finite()) {
        return Err(LsvaError::invalid(format!(
            "heston_cf needs t > 0, finite x, v > 0, got t = {t}, x = {x}, v = {v}"
        )));
    }
    if !lam.is_finite() {
        return Err(LsvaError::invalid(format!("heston_cf needs finite lambda, got {lam}")));
    }
    let i = Complex64::i();
    let a = kappa - i * rho * delta * lam;
    let d = (delta * delta * (lam * lam + i * lam) + a * a).sqrt();
    let root_minus = a - d;
    let root_plus = a + d;
    let g = root_minus / root_plus;
    let edt = (-d * t).exp();
    let denom = 1.0 - g * edt;
    let c = kappa * theta / (delta * delta) * (root_minus * t - 2.0 * (denom / (1.0 - g)).ln());
    let slope = root_minus / (delta * delta) * (1.0 - edt) / denom;
    let value = (i * lam * x + c + slope * v).exp();
    if !value.is_finite() {
        return Err(LsvaError::domain(format!(
            "characteristic function diverged at lambda = {lam}; the moment \
             e^{{{} X_t}} is not finite at t = {t}",
            -lam.im
        )));
    }
    Ok(value)
}

/// Call price `E[(e^{X_t} - e^k)^+]` by contour integration of the
/// characteristic function against the payoff transform.
pub fn heston_call_fourier(
    model: &ModelSpec,
    t: f64,
    x: f64,
    v: f64,
    k: f64,
    contour: &FourierContour,
) -> Result<f64> {
    require_heston(model)?;
    if !k.is_finite() {
        return Err(LsvaError::invalid(format!("heston_call_fourier needs finite k, got {k}")));
    }
    let mut cf = |lam| heston_cf(model, t, x, v, lam);
    call_price_via_cf(&mut cf, x, k, contour)
}

fn require_heston(model: &ModelSpec) -> Result<(f64, f64, f64, f64)> {
    model.validate()?;
    match *model {
        ModelSpec::Heston { kappa, theta, delta, rho } => Ok((kappa, theta, delta, rho)),
        _ => Err(LsvaError::invalid("heston_cf needs a Heston model")),
    }
}
