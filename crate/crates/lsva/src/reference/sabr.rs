//! Exact call pricer for zero-correlation SABR through the
//! heat-kernel-on-the-half-plane double integral: an angular part over a
//! compact wedge and a boundary correction that vanishes whenever the
//! wedge order is an integer.

use std::cell::RefCell;
use std::f64::consts::PI;

use crate::error::{LsvaError, Result};
use crate::models::ModelSpec;
use crate::reference::quad::integrate_adaptive;

/// `arccosh(1 + eps)` for `eps >= 0`, accurate near zero where the direct
/// form loses the small offset inside the argument.
fn acosh1p(eps: f64) -> f64 {
    (eps + (eps * (eps + 2.0)).sqrt()).ln_1p()
}

/// Exact call price `E[(e^{X_t} - e^k)^+]` for SABR with `rho = 0` and
/// `beta < 1`, by tensor-product adaptive quadrature of the hyperbolic
/// heat-kernel representation.
///
/// The volatility variable is integrated on the log scale `V = V_0 e^u`,
/// where the kernel is dominated by a Gaussian factor of standard
/// deviation `delta sqrt(t)`; the window scales with that width. The
/// boundary integral decays like `e^{-|nu| psi}` on top of the same
/// Gaussian and carries the prefactor `sin(|nu| pi)`, which kills it at
/// the integer wedge orders where the angular part alone is exact.
pub fn sabr_exact_call_rho0(
    model: &ModelSpec,
    t: f64,
    x: f64,
    y: f64,
    k: f64,
    quad_tol: f64,
) -> Result<f64> {
    let (beta, delta) = require_uncorrelated_sabr(model)?;
    if !(t > 0.0 && t.is_finite()) || !x.is_finite() || !y.is_finite() || !k.is_finite() {
        return Err(LsvaError::invalid(format!(
            "sabr_exact_call_rho0 needs t > 0 and finite x, y, k, got t = {t}, x = {x}, \
             y = {y}, k = {k}"
        )));
    }
    if !(quad_tol > 0.0 && quad_tol <= 0.1) {
        return Err(LsvaError::invalid(format!(
            "quad_tol must lie in (0, 0.1], got {quad_tol}"
        )));
    }
    let one_minus = 1.0 - beta;
    let q_k = (one_minus * k).exp() / one_minus;
    let q_x = (one_minus * x).exp() / one_minus;
    let v0 = y.exp() / delta;
    let nu_abs = 0.5 / one_minus;
    let var = delta * delta * t;
    let inv2 = 1.0 / (2.0 * var);
    // Scaled geometry: the arccosh argument is
    // 1 + e^{-u} (rs_diff + 2 s sin^2(phi/2)) + 2 sinh^2(u/2) for the
    // angular part, with cos phi -> -cosh psi for the boundary part.
    // Grouping it this way keeps the small offset exact at the money.
    let s = q_k * q_x / (v0 * v0);
    let rs_diff = (q_k - q_x) * (q_k - q_x) / (2.0 * v0 * v0);
    let b_minus_1 = (q_k - q_x) * (q_k - q_x) / (2.0 * q_k * q_x);
    let inner_tol = (quad_tol * 0.1).max(1e-12);
    // Truncations: the u integrand is bounded by exp(|u|/2 - u^2/(2 var)),
    // making everything past the window smaller than e^{-42} of the peak;
    // the boundary variable adds e^{-|nu| psi} on top, capped before
    // cosh(psi) can overflow.
    let u_max = (84.0f64.sqrt() + 2.0) * var.sqrt() + 0.25 * var;
    let psi_max = (45.0 / nu_abs + 5.0).min(650.0);

    let inner_err: RefCell<Option<LsvaError>> = RefCell::new(None);
    let fail = |e: LsvaError| -> f64 {
        let mut slot = inner_err.borrow_mut();
        if slot.is_none() {
            *slot = Some(e);
        }
        f64::NAN
    };

    let mut angular_outer = |u: f64| -> f64 {
        let eu = (-u).exp();
        let shift = 2.0 * (0.5 * u).sinh().powi(2);
        let mut inner = |phi: f64| -> f64 {
            let half_sin = (0.5 * phi).sin();
            let eps = eu * (rs_diff + 2.0 * s * half_sin * half_sin) + shift;
            let xi = acosh1p(eps);
            let denom = b_minus_1 + 2.0 * half_sin * half_sin;
            phi.sin() * (nu_abs * phi).sin() / denom * (-xi * xi * inv2).exp()
        };
        match integrate_adaptive(&mut inner, 0.0, PI, inner_tol) {
            Ok(value) => (-0.5 * u).exp() * value,
            Err(e) => fail(e),
        }
    };
    let angular = integrate_adaptive(&mut angular_outer, -u_max, u_max, quad_tol);
    if let Some(e) = inner_err.borrow_mut().take() {
        return Err(e);
    }
    let angular = angular?;

    let boundary_weight = (nu_abs * PI).sin();
    let boundary = if boundary_weight == 0.0 {
        0.0
    } else {
        let mut boundary_outer = |u: f64| -> f64 {
            let eu = (-u).exp();
            let shift = 2.0 * (0.5 * u).sinh().powi(2);
            let mut inner = |psi: f64| -> f64 {
                let eps = eu * (rs_diff + s * (1.0 + psi.cosh())) + shift;
                let xi = acosh1p(eps);
                let denom = b_minus_1 + 1.0 + psi.cosh();
                psi.sinh() / denom * (-nu_abs * psi) .exp() * (-xi * xi * inv2).exp()
            };
            match integrate_adaptive(&mut inner, 0.0, psi_max, inner_tol) {
                Ok(value) => (-0.5 * u).exp() * value,
                Err(e) => fail(e),
            }
        };
        let value = integrate_adaptive(&mut boundary_outer, -u_max, u_max, quad_tol);
        if let Some(e) = inner_err.borrow_mut().take() {
            return Err(e);
        }
        value?
    };

    let prefactor = (0.5 * (x + k)).exp() * (-var / 8.0).exp() / (2.0 * PI * var).sqrt();
    let price = prefactor * (angular + boundary_weight * boundary) / PI
        + (x.exp() - k.exp()).max(0.0);
    Ok(price.max((x.exp() - k.exp()).max(0.0)))
}

fn require_uncorrelated_sabr(model: &ModelSpec) -> Result<(f64, f64)> {
    model.validate()?;
    match *model {
        ModelSpec::Sabr { beta, delta, rho } => {
            if rho != 0.0 {
                return Err(LsvaError::invalid(format!(
                    "the double-integral pricer covers rho = 0 only, got rho = {rho}; \
                     use mc_price for correlated SABR"
                )));
            }
            if beta >= 1.0 {
                return Err(LsvaError::invalid(format!(
                    "the double-integral pricer needs beta < 1, got beta = {beta}"
                )));
            }
            Ok((beta, delta))
        }
        _ => Err(LsvaError::invalid("sabr_exact_call_rho0 needs a SABR model")),
    }
}
