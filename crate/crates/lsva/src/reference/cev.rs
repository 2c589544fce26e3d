//! Exact call prices under the constant-elasticity-of-variance dynamics
//! with an absorbing boundary at zero, through the noncentral chi-squared
//! representation of the squared-Bessel transform of the price process.

use crate::error::{LsvaError, Result};
use crate::models::ModelSpec;
use crate::reference::specfun::{ln_poisson_kernel, reg_upper_inc_gamma, SpecialFnConfig};

/// Number of consecutive negligible terms required before the two-sided
/// series stops extending in a direction.
const QUIET_TERMS: usize = 3;

/// Neumaier-compensated running sum. The series below add hundreds of
/// positive terms through one-step recurrences; naive accumulation loses
/// two to three digits, which the goldens would notice.
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn new(initial: f64) -> Self {
        Self { sum: initial, carry: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        self.carry += if self.sum.abs() >= x.abs() {
            (self.sum - t) + x
        } else {
            (x - t) + self.sum
        };
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Complementary CDF of the noncentral chi-squared law: the probability
/// that a noncentral chi-squared variable with `v` degrees of freedom and
/// noncentrality `mu` exceeds `w`.
///
/// Computed as the Poisson mixture of central upper tails,
/// `sum_n e^{-mu/2} (mu/2)^n / n! * Q(v/2 + n, w/2)`, summed two-sided
/// from the Poisson mode so that large noncentralities neither underflow
/// the leading weights nor waste terms in the negligible head. Only the
/// mode's gamma tail is computed from scratch; neighbors follow from the
/// one-step recurrence `Q(a+1, x) = Q(a, x) + x^a e^{-x} / Gamma(a+1)`.
pub fn noncentral_chi_sq_upper(w: f64, v: f64, mu: f64, cfg: &SpecialFnConfig) -> Result<f64> {
    cfg.validate()?;
    if !(w >= 0.0 && w.is_finite() && v > 0.0 && v.is_finite() && mu >= 0.0 && mu.is_finite()) {
        return Err(LsvaError::invalid(format!(
            "noncentral chi-squared tail needs w >= 0, v > 0, mu >= 0, got \
             w = {w}, v = {v}, mu = {mu}"
        )));
    }
    if w == 0.0 {
        return Ok(1.0);
    }
    let m = 0.5 * mu;
    let h = 0.5 * w;
    let a0 = 0.5 * v;
    if m == 0.0 {
        return reg_upper_inc_gamma(a0, h, cfg);
    }
    let mode = m.floor();
    let a_mode = a0 + mode;
    // Poisson weight, gamma tail, and tail increment at the mode, all from
    // their logarithms so extreme parameters stay in range.
    let mut p_up = ln_poisson_kernel(mode, m).exp();
    let q_mode = reg_upper_inc_gamma(a_mode, h, cfg)?;
    let mut t_up = ln_poisson_kernel(a_mode, h).exp();
    let mut sum = Compensated::new(p_up * q_mode);
    let mut terms = 1usize;

    // Upward sweep: n = mode+1, mode+2, ...
    {
        let (mut p, mut t) = (p_up, t_up);
        let mut q = Compensated::new(q_mode);
        let mut n = mode;
        let mut quiet = 0;
        loop {
            q.add(t);
            t *= h / (a0 + n + 1.0);
            p *= m / (n + 1.0);
            n += 1.0;
            let term = p * q.value();
            sum.add(term);
            terms += 1;
            if terms > cfg.max_terms {
                return Err(LsvaError::convergence(format!(
                    "noncentral chi-squared series (w = {w}, v = {v}, mu = {mu}) \
                     exceeded {} terms going up",
                    cfg.max_terms
                )));
            }
            if term <= cfg.series_tol * sum.value() {
                quiet += 1;
                if quiet >= QUIET_TERMS {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
    }

    // Downward sweep: n = mode-1, ..., 0. The tail increment walks down
    // through t(a-1) = t(a) * a / h.
    let mut q_down = Compensated::new(q_mode);
    let mut n = mode;
    let mut quiet = 0;
    while n >= 1.0 {
        t_up *= (a0 + n) / h;
        q_down.add(-t_up);
        p_up *= n / m;
        n -= 1.0;
        // Roundoff can push the downward tail a hair outside [0, 1].
        let term = p_up * q_down.value().clamp(0.0, 1.0);
        sum.add(term);
        terms += 1;
        if terms > cfg.max_terms {
            return Err(LsvaError::convergence(format!(
                "noncentral chi-squared series (w = {w}, v = {v}, mu = {mu}) \
                 exceeded {} terms going down",
                cfg.max_terms
            )));
        }
        if term <= cfg.series_tol * sum.value() {
            quiet += 1;
            if quiet >= QUIET_TERMS {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    Ok(sum.value().clamp(0.0, 1.0))
}

/// Transform parameters shared by the price and the absorption mass:
/// `(g, chi, kappa)` with `g = 2(1-beta)` and
/// `chi = 2 e^{g x} / (delta^2 g^2 t)`, `kappa` the same at the strike.
fn transform(delta: f64, beta: f64, t: f64, x: f64, k: f64) -> (f64, f64, f64) {
    let g = 2.0 * (1.0 - beta);
    let scale = 2.0 / (delta * delta * g * g * t);
    (g, scale * (g * x).exp(), scale * (g * k).exp())
}

/// Exact call price `E[(e^{X_t} - e^k)^+]` under the CEV dynamics with an
/// absorbing boundary at zero, for `beta < 1`.
pub fn cev_exact_call(
    model: &ModelSpec,
    t: f64,
    x: f64,
    k: f64,
    cfg: &SpecialFnConfig,
) -> Result<f64> {
    let (delta, beta) = require_cev(model)?;
    if !(t > 0.0 && t.is_finite()) || !x.is_finite() || !k.is_finite() {
        return Err(LsvaError::invalid(format!(
            "cev_exact_call needs finite x, k and t > 0, got t = {t}, x = {x}, k = {k}"
        )));
    }
    let (g, chi, kappa) = transform(delta, beta, t, x, k);
    let dof = 2.0 / g;
    let call = x.exp() * noncentral_chi_sq_upper(2.0 * kappa, dof + 2.0, 2.0 * chi, cfg)?
        - k.exp() * (1.0 - noncentral_chi_sq_upper(2.0 * chi, dof, 2.0 * kappa, cfg)?);
    // The two tails are each in [0, 1]; their weighted difference can sit a
    // few ulps outside the arbitrage interval, never materially.
    Ok(call.max((x.exp() - k.exp()).max(0.0)))
}

/// Probability that the process has been absorbed at zero by time `t`.
pub fn cev_absorption_probability(
    model: &ModelSpec,
    t: f64,
    x: f64,
    cfg: &SpecialFnConfig,
) -> Result<f64> {
    let (delta, beta) = require_cev(model)?;
    if !(t > 0.0 && t.is_finite()) || !x.is_finite() {
        return Err(LsvaError::invalid(format!(
            "cev_absorption_probability needs finite x and t > 0, got t = {t}, x = {x}"
        )));
    }
    let (g, chi, _) = transform(delta, beta, t, x, x);
    reg_upper_inc_gamma(1.0 / g, chi, cfg)
}

fn require_cev(model: &ModelSpec) -> Result<(f64, f64)> {
    model.validate()?;
    match *model {
        ModelSpec::Cev { delta, beta } => {
            if beta >= 1.0 {
                return Err(LsvaError::invalid(format!(
                    "the exact CEV series covers the absorbing regime beta < 1, got beta = {beta}"
                )));
            }
            Ok((delta, beta))
        }
        _ => Err(LsvaError::invalid("cev_exact_call needs a CEV model")),
    }
}
