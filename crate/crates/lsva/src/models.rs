//! Model definitions and their coefficient jets.
//!
//! Every supported model is written on log-coordinates `z = (x, y)` with a
//! pricing generator of the form
//!
//! ```text
//! A(t) = a(t,z)(∂x² − ∂x) + f(t,z)∂y + b(t,z)∂y² + c(t,z)∂x∂y
//! ```
//!
//! where `x` is log-spot and `y` the volatility-factor coordinate. The
//! `a(∂x²−∂x)` pairing bakes the martingale drift of `e^x` into the
//! structure: no separate x-drift is ever stored, so the forward is
//! preserved by construction.
//!
//! A [`CoefficientJet`] holds the raw spatial partials of `a, b, c, f` at
//! an expansion point, each as an exponential-polynomial function of time.
//! Three of the four families are time-homogeneous (constant entries); the
//! Heston family is expanded around a deterministically moving variance
//! center after a change of variable that removes the mean-reverting drift,
//! which makes its entries genuinely time-dependent with rates `±κ` and
//! `2κ`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{LsvaError, Result};
use crate::timefunc::{EpTerm, ExpPoly};

/// A fully parameterized model, as selected in run configurations.
///
/// Parameters follow the usual conventions: `delta` is the volatility (or
/// volatility-of-volatility) scale, `beta` the local-volatility exponent,
/// `kappa`/`theta` mean-reversion speed and level, `rho` the correlation
/// between the spot and volatility-factor drivers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Constant-elasticity-of-variance local volatility: the spot follows
    /// `dS = δ S^β dW` with an absorbing boundary at zero for `β < 1`.
    Cev { delta: f64, beta: f64 },
    /// Heston stochastic variance `dV = κ(θ−V)dt + δ√V dW`.
    Heston { kappa: f64, theta: f64, delta: f64, rho: f64 },
    /// 3/2 stochastic variance `dV = κV(θ−V)dt + δV^{3/2} dW`, handled on
    /// the log-variance coordinate.
    ThreeHalves { kappa: f64, theta: f64, delta: f64, rho: f64 },
    /// SABR: `dS = σ S^β dW` with lognormal volatility `dσ = δ σ dZ`,
    /// handled on log-volatility.
    Sabr { beta: f64, delta: f64, rho: f64 },
}

impl ModelSpec {
    /// Checks hard parameter constraints.
    ///
    /// # Errors
    ///
    /// [`LsvaError::InvalidInput`] naming the violated constraint:
    /// `delta > 0` everywhere, `|rho| < 1` where present, `kappa > 0` and
    /// `theta > 0` for the mean-reverting families.
    pub fn validate(&self) -> Result<()> {
        let check_delta = |delta: f64| -> Result<()> {
            if !(delta > 0.0) || !delta.is_finite() {
                return Err(LsvaError::invalid(format!(
                    "delta must be strictly positive and finite, got {delta}"
                )));
            }
            Ok(())
        };
        let check_rho = |rho: f64| -> Result<()> {
            if !(rho.abs() < 1.0) {
                return Err(LsvaError::invalid(format!(
                    "rho must satisfy |rho| < 1, got {rho}"
                )));
            }
            Ok(())
        };
        let check_mean_reversion = |kappa: f64, theta: f64| -> Result<()> {
            if !(kappa > 0.0) || !kappa.is_finite() {
                return Err(LsvaError::invalid(format!(
                    "kappa must be strictly positive and finite, got {kappa}"
                )));
            }
            if !(theta > 0.0) || !theta.is_finite() {
                return Err(LsvaError::invalid(format!(
                    "theta must be strictly positive and finite, got {theta}"
                )));
            }
            Ok(())
        };
        match *self {
            ModelSpec::Cev { delta, beta } => {
                check_delta(delta)?;
                if !beta.is_finite() {
                    return Err(LsvaError::invalid(format!("beta must be finite, got {beta}")));
                }
            }
            ModelSpec::Heston { kappa, theta, delta, rho }
            | ModelSpec::ThreeHalves { kappa, theta, delta, rho } => {
                check_delta(delta)?;
                check_rho(rho)?;
                check_mean_reversion(kappa, theta)?;
            }
            ModelSpec::Sabr { beta, delta, rho } => {
                check_delta(delta)?;
                check_rho(rho)?;
                if !beta.is_finite() {
                    return Err(LsvaError::invalid(format!("beta must be finite, got {beta}")));
                }
            }
        }
        Ok(())
    }

    /// Soft diagnostics that do not block a run. For Heston, `rho ≥ 0`
    /// risks a moment explosion that invalidates Fourier pricing on the
    /// standard contour, so it is flagged here rather than rejected.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let ModelSpec::Heston { rho, .. } = *self {
            if rho >= 0.0 {
                out.push(format!(
                    "Heston with rho = {rho} >= 0 risks a moment explosion; \
                     negative correlation is the supported regime"
                ));
            }
        }
        out
    }

    /// Short lowercase identifier, matching the config `variant` tag.
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Cev { .. } => "cev",
            ModelSpec::Heston { .. } => "heston",
            ModelSpec::ThreeHalves { .. } => "three_halves",
            ModelSpec::Sabr { .. } => "sabr",
        }
    }

    /// True for one-factor (pure local-volatility) models, which have no
    /// `y` coordinate at all.
    pub fn is_local_vol(&self) -> bool {
        matches!(self, ModelSpec::Cev { .. })
    }
}

/// Raw spatial partials of the generator coefficients at an expansion
/// point, as exponential-polynomial functions of time.
///
/// Entry `(i, j)` of table `a` holds `∂x^i ∂y^j a` evaluated at the
/// expansion point (along the moving center when one is present). Entries
/// are raw derivatives: Taylor factorials are applied by the consumer.
/// Missing entries are zero.
#[derive(Clone, Debug)]
pub struct CoefficientJet {
    a: BTreeMap<(u32, u32), ExpPoly>,
    b: BTreeMap<(u32, u32), ExpPoly>,
    c: BTreeMap<(u32, u32), ExpPoly>,
    f: BTreeMap<(u32, u32), ExpPoly>,
    x_center: f64,
    y_center: f64,
    center_drift: ExpPoly,
    max_order: u32,
}

impl CoefficientJet {
    fn new(x_center: f64, y_center: f64, center_drift: ExpPoly, max_order: u32) -> Self {
        CoefficientJet {
            a: BTreeMap::new(),
            b: BTreeMap::new(),
            c: BTreeMap::new(),
            f: BTreeMap::new(),
            x_center,
            y_center,
            center_drift,
            max_order,
        }
    }

    fn get(table: &BTreeMap<(u32, u32), ExpPoly>, i: u32, j: u32) -> ExpPoly {
        table.get(&(i, j)).cloned().unwrap_or_else(ExpPoly::zero)
    }

    /// `∂x^i ∂y^j a` at the expansion point.
    pub fn a(&self, i: u32, j: u32) -> ExpPoly {
        Self::get(&self.a, i, j)
    }

    /// `∂x^i ∂y^j b` at the expansion point.
    pub fn b(&self, i: u32, j: u32) -> ExpPoly {
        Self::get(&self.b, i, j)
    }

    /// `∂x^i ∂y^j c` at the expansion point.
    pub fn c(&self, i: u32, j: u32) -> ExpPoly {
        Self::get(&self.c, i, j)
    }

    /// `∂x^i ∂y^j f` at the expansion point.
    pub fn f(&self, i: u32, j: u32) -> ExpPoly {
        Self::get(&self.f, i, j)
    }

    /// Expansion point x-coordinate.
    pub fn x_center(&self) -> f64 {
        self.x_center
    }

    /// Expansion point y-coordinate (at time 0 when the center moves).
    pub fn y_center(&self) -> f64 {
        self.y_center
    }

    /// Displacement of the moving expansion center relative to time 0,
    /// identically zero for time-homogeneous models.
    pub fn center_drift(&self) -> &ExpPoly {
        &self.center_drift
    }

    /// Whether the expansion center moves with time.
    pub fn time_dependent_center(&self) -> bool {
        !self.center_drift.is_zero()
    }

    /// Largest total derivative order `i + j` this jet was built to.
    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    /// Errors unless the jet covers total derivative order `n`.
    pub fn require_order(&self, n: u32) -> Result<()> {
        if n > self.max_order {
            return Err(LsvaError::invalid(format!(
                "coefficient jet built to order {} cannot supply order-{n} partials",
                self.max_order
            )));
        }
        Ok(())
    }
}

/// CEV jet at log-spot `x_center`: `a = ½δ²e^{2(β−1)x}` gives
/// `∂x^i a = (2(β−1))^i a`; the model has no `y` coordinate, so `b`, `c`,
/// `f` are empty.
pub fn jet_cev(delta: f64, beta: f64, x_center: f64, order: u32) -> CoefficientJet {
    let mut jet = CoefficientJet::new(x_center, 0.0, ExpPoly::zero(), order);
    let g = 2.0 * (beta - 1.0);
    let a0 = 0.5 * delta * delta * (g * x_center).exp();
    for i in 0..=order {
        let value = g.powi(i as i32) * a0;
        if value != 0.0 {
            jet.a.insert((i, 0), ExpPoly::constant(value));
        }
    }
    jet
}

/// Heston jet at `(x, v)` where `v` is the time-0 variance.
///
/// The variance is handled through the change of variable that removes the
/// mean-reverting drift (the scaled variance `e^{κt}V_t`), whose
/// expectation `θ(e^{κt}−1) + v` serves as the moving expansion center.
/// On that coordinate the coefficients are linear in the variance, so only
/// orders 0 and 1 in `y` appear, with time dependence at rates `−κ`, `κ`,
/// and `2κ`.
pub fn jet_heston(
    kappa: f64,
    theta: f64,
    delta: f64,
    rho: f64,
    x: f64,
    v: f64,
    order: u32,
) -> CoefficientJet {
    let drift = ExpPoly::new(vec![
        EpTerm { coeff: theta, power: 0, rate: kappa },
        EpTerm { coeff: -theta, power: 0, rate: 0.0 },
    ]);
    let mut jet = CoefficientJet::new(x, v, drift, order);
    // a(t, z) = ½e^{−κt} z, evaluated along the center θ(e^{κt}−1)+v.
    jet.a.insert(
        (0, 0),
        ExpPoly::new(vec![
            EpTerm { coeff: 0.5 * theta, power: 0, rate: 0.0 },
            EpTerm { coeff: -0.5 * (theta - v), power: 0, rate: -kappa },
        ]),
    );
    if order >= 1 {
        jet.a.insert((0, 1), ExpPoly::term(0.5, 0, -kappa));
    }
    // b(t, z) = ½δ²e^{κt} z.
    let half_dd = 0.5 * delta * delta;
    jet.b.insert(
        (0, 0),
        ExpPoly::new(vec![
            EpTerm { coeff: half_dd * theta, power: 0, rate: 2.0 * kappa },
            EpTerm { coeff: -half_dd * (theta - v), power: 0, rate: kappa },
        ]),
    );
    if order >= 1 {
        jet.b.insert((0, 1), ExpPoly::term(half_dd, 0, kappa));
    }
    // c(t, z) = ρδ z.
    if rho != 0.0 {
        jet.c.insert(
            (0, 0),
            ExpPoly::new(vec![
                EpTerm { coeff: rho * delta * theta, power: 0, rate: kappa },
                EpTerm { coeff: rho * delta * (v - theta), power: 0, rate: 0.0 },
            ]),
        );
        if order >= 1 {
            jet.c.insert((0, 1), ExpPoly::constant(rho * delta));
        }
    }
    // f(t, z) = κθe^{κt}, independent of the state.
    jet.f.insert((0, 0), ExpPoly::term(kappa * theta, 0, kappa));
    jet
}

/// 3/2-model jet at `(x̄, ȳ)` with `ȳ` the log-variance:
/// `a = ½e^y`, `b = ½δ²e^y`, `c = ρδe^y`,
/// `f = κθ − (κ + ½δ²)e^y`; every y-derivative of an `e^y` term is the
/// term itself.
pub fn jet_three_halves(
    kappa: f64,
    theta: f64,
    delta: f64,
    rho: f64,
    x_center: f64,
    y_center: f64,
    order: u32,
) -> CoefficientJet {
    let mut jet = CoefficientJet::new(x_center, y_center, ExpPoly::zero(), order);
    let ey = y_center.exp();
    for j in 0..=order {
        jet.a.insert((0, j), ExpPoly::constant(0.5 * ey));
        jet.b.insert((0, j), ExpPoly::constant(0.5 * delta * delta * ey));
        if rho != 0.0 {
            jet.c.insert((0, j), ExpPoly::constant(rho * delta * ey));
        }
        let f_j = if j == 0 {
            kappa * theta - (kappa + 0.5 * delta * delta) * ey
        } else {
            -(kappa + 0.5 * delta * delta) * ey
        };
        jet.f.insert((0, j), ExpPoly::constant(f_j));
    }
    jet
}

/// SABR jet at `(x̄, ȳ)` with `ȳ` the log-volatility:
/// `a = ½e^{2y+2(β−1)x}` gives `∂x^i∂y^j a = (2(β−1))^i 2^j a`;
/// `c = ρδe^{y+(β−1)x}` gives `∂x^i∂y^j c = (β−1)^i c`;
/// `b = ½δ²` and `f = −½δ²` are constants.
pub fn jet_sabr(
    beta: f64,
    delta: f64,
    rho: f64,
    x_center: f64,
    y_center: f64,
    order: u32,
) -> CoefficientJet {
    let mut jet = CoefficientJet::new(x_center, y_center, ExpPoly::zero(), order);
    let a0 = 0.5 * (2.0 * y_center + 2.0 * (beta - 1.0) * x_center).exp();
    let c0 = rho * delta * (y_center + (beta - 1.0) * x_center).exp();
    for i in 0..=order {
        for j in 0..=(order - i) {
            let a_ij = (2.0 * (beta - 1.0)).powi(i as i32) * 2f64.powi(j as i32) * a0;
            if a_ij != 0.0 {
                jet.a.insert((i, j), ExpPoly::constant(a_ij));
            }
            if rho != 0.0 {
                let c_ij = (beta - 1.0).powi(i as i32) * c0;
                if c_ij != 0.0 {
                    jet.c.insert((i, j), ExpPoly::constant(c_ij));
                }
            }
        }
    }
    jet.b.insert((0, 0), ExpPoly::constant(0.5 * delta * delta));
    jet.f.insert((0, 0), ExpPoly::constant(-0.5 * delta * delta));
    jet
}

/// Assembles a jet entry-by-entry, the extension point for dynamics that
/// none of the named [`ModelSpec`] variants cover: supply the partials of
/// `a`, `b`, `c`, `f` at the expansion point as exp-polynomials in time
/// and feed the result to the jet-level expansion functions. Entries left
/// unset are zero; entries are raw derivatives, not Taylor coefficients.
pub struct JetBuilder {
    jet: CoefficientJet,
}

impl JetBuilder {
    /// Starts an empty jet centered at `(x_center, y_center)` able to hold
    /// partials up to total order `max_order`.
    pub fn new(x_center: f64, y_center: f64, max_order: u32) -> Self {
        JetBuilder { jet: CoefficientJet::new(x_center, y_center, ExpPoly::zero(), max_order) }
    }

    /// Sets `∂x^i ∂y^j a` at the expansion point.
    #[must_use]
    pub fn a(mut self, i: u32, j: u32, value: ExpPoly) -> Self {
        self.jet.a.insert((i, j), value);
        self
    }

    /// Sets `∂x^i ∂y^j b` at the expansion point.
    #[must_use]
    pub fn b(mut self, i: u32, j: u32, value: ExpPoly) -> Self {
        self.jet.b.insert((i, j), value);
        self
    }

    /// Sets `∂x^i ∂y^j c` at the expansion point.
    #[must_use]
    pub fn c(mut self, i: u32, j: u32, value: ExpPoly) -> Self {
        self.jet.c.insert((i, j), value);
        self
    }

    /// Sets `∂x^i ∂y^j f` at the expansion point.
    #[must_use]
    pub fn f(mut self, i: u32, j: u32, value: ExpPoly) -> Self {
        self.jet.f.insert((i, j), value);
        self
    }

    /// Finalizes the jet.
    pub fn build(self) -> CoefficientJet {
        self.jet
    }
}

/// Builds the jet for any model at query point `(x, y)` (the `y` is
/// ignored by one-factor models). Validates the parameters first.
///
/// The meaning of `y` is per-model: initial variance for Heston,
/// log-variance for 3/2, log-volatility for SABR.
pub fn build_jet(spec: &ModelSpec, x: f64, y: f64, order: u32) -> Result<CoefficientJet> {
    spec.validate()?;
    match *spec {
        ModelSpec::Cev { delta, beta } => Ok(jet_cev(delta, beta, x, order)),
        ModelSpec::Heston { kappa, theta, delta, rho } => {
            if !(y > 0.0) {
                return Err(LsvaError::invalid(format!(
                    "Heston initial variance must be strictly positive, got {y}"
                )));
            }
            Ok(jet_heston(kappa, theta, delta, rho, x, y, order))
        }
        ModelSpec::ThreeHalves { kappa, theta, delta, rho } => {
            Ok(jet_three_halves(kappa, theta, delta, rho, x, y, order))
        }
        ModelSpec::Sabr { beta, delta, rho } => Ok(jet_sabr(beta, delta, rho, x, y, order)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // --- parameter validation ---

    #[test]
    fn validate_accepts_figure_parameter_sets() {
        let specs = [
            ModelSpec::Cev { delta: 0.2, beta: 0.3 },
            ModelSpec::Heston { kappa: 1.15, theta: 0.04, delta: 0.2, rho: -0.4 },
            ModelSpec::ThreeHalves { kappa: 0.25, theta: 0.1, delta: 0.8, rho: -0.85 },
            ModelSpec::Sabr { beta: 0.4, delta: 0.25, rho: 0.0 },
        ];
        for spec in specs {
            spec.validate().expect("valid parameter set");
            assert!(spec.warnings().is_empty(), "{}: unexpected warning", spec.name());
        }
    }

    #[test]
    fn validate_rejects_bad_parameters() {
        let bad = [
            ModelSpec::Cev { delta: 0.0, beta: 0.3 },
            ModelSpec::Cev { delta: -0.1, beta: 0.3 },
            ModelSpec::Heston { kappa: 0.0, theta: 0.04, delta: 0.2, rho: -0.4 },
            ModelSpec::Heston { kappa: 1.0, theta: -0.04, delta: 0.2, rho: -0.4 },
            ModelSpec::Heston { kappa: 1.0, theta: 0.04, delta: 0.2, rho: -1.0 },
            ModelSpec::ThreeHalves { kappa: 0.25, theta: 0.1, delta: 0.8, rho: 1.5 },
            ModelSpec::Sabr { beta: 0.4, delta: 0.25, rho: 1.0 },
        ];
        for spec in bad {
            assert!(
                matches!(spec.validate(), Err(LsvaError::InvalidInput { .. })),
                "{spec:?} should be rejected"
            );
        }
    }

    #[test]
    fn heston_nonnegative_rho_warns_but_validates() {
        let spec = ModelSpec::Heston { kappa: 1.15, theta: 0.04, delta: 0.2, rho: 0.3 };
        spec.validate().expect("warning, not error");
        let warnings = spec.warnings();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("moment explosion"));
    }

    #[test]
    fn model_spec_round_trips_through_json() {
        let specs = [
            ModelSpec::Cev { delta: 0.2, beta: 0.3 },
            ModelSpec::Heston { kappa: 1.15, theta: 0.04, delta: 0.2, rho: -0.4 },
            ModelSpec::ThreeHalves { kappa: 0.25, theta: 0.1, delta: 0.8, rho: -0.85 },
            ModelSpec::Sabr { beta: 0.4, delta: 0.25, rho: 0.0 },
        ];
        for spec in specs {
            let json = serde_json::to_string(&spec).expect("serialize");
            assert!(json.contains(&format!("\"variant\":\"{}\"", spec.name())));
            let back: ModelSpec = serde_json::from_str(&json).expect("deserialize");
            assert_eq!(back, spec);
        }
        let err = serde_json::from_str::<ModelSpec>(
            r#"{"variant":"cev","delta":0.2,"beta":0.3,"gamma":1.0}"#,
        );
        assert!(err.is_err(), "unknown fields must be rejected");
    }

    // --- printed-value spot checks ---

    #[test]
    fn cev_jet_reference_values() {
        let jet = jet_cev(0.2, 0.3, 0.0, 3);
        assert!((jet.a(0, 0).eval(0.7) - 0.02).abs() < 1e-16);
        assert!((jet.a(1, 0).eval(0.7) - (-0.028)).abs() < 1e-16);
        // Derivative ratio is exactly (2(β−1))² independent of x̄.
        let jet = jet_cev(0.2, 0.3, 0.4, 3);
        let ratio = jet.a(2, 0).eval(0.0) / jet.a(0, 0).eval(0.0);
        assert!((ratio - 1.96).abs() < 1e-12);
        assert!(jet.b(0, 0).is_zero() && jet.c(0, 0).is_zero() && jet.f(0, 0).is_zero());
    }

    #[test]
    fn lognormal_cev_has_no_higher_terms() {
        let jet = jet_cev(0.2, 1.0, 0.3, 4);
        assert!((jet.a(0, 0).eval(1.0) - 0.02).abs() < 1e-16);
        for i in 1..=4 {
            assert!(jet.a(i, 0).is_zero(), "order {i} should vanish at beta = 1");
        }
    }

    #[test]
    fn heston_jet_reference_values() {
        let (kappa, theta, delta, rho, v) = (1.15, 0.04, 0.2, -0.4, 0.05);
        let jet = jet_heston(kappa, theta, delta, rho, 0.0, v, 2);
        assert!(jet.time_dependent_center());
        for t in [0.0, 0.5, 2.0] {
            let center = theta * ((kappa * t).exp() - 1.0) + v;
            assert!((jet.center_drift().eval(t) - (center - v)).abs() < 1e-15);
            // Raw entries evaluated along the center.
            let a00 = 0.5 * (-kappa * t).exp() * center;
            assert!((jet.a(0, 0).eval(t) - a00).abs() < 1e-15);
            let dv_a = 0.5 * (-kappa * t).exp();
            assert!((jet.a(0, 1).eval(t) - dv_a).abs() < 1e-16);
            let b00 = 0.5 * delta * delta * (kappa * t).exp() * center;
            assert!((jet.b(0, 0).eval(t) - b00).abs() < 1e-15);
            let f00 = kappa * theta * (kappa * t).exp();
            assert!((jet.f(0, 0).eval(t) - f00).abs() < 1e-15);
            let c00 = rho * delta * center;
            assert!((jet.c(0, 0).eval(t) - c00).abs() < 1e-16);
        }
        // Linearity in the variance: nothing above first order.
        assert!(jet.a(0, 2).is_zero() && jet.b(0, 2).is_zero());
        assert!(jet.a(1, 0).is_zero(), "no x-dependence");
    }

    #[test]
    fn heston_base_variance_integral_matches_closed_form() {
        // (2/τ)∫_0^τ a₀₀ = (−θ + θκτ + e^{−κτ}(θ−v) + v)/(κτ), the
        // closed-form effective variance; exact integration of the jet
        // entry must reproduce it.
        use crate::timefunc::{ep_integral, LowerBound};
        for (kappa, theta, v, tau) in [
            (1.15, 0.04, 0.04, 1.0),
            (1.15, 0.04, 0.09, 0.25),
            (0.3, 0.5, 0.1, 10.0),
            (2.0, 0.01, 0.02, 0.05),
        ] {
            let jet = jet_heston(kappa, theta, 0.2, -0.4, 0.0, v, 2);
            let integral = ep_integral(&jet.a(0, 0), LowerBound::Numeric(0.0), tau);
            let got = 2.0 / tau * integral.eval(0.0);
            let want =
                (-theta + theta * kappa * tau + (-kappa * tau).exp() * (theta - v) + v)
                    / (kappa * tau);
            assert!(
                ((got - want) / want).abs() < 1e-14,
                "kappa={kappa} theta={theta} v={v} tau={tau}: got {got}, want {want}"
            );
            // v = θ collapses the effective variance to θ itself.
            if (v - theta).abs() < 1e-15 {
                assert!((got - theta).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn three_halves_jet_reference_values() {
        let (kappa, theta, delta, rho) = (0.25, 0.1f64, 0.8, -0.85);
        let y = theta.ln();
        let jet = jet_three_halves(kappa, theta, delta, rho, 0.0, y, 3);
        assert!(!jet.time_dependent_center());
        assert!((jet.a(0, 0).eval(2.0) - 0.5 * theta).abs() < 1e-16);
        let df = -(kappa + 0.5 * delta * delta) * theta;
        assert!((jet.f(0, 1).eval(0.0) - df).abs() < 1e-15);
        let c = rho * delta * theta;
        assert!((jet.c(0, 0).eval(0.0) - c).abs() < 1e-16);
        assert!((jet.c(0, 3).eval(0.0) - c).abs() < 1e-16, "∂y c = c");
        let f0 = kappa * theta - (kappa + 0.5 * delta * delta) * theta;
        assert!((jet.f(0, 0).eval(0.0) - f0).abs() < 1e-15);
    }

    #[test]
    fn sabr_jet_reference_values() {
        let (beta, delta, rho) = (0.4, 0.25, -0.3);
        let jet = jet_sabr(beta, delta, rho, 0.0, -1.3, 4);
        let a0 = 0.5 * (-2.6f64).exp();
        assert!((jet.a(0, 0).eval(0.0) - a0).abs() < 1e-7);
        assert!((a0 - 0.0371368).abs() < 1e-6);
        let mixed = 2.0 * 2.0 * (beta - 1.0) * a0;
        assert!((jet.a(1, 1).eval(0.0) - mixed).abs() < 1e-15);
        assert!((jet.b(0, 0).eval(0.0) - 0.03125).abs() < 1e-16);
        assert!((jet.f(0, 0).eval(0.0) + 0.03125).abs() < 1e-16);
        assert!(jet.b(0, 1).is_zero() && jet.f(1, 0).is_zero());

        let uncorrelated = jet_sabr(beta, delta, 0.0, 0.0, -1.3, 4);
        for i in 0..=2 {
            for j in 0..=2 {
                assert!(uncorrelated.c(i, j).is_zero(), "rho=0 must kill c");
            }
        }
    }

    #[test]
    fn require_order_guards_depth() {
        let jet = jet_cev(0.2, 0.3, 0.0, 2);
        jet.require_order(2).expect("covered");
        assert!(matches!(jet.require_order(3), Err(LsvaError::InvalidInput { .. })));
    }

    // --- finite-difference cross-check of every jet entry ---

    /// m-th central difference in one variable using a 7-point stencil
    /// with O(h⁴) truncation, accurate enough for fourth derivatives of
    /// smooth exponentials at moderate steps.
    fn central_derivative(f: &dyn Fn(f64) -> f64, x0: f64, m: u32, h: f64) -> f64 {
        // Stencil coefficients for d^m/dx^m at fourth-order accuracy.
        let weights: [f64; 7] = match m {
            0 => [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            1 => [-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
            2 => [
                1.0 / 90.0,
                -3.0 / 20.0,
                3.0 / 2.0,
                -49.0 / 18.0,
                3.0 / 2.0,
                -3.0 / 20.0,
                1.0 / 90.0,
            ],
            3 => [1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0],
            4 => [-1.0 / 6.0, 2.0, -13.0 / 2.0, 28.0 / 3.0, -13.0 / 2.0, 2.0, -1.0 / 6.0],
            _ => panic!("stencil implemented up to fourth derivatives"),
        };
        let sum: f64 = weights
            .iter()
            .enumerate()
            .map(|(idx, w)| w * f(x0 + (idx as f64 - 3.0) * h))
            .sum();
        sum / h.powi(m as i32)
    }

    /// Mixed partial ∂x^i∂y^j by nesting the one-dimensional stencils.
    fn mixed_derivative(f: &dyn Fn(f64, f64) -> f64, x0: f64, y0: f64, i: u32, j: u32) -> f64 {
        let h = 0.02;
        central_derivative(
            &|x| central_derivative(&|y| f(x, y), y0, j, h),
            x0,
            i,
            h,
        )
    }

    /// Checks one jet table against the model's coefficient function at a
    /// fixed evaluation time.
    fn check_table(
        label: &str,
        jet_entry: &dyn Fn(u32, u32) -> ExpPoly,
        coefficient: &dyn Fn(f64, f64) -> f64,
        x0: f64,
        y0: f64,
        t: f64,
        order: u32,
    ) {
        // Stencil noise scales with the coefficient's magnitude, not the
        // derivative's, so zero entries are compared against that scale.
        let f_scale = coefficient(x0, y0).abs();
        for i in 0..=order {
            for j in 0..=(order - i) {
                let want = mixed_derivative(coefficient, x0, y0, i, j);
                let got = jet_entry(i, j).eval(t);
                let scale = want.abs().max(f_scale).max(1e-12);
                assert!(
                    ((got - want) / scale).abs() < 1e-6,
                    "{label} entry ({i},{j}) at t={t}: jet {got}, finite diff {want}"
                );
            }
        }
    }

    #[test]
    fn jet_entries_match_finite_differences() {
        // Ten deterministic pseudo-random points per model, spanning the
        // ranges the expansions are used in.
        let points: Vec<(f64, f64)> = (0..10)
            .map(|s| {
                let u = (s as f64 * 0.37 + 0.11).fract();
                let w = (s as f64 * 0.61 + 0.43).fract();
                (0.6 * u - 0.3, 0.8 * w - 1.5)
            })
            .collect();
        let order = 4;

        for &(x0, y0) in &points {
            let (delta, beta) = (0.2, 0.3);
            let jet = jet_cev(delta, beta, x0, order);
            let a = move |x: f64, _y: f64| 0.5 * delta * delta * (2.0 * (beta - 1.0) * x).exp();
            check_table("cev a", &|i, j| jet.a(i, j), &a, x0, y0, 0.0, order);
        }

        for &(x0, y_raw) in &points {
            // Variance coordinate: keep it positive.
            let v0 = 0.03 + 0.1 * (y_raw + 1.5);
            let (kappa, theta, delta, rho) = (1.15, 0.04, 0.2, -0.4);
            let jet = jet_heston(kappa, theta, delta, rho, x0, v0, order);
            // At a fixed time t, the raw entries are partials in the scaled
            // variance, evaluated at the moving center.
            for t in [0.0, 0.8] {
                let center = theta * ((kappa * t).exp() - 1.0) + v0;
                let a = move |_x: f64, z: f64| 0.5 * (-kappa * t).exp() * z;
                let b = move |_x: f64, z: f64| 0.5 * delta * delta * (kappa * t).exp() * z;
                let c = move |_x: f64, z: f64| rho * delta * z;
                let f = move |_x: f64, _z: f64| kappa * theta * (kappa * t).exp();
                check_table("heston a", &|i, j| jet.a(i, j), &a, x0, center, t, order);
                check_table("heston b", &|i, j| jet.b(i, j), &b, x0, center, t, order);
                check_table("heston c", &|i, j| jet.c(i, j), &c, x0, center, t, order);
                check_table("heston f", &|i, j| jet.f(i, j), &f, x0, center, t, order);
            }
        }

        for &(x0, y0) in &points {
            let (kappa, theta, delta, rho) = (0.25, 0.1, 0.8, -0.85);
            let jet = jet_three_halves(kappa, theta, delta, rho, x0, y0, order);
            let a = move |_x: f64, y: f64| 0.5 * y.exp();
            let b = move |_x: f64, y: f64| 0.5 * delta * delta * y.exp();
            let c = move |_x: f64, y: f64| rho * delta * y.exp();
            let f = move |_x: f64, y: f64| {
                kappa * (theta - y.exp()) - 0.5 * delta * delta * y.exp()
            };
            check_table("3/2 a", &|i, j| jet.a(i, j), &a, x0, y0, 0.0, order);
            check_table("3/2 b", &|i, j| jet.b(i, j), &b, x0, y0, 0.0, order);
            check_table("3/2 c", &|i, j| jet.c(i, j), &c, x0, y0, 0.0, order);
            check_table("3/2 f", &|i, j| jet.f(i, j), &f, x0, y0, 0.0, order);
        }

        for &(x0, y0) in &points {
            let (beta, delta, rho) = (0.4, 0.25, -0.6);
            let jet = jet_sabr(beta, delta, rho, x0, y0, order);
            let a = move |x: f64, y: f64| 0.5 * (2.0 * y + 2.0 * (beta - 1.0) * x).exp();
            let b = move |_x: f64, _y: f64| 0.5 * delta * delta;
            let c = move |x: f64, y: f64| rho * delta * (y + (beta - 1.0) * x).exp();
            let f = move |_x: f64, _y: f64| -0.5 * delta * delta;
            check_table("sabr a", &|i, j| jet.a(i, j), &a, x0, y0, 0.0, order);
            check_table("sabr b", &|i, j| jet.b(i, j), &b, x0, y0, 0.0, order);
            check_table("sabr c", &|i, j| jet.c(i, j), &c, x0, y0, 0.0, order);
            check_table("sabr f", &|i, j| jet.f(i, j), &f, x0, y0, 0.0, order);
        }
    }

    #[test]
    fn build_jet_dispatches_and_validates() {
        let spec = ModelSpec::Heston { kappa: 1.15, theta: 0.04, delta: 0.2, rho: -0.4 };
        let jet = build_jet(&spec, 0.0, 0.04, 3).expect("valid");
        assert!(jet.time_dependent_center());
        assert!(matches!(
            build_jet(&spec, 0.0, -0.01, 3),
            Err(LsvaError::InvalidInput { .. })
        ));
        let bad = ModelSpec::Sabr { beta: 0.4, delta: -1.0, rho: 0.0 };
        assert!(matches!(
            build_jet(&bad, 0.0, -1.3, 3),
            Err(LsvaError::InvalidInput { .. })
        ));
    }
}
