//! Implied-volatility and transition-density expansions.
//!
//! This module turns the operator weights of [`crate::opalgebra`] into
//! numbers a desk can use: the base volatility `σ₀`, price corrections
//! `u_n`, implied-volatility corrections `σ_n`, and their running sums.
//! The price corrections collapse onto Hermite-polynomial ratios of the
//! Black-Scholes price, so no numerical integration ever happens here;
//! the volatility corrections follow by a Faà di Bruno inversion whose
//! combinatorial core is [`bell_polynomial`]. A parallel reduction keeps
//! the full operator (offsets and `∂y` monomials included) and applies it
//! to the base Gaussian kernel, which yields transition-density
//! approximations for the same models.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::blackscholes::{
    bs_dxx_minus_dx, bs_price, bs_vega, vega_ratio, xratio, BsQuote, SigmaDerivTable,
};
use crate::error::{LsvaError, Result};
use crate::models::{build_jet, CoefficientJet, ModelSpec};
use crate::opalgebra::{dyson_full, dyson_ltilde_with_cap, DEFAULT_ORDER_CAP};
use crate::timefunc::{ep_integral, ExpPoly, LowerBound};
use crate::util::factorial;

/// A pricing query: time to maturity, spot coordinates, log-strike, and an
/// optional deterministic short rate.
///
/// The rate enters only through the strike shift `k → k − ∫₀^τ r(s)ds`;
/// with that shift the zero-rate machinery produces the implied
/// volatility of the discounted problem.
#[derive(Clone, Debug)]
pub struct QueryPoint {
    /// Time to maturity, strictly positive.
    pub tau: f64,
    /// Log spot.
    pub x: f64,
    /// Volatility-factor coordinate; ignored by one-factor models. Its
    /// meaning is per-model: variance for Heston, log-variance for 3/2,
    /// log-volatility for SABR.
    pub y: f64,
    /// Log strike.
    pub k: f64,
    /// Deterministic short rate as a function of time from the query,
    /// `None` for the zero-rate problem.
    pub rate: Option<ExpPoly>,
}

impl QueryPoint {
    /// A zero-rate query.
    pub fn new(tau: f64, x: f64, y: f64, k: f64) -> Self {
        QueryPoint { tau, x, y, k, rate: None }
    }

    /// Attaches a deterministic short rate.
    #[must_use]
    pub fn with_rate(mut self, rate: ExpPoly) -> Self {
        self.rate = Some(rate);
        self
    }

    /// Log strike after the deterministic-rate shift `k − ∫₀^τ r(s)ds`.
    pub fn effective_strike(&self) -> f64 {
        match &self.rate {
            None => self.k,
            Some(r) => {
                self.k - ep_integral(r, LowerBound::Numeric(0.0), self.tau).eval(0.0)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(LsvaError::invalid(format!(
                "time to maturity must be strictly positive and finite, got {}",
                self.tau
            )));
        }
        for (name, value) in [("x", self.x), ("y", self.y), ("k", self.k)] {
            if !value.is_finite() {
                return Err(LsvaError::invalid(format!("{name} must be finite, got {value}")));
            }
        }
        Ok(())
    }
}

/// The order-`n` price correction in collapsed form: `u_n / ∂σ u_BS` as a
/// finite Hermite series with coefficients `χ_m = w_m / (τ σ₀)`.
#[derive(Clone, Debug)]
pub struct ChiCoefficients {
    /// Correction order this series belongs to.
    pub order: u32,
    /// `(m, χ_m)` pairs; `m` is the `∂x`-power the weight sits on.
    pub entries: Vec<(u32, f64)>,
}

impl ChiCoefficients {
    /// Evaluates `u_n / ∂σ u_BS = Σ_m χ_m (−1/(σ√(2τ)))^m H_m(ζ)` at the
    /// quote the series was built for.
    pub fn evaluate(&self, q: &BsQuote) -> f64 {
        self.entries.iter().map(|&(m, chi)| chi * xratio(m, q)).sum()
    }
}

/// A fully assembled expansion at one query point: the base volatility,
/// the correction sequence, and the matching price terms.
#[derive(Clone, Debug)]
pub struct IvExpansion {
    /// Base volatility `σ₀`.
    pub sigma0: f64,
    /// Corrections `σ_1 … σ_N`.
    pub corrections: Vec<f64>,
    /// `σ₀ + Σ σ_n`, the order-`N` implied-volatility approximation.
    pub total: f64,
    /// Price terms `u_0 … u_N` (`u_0` is the Black-Scholes price at `σ₀`).
    pub price_terms: Vec<f64>,
    /// `Σ u_n`, the order-`N` price approximation.
    pub price_total: f64,
}

impl IvExpansion {
    /// Expansion order `N` (number of corrections carried).
    pub fn order(&self) -> usize {
        self.corrections.len()
    }
}

/// Base volatility: the root-mean-square of the leading diffusion
/// coefficient over the maturity window, `σ₀ = √((2/τ)∫₀^τ a₀(s)ds)`.
///
/// # Errors
///
/// [`LsvaError::InvalidInput`] for a non-positive maturity;
/// [`LsvaError::Domain`] when the integrated coefficient is not strictly
/// positive, which signals a misconfigured model rather than a numerical
/// failure.
pub fn sigma0(jet: &CoefficientJet, tau: f64) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(LsvaError::invalid(format!(
            "time to maturity must be strictly positive and finite, got {tau}"
        )));
    }
    let total_variance = 2.0 * ep_integral(&jet.a(0, 0), LowerBound::Numeric(0.0), tau).eval(0.0);
    if !(total_variance > 0.0) {
        return Err(LsvaError::domain(format!(
            "integrated base variance must be strictly positive, got {total_variance}"
        )));
    }
    Ok((total_variance / tau).sqrt())
}

/// Order-`n` price correction at a quote built with `σ = σ₀`.
///
/// Returns both the direct evaluation `u_n = Σ_m w_m ∂x^m(∂x²−∂x)u_BS`
/// and the collapsed [`ChiCoefficients`] form; the two agree to roundoff
/// and the redundancy is kept as a cross-check surface.
///
/// # Errors
///
/// [`LsvaError::InvalidInput`] for `n = 0`; otherwise whatever the weight
/// construction reports (order cap, jet depth).
pub fn price_correction(
    jet: &CoefficientJet,
    n: u32,
    q: &BsQuote,
) -> Result<(f64, ChiCoefficients)> {
    if n == 0 {
        return Err(LsvaError::invalid(
            "price corrections start at order 1; order 0 is the Black-Scholes price itself",
        ));
    }
    let weights = dyson_ltilde_with_cap(jet, n, q.tau, 0.0, n.max(DEFAULT_ORDER_CAP))?;
    let gauss = bs_dxx_minus_dx(q);
    let mut direct = 0.0;
    let mut entries = Vec::with_capacity(weights.len());
    for &(m, w) in &weights {
        direct += w * xratio(m, q) * gauss;
        entries.push((m, w / (q.tau * q.sigma)));
    }
    Ok((direct, ChiCoefficients { order: n, entries }))
}

/// Partial Bell polynomial `B_{n,h}(z_1, …, z_{n−h+1})`: the sum over all
/// ways to partition `n` objects into `h` blocks, each monomial weighted
/// by `n!/(j_1!⋯) · Π (z_i/i!)^{j_i}` with `j_i` blocks of size `i`.
///
/// # Errors
///
/// [`LsvaError::InvalidInput`] unless `1 ≤ h ≤ n` and `args` supplies the
/// `n−h+1` leading arguments.
pub fn bell_polynomial(n: u32, h: u32, args: &[f64]) -> Result<f64> {
    if h < 1 || h > n {
        return Err(LsvaError::invalid(format!(
            "Bell polynomial needs 1 <= h <= n, got n={n}, h={h}"
        )));
    }
    let width = (n - h + 1) as usize;
    if args.len() < width {
        return Err(LsvaError::invalid(format!(
            "Bell polynomial B_({n},{h}) needs {width} arguments, got {}",
            args.len()
        )));
    }
    let scaled: Vec<f64> = args[..width]
        .iter()
        .enumerate()
        .map(|(i, z)| z / factorial(i as u32 + 1))
        .collect();
    let mut total = 0.0;
    bell_sum(1, h, n, 1.0, &scaled, &mut total);
    Ok(total * factorial(n))
}

/// Recursive enumeration over block-size multiplicities: at size class
/// `size`, try every count `j` compatible with the remaining block and
/// weight budgets, carrying `Π (z_i/i!)^{j_i} / j_i!`.
fn bell_sum(size: usize, blocks_left: u32, weight_left: u32, acc: f64, scaled: &[f64], total: &mut f64) {
    if size > scaled.len() {
        if blocks_left == 0 && weight_left == 0 {
            *total += acc;
        }
        return;
    }
    let max_count = blocks_left.min(weight_left / size as u32);
    let mut power = acc;
    bell_sum(size + 1, blocks_left, weight_left, power, scaled, total);
    for j in 1..=max_count {
        power *= scaled[size - 1] / j as f64;
        bell_sum(
            size + 1,
            blocks_left - j,
            weight_left - j * size as u32,
            power,
            scaled,
            total,
        );
    }
}

/// Solves the order-`n` layer of the implied-volatility recursion:
///
/// `σ_n = u_n/∂σu − (1/n!) Σ_{h=2}^n B_{n,h}(1!σ_1, …, (n−h+1)!σ_{n−h+1}) · ∂σ^h u/∂σu`
///
/// `u_ratios[j]` must hold `u_j/∂σu_BS` for `1 ≤ j ≤ n` (index 0 is
/// ignored); `prior` holds `σ_1 … σ_{n−1}`.
///
/// # Errors
///
/// [`LsvaError::InvalidInput`] when the inputs do not cover order `n`.
pub fn sigma_correction(
    n: usize,
    u_ratios: &[f64],
    prior: &[f64],
    q: &BsQuote,
    table: &SigmaDerivTable,
) -> Result<f64> {
    if n < 1 {
        return Err(LsvaError::invalid("volatility corrections start at order 1"));
    }
    if u_ratios.len() <= n {
        return Err(LsvaError::invalid(format!(
            "u_ratios must cover index {n}, got length {}",
            u_ratios.len()
        )));
    }
    if prior.len() + 1 < n {
        return Err(LsvaError::invalid(format!(
            "prior corrections must cover orders 1..{}, got {}",
            n - 1,
            prior.len()
        )));
    }
    let mut value = u_ratios[n];
    for h in 2..=n {
        let width = n - h + 1;
        let args: Vec<f64> =
            (1..=width).map(|i| factorial(i as u32) * prior[i - 1]).collect();
        let bell = bell_polynomial(n as u32, h as u32, &args)?;
        value -= bell * vega_ratio(h, q, table)? / factorial(n as u32);
    }
    Ok(value)
}

/// Expansion driver bound to one model and one spot point `(x, y)`.
///
/// The operator weights `w_m` depend on the maturity but not on the
/// strike, so a smile sweep reuses them; the engine caches them per
/// `(order, maturity)` behind a mutex and hands out shared immutable
/// snapshots, which keeps strike grids embarrassingly parallel.
pub struct ExpansionEngine {
    model: ModelSpec,
    jet: CoefficientJet,
    order_cap: u32,
    weights: Mutex<HashMap<(u32, u64), Arc<Vec<(u32, f64)>>>>,
}

impl ExpansionEngine {
    /// Engine with the default order cap.
    pub fn new(model: &ModelSpec, x: f64, y: f64) -> Result<Self> {
        Self::with_order_cap(model, x, y, DEFAULT_ORDER_CAP)
    }

    /// Engine able to expand to `order_cap`; the jet is built once at that
    /// depth. Model parameters are validated here.
    pub fn with_order_cap(model: &ModelSpec, x: f64, y: f64, order_cap: u32) -> Result<Self> {
        if order_cap == 0 {
            return Err(LsvaError::invalid("order cap must be at least 1"));
        }
        let jet = build_jet(model, x, y, order_cap)?;
        Ok(ExpansionEngine {
            model: *model,
            jet,
            order_cap,
            weights: Mutex::new(HashMap::new()),
        })
    }

    /// The model this engine expands.
    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    /// The coefficient jet at the bound spot point.
    pub fn jet(&self) -> &CoefficientJet {
        &self.jet
    }

    /// Deepest order this engine can produce.
    pub fn order_cap(&self) -> u32 {
        self.order_cap
    }

    /// Base volatility for maturity `tau`.
    pub fn base_vol(&self, tau: f64) -> Result<f64> {
        sigma0(&self.jet, tau)
    }

    /// Cached operator weights for one order and maturity.
    fn cached_weights(&self, n: u32, tau: f64) -> Result<Arc<Vec<(u32, f64)>>> {
        let key = (n, tau.to_bits());
        if let Some(hit) = self.weights.lock().expect("weights cache poisoned").get(&key) {
            return Ok(Arc::clone(hit));
        }
        // Built outside the lock: construction can take a while at high
        // orders and the entries are immutable once inserted.
        let built = Arc::new(dyson_ltilde_with_cap(&self.jet, n, tau, 0.0, self.order_cap)?);
        let mut guard = self.weights.lock().expect("weights cache poisoned");
        Ok(Arc::clone(guard.entry(key).or_insert(built)))
    }

    /// Runs the full pipeline at maturity `tau` and log-strike `k`:
    /// base volatility, price corrections through order `n_max`, and the
    /// volatility recursion.
    ///
    /// # Errors
    ///
    /// [`LsvaError::InvalidInput`] when `n_max` exceeds the engine cap or
    /// the maturity is not positive; [`LsvaError::Domain`] from the base
    /// volatility or quote construction.
    pub fn expand(
        &self,
        tau: f64,
        k: f64,
        rate: Option<&ExpPoly>,
        n_max: u32,
    ) -> Result<IvExpansion> {
        if n_max > self.order_cap {
            return Err(LsvaError::invalid(format!(
                "expansion order {n_max} exceeds the engine cap {}",
                self.order_cap
            )));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(LsvaError::invalid(format!(
                "time to maturity must be strictly positive and finite, got {tau}"
            )));
        }
        let k_eff = match rate {
            None => k,
            Some(r) => k - ep_integral(r, LowerBound::Numeric(0.0), tau).eval(0.0),
        };
        let sig0 = sigma0(&self.jet, tau)?;
        let q = BsQuote::new(sig0, tau, self.jet.x_center(), k_eff)?;
        let mut price_terms = vec![bs_price(&q)];
        let mut corrections: Vec<f64> = Vec::with_capacity(n_max as usize);
        if n_max >= 1 {
            let table = SigmaDerivTable::new(n_max as usize);
            let vega = bs_vega(&q);
            // u_ratios[j] = u_j/∂σu; the unused index 0 keeps the order as
            // the index.
            let mut u_ratios = vec![0.0];
            for n in 1..=n_max {
                let weights = self.cached_weights(n, tau)?;
                let ratio: f64 = weights
                    .iter()
                    .map(|&(m, w)| (w / (tau * sig0)) * xratio(m, &q))
                    .sum();
                u_ratios.push(ratio);
                price_terms.push(ratio * vega);
                let next = sigma_correction(n as usize, &u_ratios, &corrections, &q, &table)?;
                corrections.push(next);
            }
        }
        let total = sig0 + corrections.iter().sum::<f64>();
        let price_total = price_terms.iter().sum();
        Ok(IvExpansion { sigma0: sig0, corrections, total, price_terms, price_total })
    }
}

/// One-shot expansion at a query point; builds a transient
/// [`ExpansionEngine`] sized to the requested order. Prefer a shared
/// engine when sweeping strikes or maturities.
pub fn expand(model: &ModelSpec, point: &QueryPoint, n_max: u32) -> Result<IvExpansion> {
    point.validate()?;
    let engine = ExpansionEngine::with_order_cap(model, point.x, point.y, n_max.max(1))?;
    engine.expand(point.tau, point.k, point.rate.as_ref(), n_max)
}

// ---------------------------------------------------------------------------
// Transition densities.
// ---------------------------------------------------------------------------

/// Polynomial in the two centered terminal coordinates, used to carry
/// Gaussian derivative factors: key `(i, j)` is the coefficient of
/// `w₁^i w₂^j`.
type PolyXY = BTreeMap<(u32, u32), f64>;

fn poly_add(poly: &mut PolyXY, key: (u32, u32), value: f64) {
    let entry = poly.entry(key).or_insert(0.0);
    *entry += value;
    if *entry == 0.0 {
        poly.remove(&key);
    }
}

/// One backward-variable derivative of `P(w)·N(w)`: with `w = ζ − μ(z)`
/// and `∂μ/∂z = 1`, differentiation in `z` maps the polynomial part to
/// `−∂P + P·(precision row · w)`.
fn poly_backward_step(poly: &PolyXY, row: (f64, f64), axis: usize) -> PolyXY {
    let mut out = PolyXY::new();
    for (&(i, j), &coeff) in poly {
        match axis {
            0 if i > 0 => poly_add(&mut out, (i - 1, j), -(f64::from(i)) * coeff),
            1 if j > 0 => poly_add(&mut out, (i, j - 1), -(f64::from(j)) * coeff),
            _ => {}
        }
        poly_add(&mut out, (i + 1, j), row.0 * coeff);
        poly_add(&mut out, (i, j + 1), row.1 * coeff);
    }
    out
}

fn poly_eval(poly: &PolyXY, w1: f64, w2: f64) -> f64 {
    poly.iter()
        .map(|(&(i, j), &coeff)| coeff * w1.powi(i as i32) * w2.powi(j as i32))
        .sum()
}

/// A transition-density approximation, precomputed at one spot point and
/// maturity so that grid evaluation over terminal points stays cheap.
///
/// The base kernel is the Gaussian matching the zeroth-order mean drift
/// and covariance; corrections apply the full operator (offsets included;
/// the offsets vanish at the spot point, while `∂y` monomials act on the
/// kernel through bivariate Hermite-type polynomials).
pub struct DensityExpansion {
    mean: (f64, f64),
    two_factor: bool,
    /// Covariance `(cxx, cxy, cyy)`; the latter two are zero one-factor.
    cov: (f64, f64, f64),
    /// Jacobian and scale of the per-model terminal coordinate map
    /// `ζ_internal = scale · ζ`; the evaluated density is multiplied by
    /// `scale^{dim}` so it stays a density in the caller's coordinates.
    y_scale: f64,
    /// `(r, s)` monomial coefficients summed over correction orders,
    /// paired with the matching derivative polynomial of the kernel.
    terms: Vec<(PolyXY, f64)>,
    norm: f64,
}

impl DensityExpansion {
    /// Builds the approximation for `model` between time `t` at state `z`
    /// and time `big_t`, to correction order `n_max`.
    ///
    /// # Errors
    ///
    /// [`LsvaError::InvalidInput`] unless `big_t > t`; model validation
    /// and operator errors propagate; a covariance that is not positive
    /// definite surfaces as [`LsvaError::Domain`].
    pub fn new(
        model: &ModelSpec,
        t: f64,
        z: (f64, f64),
        big_t: f64,
        n_max: u32,
    ) -> Result<Self> {
        if !(big_t > t) || !t.is_finite() || !big_t.is_finite() {
            return Err(LsvaError::invalid(format!(
                "density window needs t < T, got t={t}, T={big_t}"
            )));
        }
        let tau = big_t - t;
        let jet = build_jet(model, z.0, z.1, n_max.max(1))?;
        // The Heston jet lives on the drift-removed scaled variance; the
        // terminal variance maps onto it linearly, and the Jacobian of
        // that map keeps the result a density in the variance itself.
        let y_scale = match *model {
            ModelSpec::Heston { kappa, .. } => (kappa * tau).exp(),
            _ => 1.0,
        };
        Self::from_jet(&jet, tau, n_max, !model.is_local_vol(), y_scale)
    }

    /// Jet-level constructor behind [`DensityExpansion::new`].
    pub(crate) fn from_jet(
        jet: &CoefficientJet,
        tau: f64,
        n_max: u32,
        two_factor: bool,
        y_scale: f64,
    ) -> Result<Self> {
        let integral = |p: &ExpPoly| ep_integral(p, LowerBound::Numeric(0.0), tau).eval(0.0);
        let ia = integral(&jet.a(0, 0));
        let mean = (jet.x_center() - ia, jet.y_center() + integral(&jet.f(0, 0)));
        let cxx = 2.0 * ia;
        let (cov, precision, norm) = if two_factor {
            let cyy = 2.0 * integral(&jet.b(0, 0));
            let cxy = integral(&jet.c(0, 0));
            let det = cxx * cyy - cxy * cxy;
            if !(cxx > 0.0) || !(det > 0.0) {
                return Err(LsvaError::domain(format!(
                    "base covariance is not positive definite: cxx={cxx}, cyy={cyy}, cxy={cxy}"
                )));
            }
            let precision = (cyy / det, -cxy / det, cxx / det);
            let norm = 1.0 / (2.0 * std::f64::consts::PI * det.sqrt());
            ((cxx, cxy, cyy), precision, norm)
        } else {
            if !(cxx > 0.0) {
                return Err(LsvaError::domain(format!(
                    "base variance must be strictly positive, got {cxx}"
                )));
            }
            let norm = 1.0 / (2.0 * std::f64::consts::PI * cxx).sqrt();
            ((cxx, 0.0, 0.0), (1.0 / cxx, 0.0, 0.0), norm)
        };

        // Collect (r, s) coefficients of the correction operators; keys
        // with offsets vanish at the spot point and are skipped.
        let mut raw: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for n in 1..=n_max {
            let op = dyson_full(jet, n, tau, 0.0)?;
            for mono in op.monomials() {
                if mono.p == 0 && mono.q == 0 {
                    let value = mono.coeff.eval(0.0);
                    if value != 0.0 {
                        *raw.entry((mono.r, mono.s)).or_insert(0.0) += value;
                    }
                }
            }
        }
        // Derivative polynomials of the kernel, built by the backward
        // recurrence along each axis from the constant polynomial.
        let mut deriv: BTreeMap<(u32, u32), PolyXY> = BTreeMap::new();
        let mut unit = PolyXY::new();
        unit.insert((0, 0), 1.0);
        deriv.insert((0, 0), unit);
        let row_x = (precision.0, precision.1);
        let row_y = (precision.1, precision.2);
        let max_r = raw.keys().map(|k| k.0).max().unwrap_or(0);
        let max_s = raw.keys().map(|k| k.1).max().unwrap_or(0);
        for r in 1..=max_r {
            let prev = deriv[&(r - 1, 0)].clone();
            deriv.insert((r, 0), poly_backward_step(&prev, row_x, 0));
        }
        for r in 0..=max_r {
            for s in 1..=max_s {
                let prev = deriv[&(r, s - 1)].clone();
                deriv.insert((r, s), poly_backward_step(&prev, row_y, 1));
            }
        }
        let terms = raw
            .into_iter()
            .map(|((r, s), coeff)| (deriv[&(r, s)].clone(), coeff))
            .collect();
        Ok(DensityExpansion { mean, two_factor, cov, y_scale, terms, norm })
    }

    /// Evaluates the approximate density at a terminal point. For
    /// one-factor models the second coordinate is ignored.
    pub fn evaluate(&self, zeta: (f64, f64)) -> f64 {
        let w1 = zeta.0 - self.mean.0;
        let (base, w2, jacobian) = if self.two_factor {
            let w2 = self.y_scale * zeta.1 - self.mean.1;
            let (cxx, cxy, cyy) = self.cov;
            let det = cxx * cyy - cxy * cxy;
            let quad =
                (cyy * w1 * w1 - 2.0 * cxy * w1 * w2 + cxx * w2 * w2) / det;
            ((-0.5 * quad).exp() * self.norm, w2, self.y_scale)
        } else {
            let quad = w1 * w1 / self.cov.0;
            ((-0.5 * quad).exp() * self.norm, 0.0, 1.0)
        };
        let correction: f64 =
            self.terms.iter().map(|(poly, coeff)| coeff * poly_eval(poly, w1, w2)).sum();
        jacobian * base * (1.0 + correction)
    }
}

/// Order-`N` transition-density approximation between `(t, z)` and
/// `(big_t, zeta)`. `N = 0` gives the base Gaussian kernel itself.
///
/// One-shot convenience over [`DensityExpansion`]; build that directly
/// when evaluating over a grid of terminal points.
///
/// # Errors
///
/// As for [`DensityExpansion::new`].
pub fn density_approx(
    model: &ModelSpec,
    t: f64,
    z: (f64, f64),
    big_t: f64,
    zeta: (f64, f64),
    n_max: u32,
) -> Result<f64> {
    Ok(DensityExpansion::new(model, t, z, big_t, n_max)?.evaluate(zeta))
}
