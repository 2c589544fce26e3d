//! Operator algebra for the iterated-integral price expansion.
//!
//! The expansion rewrites the pricing generator as a base part plus Taylor
//! corrections in the state offsets, and expresses the n-th order term as a
//! sum of time-ordered iterated integrals of correction operators. Each
//! correction operator is built from commuting first-order transport
//! operators (one per coordinate) composed with the second-order derivative
//! blocks of the generator. Everything here lives on a four-index monomial
//! basis
//!
//! ```text
//! ξ^p υ^q ∂x^r ∂y^s,   ξ = x − x̄,   υ = y − ȳ,
//! ```
//!
//! normal-ordered so offsets stand left of derivatives, with coefficients
//! that are exponential polynomials in the pending integration variable.
//! The only nontrivial commutators are `[∂x, ξ] = 1` and `[∂y, υ] = 1`;
//! products are reduced with the standard reordering identity
//! `∂^r ξ^p = Σ_j C(r,j)(p)_j ξ^{p−j} ∂^{r−j}`.
//!
//! [`dyson_ltilde`] carries out the nested integrals innermost-first and
//! reduces the result to scalar weights on powers of `∂x` acting on the
//! payoff-propagating factor, which is all the smile pipeline needs. The
//! full two-dimensional operator is kept internally for density
//! approximations and residual checks.

use std::collections::BTreeMap;

use crate::error::{LsvaError, Result};
use crate::models::CoefficientJet;
use crate::timefunc::{ep_add, ep_integral, ep_integral_from, ep_mul, ExpPoly, LowerBound};
use crate::util::{binomial, factorial, falling_factorial};

/// Default ceiling on the expansion order. Operator size grows faster than
/// `n!`, and orders past four have not shown further practical accuracy
/// gains, so anything above the cap is rejected unless raised explicitly.
pub const DEFAULT_ORDER_CAP: u32 = 4;

/// Hard ceiling on the monomial count of any intermediate operator, a
/// guard rail against runaway growth when the cap is raised.
const MONOMIAL_GUARD: usize = 50_000;

/// One normal-ordered term `coeff · ξ^p υ^q ∂x^r ∂y^s`.
///
/// The coefficient is an [`ExpPoly`] in the pending time variable; after
/// the outermost integration it is a constant.
#[derive(Clone, Debug)]
pub struct OpMonomial {
    pub coeff: ExpPoly,
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub s: u32,
}

/// A finite sum of [`OpMonomial`]s, canonicalized by merging equal
/// `(p, q, r, s)` keys in lexicographic order.
#[derive(Clone, Debug, Default)]
pub struct DiffOp {
    terms: BTreeMap<(u32, u32, u32, u32), ExpPoly>,
}

impl DiffOp {
    /// The zero operator.
    pub fn zero() -> Self {
        DiffOp::default()
    }

    /// Adds `coeff · ξ^p υ^q ∂x^r ∂y^s`, merging with any existing term on
    /// the same key and dropping the key if the merged coefficient
    /// vanishes.
    pub fn insert(&mut self, p: u32, q: u32, r: u32, s: u32, coeff: ExpPoly) {
        if coeff.is_zero() {
            return;
        }
        let key = (p, q, r, s);
        let merged = match self.terms.get(&key) {
            Some(existing) => ep_add(existing, &coeff),
            None => coeff,
        };
        if merged.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, merged);
        }
    }

    /// Coefficient on `ξ^p υ^q ∂x^r ∂y^s`, zero if absent.
    pub fn coefficient(&self, p: u32, q: u32, r: u32, s: u32) -> ExpPoly {
        self.terms.get(&(p, q, r, s)).cloned().unwrap_or_else(ExpPoly::zero)
    }

    /// All terms in key order.
    pub fn monomials(&self) -> Vec<OpMonomial> {
        self.terms
            .iter()
            .map(|(&(p, q, r, s), coeff)| OpMonomial { coeff: coeff.clone(), p, q, r, s })
            .collect()
    }

    /// Number of distinct monomial keys.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True when no monomials are present.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Left-multiplies every coefficient by a scalar time function.
    pub fn scale_poly(&self, factor: &ExpPoly) -> DiffOp {
        let mut out = DiffOp::zero();
        for (&(p, q, r, s), coeff) in &self.terms {
            out.insert(p, q, r, s, ep_mul(factor, coeff));
        }
        out
    }

    /// Adds another operator term by term.
    pub fn accumulate(&mut self, other: &DiffOp) {
        for (&(p, q, r, s), coeff) in &other.terms {
            self.insert(p, q, r, s, coeff.clone());
        }
    }

    /// Integrates every coefficient over the pending variable.
    fn integrate(&self, lower: LowerBound, upper: f64) -> DiffOp {
        let mut out = DiffOp::zero();
        for (&(p, q, r, s), coeff) in &self.terms {
            out.insert(p, q, r, s, ep_integral(coeff, lower, upper));
        }
        out
    }

    /// Largest total derivative order `r + s` over all terms.
    fn max_derivative_order(&self) -> u32 {
        self.terms.keys().map(|&(_, _, r, s)| r + s).max().unwrap_or(0)
    }
}

/// Normal-ordered composition `left ∘ right`.
///
/// Acting on any smooth test function, the result equals `left(right(φ))`.
/// Derivatives of the left factor are commuted through offsets of the
/// right factor with
///
/// ```text
/// ∂x^r ξ^p = Σ_{j ≤ min(r,p)} C(r,j)(p)_j ξ^{p−j} ∂x^{r−j}
/// ```
///
/// and the same identity in `(∂y, υ)`; all other generator pairs commute.
pub fn normal_order_product(left: &DiffOp, right: &DiffOp) -> DiffOp {
    let mut out = DiffOp::zero();
    for (&(p1, q1, r1, s1), c1) in &left.terms {
        for (&(p2, q2, r2, s2), c2) in &right.terms {
            let base = ep_mul(c1, c2);
            for j in 0..=r1.min(p2) {
                let wx = binomial(r1, j) * falling_factorial(p2, j);
                for l in 0..=s1.min(q2) {
                    let w = wx * binomial(s1, l) * falling_factorial(q2, l);
                    out.insert(
                        p1 + p2 - j,
                        q1 + q2 - l,
                        r1 - j + r2,
                        s1 - l + s2,
                        base.scale(w),
                    );
                }
            }
        }
    }
    out
}

/// All compositions of `n` into ordered positive parts, grouped by length:
/// entry `k−1` of the result lists the length-`k` tuples.
///
/// # Errors
///
/// [`LsvaError::InvalidInput`] for `n = 0`.
pub fn enumerate_compositions(n: u32) -> Result<Vec<Vec<Vec<u32>>>> {
    if n == 0 {
        return Err(LsvaError::invalid("compositions are defined for n >= 1"));
    }
    let mut by_length: Vec<Vec<Vec<u32>>> = vec![Vec::new(); n as usize];
    let mut current = Vec::new();
    fn descend(remaining: u32, current: &mut Vec<u32>, by_length: &mut [Vec<Vec<u32>>]) {
        if remaining == 0 {
            by_length[current.len() - 1].push(current.clone());
            return;
        }
        for part in 1..=remaining {
            current.push(part);
            descend(remaining - part, current, by_length);
            current.pop();
        }
    }
    descend(n, &mut current, &mut by_length);
    Ok(by_length)
}

/// The commuting transport operators associated with a jet, as functions
/// of the pending time `s` (their scalar parts are exponential polynomials
/// in `s`; integrals start at `t0`):
///
/// ```text
/// Mx(s) = ξ + x̄ − ∫a₀ + 2(∫a₀)∂x + (∫c₀)∂y
/// My(s) = υ + ȳ + ∫f₀ + 2(∫b₀)∂y + (∫c₀)∂x
/// ```
///
/// Conjugating a coordinate by the base propagator yields exactly these
/// first-order operators, which is what makes the correction operators
/// below integrable in closed form.
pub fn build_m_operators(jet: &CoefficientJet, t0: f64) -> (DiffOp, DiffOp) {
    let int_a = ep_integral_from(&jet.a(0, 0), t0);
    let int_b = ep_integral_from(&jet.b(0, 0), t0);
    let int_c = ep_integral_from(&jet.c(0, 0), t0);
    let int_f = ep_integral_from(&jet.f(0, 0), t0);

    let mut mx = DiffOp::zero();
    mx.insert(1, 0, 0, 0, ExpPoly::constant(1.0));
    mx.insert(0, 0, 0, 0, ep_add(&ExpPoly::constant(jet.x_center()), &int_a.scale(-1.0)));
    mx.insert(0, 0, 1, 0, int_a.scale(2.0));
    mx.insert(0, 0, 0, 1, int_c.clone());

    let mut my = DiffOp::zero();
    my.insert(0, 1, 0, 0, ExpPoly::constant(1.0));
    my.insert(0, 0, 0, 0, ep_add(&ExpPoly::constant(jet.y_center()), &int_f));
    my.insert(0, 0, 0, 1, int_b.scale(2.0));
    my.insert(0, 0, 1, 0, int_c);

    (mx, my)
}

/// Transport operators recentered on the (possibly moving) expansion
/// point: `Mx − x̄` and `My − ȳ − Δ(s)` with `Δ` the center displacement
/// accumulated since `t0`. For a drifting center the scalar drift `∫f₀`
/// and the center displacement cancel to the extent the center tracks the
/// drift; both are kept so either convention is handled.
fn recentered_m_operators(jet: &CoefficientJet, t0: f64) -> (DiffOp, DiffOp) {
    let (mut mx, mut my) = build_m_operators(jet, t0);
    mx.insert(0, 0, 0, 0, ExpPoly::constant(-jet.x_center()));
    let drift = jet.center_drift();
    let recenter = ep_add(
        &ExpPoly::constant(-jet.y_center() + drift.eval(t0)),
        &drift.scale(-1.0),
    );
    my.insert(0, 0, 0, 0, recenter);
    (mx, my)
}

/// Pure-derivative blocks of the generator, in the order `(a, b, c, f)`:
/// `∂x² − ∂x`, `∂y²`, `∂x∂y`, `∂y`. The first pairs the x-diffusion with
/// its martingale drift so the forward is preserved structurally.
fn derivative_blocks() -> [DiffOp; 4] {
    let mut d_a = DiffOp::zero();
    d_a.insert(0, 0, 2, 0, ExpPoly::constant(1.0));
    d_a.insert(0, 0, 1, 0, ExpPoly::constant(-1.0));
    let mut d_b = DiffOp::zero();
    d_b.insert(0, 0, 0, 2, ExpPoly::constant(1.0));
    let mut d_c = DiffOp::zero();
    d_c.insert(0, 0, 1, 1, ExpPoly::constant(1.0));
    let mut d_f = DiffOp::zero();
    d_f.insert(0, 0, 0, 1, ExpPoly::constant(1.0));
    [d_a, d_b, d_c, d_f]
}

/// Shared scaffolding for building correction operators: recentered
/// transport operators and their normal-ordered powers `M̂x^p ∘ M̂y^q`.
struct CorrectionBuilder<'a> {
    jet: &'a CoefficientJet,
    powers: Vec<Vec<DiffOp>>,
}

impl<'a> CorrectionBuilder<'a> {
    fn new(jet: &'a CoefficientJet, t0: f64, max_order: u32) -> Self {
        let (mhx, mhy) = recentered_m_operators(jet, t0);
        let n = max_order as usize;
        let mut x_pow = Vec::with_capacity(n + 1);
        let mut y_pow = Vec::with_capacity(n + 1);
        let mut identity = DiffOp::zero();
        identity.insert(0, 0, 0, 0, ExpPoly::constant(1.0));
        x_pow.push(identity.clone());
        y_pow.push(identity);
        for i in 1..=n {
            x_pow.push(normal_order_product(&x_pow[i - 1], &mhx));
            y_pow.push(normal_order_product(&y_pow[i - 1], &mhy));
        }
        let powers = (0..=n)
            .map(|p| {
                (0..=n - p)
                    .map(|q| normal_order_product(&x_pow[p], &y_pow[q]))
                    .collect()
            })
            .collect();
        CorrectionBuilder { jet, powers }
    }

    /// The order-`i` Taylor shell of one coefficient table with the
    /// transport operators substituted for the offsets:
    /// `Σ_{p+q=i} (table(p,q)/p!q!) · M̂x^p ∘ M̂y^q`.
    fn taylor_shell(&self, table: &dyn Fn(u32, u32) -> ExpPoly, i: u32) -> DiffOp {
        let mut out = DiffOp::zero();
        for p in 0..=i {
            let q = i - p;
            let coeff = table(p, q);
            if coeff.is_zero() {
                continue;
            }
            let weight = 1.0 / (factorial(p) * factorial(q));
            out.accumulate(
                &self.powers[p as usize][q as usize].scale_poly(&coeff.scale(weight)),
            );
        }
        out
    }

    /// Full order-`i` correction operator: each coefficient's Taylor shell
    /// composed with its derivative block.
    fn correction(&self, i: u32) -> DiffOp {
        let [d_a, d_b, d_c, d_f] = derivative_blocks();
        let jet = self.jet;
        let mut out = DiffOp::zero();
        for (table, block) in [
            (&(|p, q| jet.a(p, q)) as &dyn Fn(u32, u32) -> ExpPoly, &d_a),
            (&|p, q| jet.b(p, q), &d_b),
            (&|p, q| jet.c(p, q), &d_c),
            (&|p, q| jet.f(p, q), &d_f),
        ] {
            let shell = self.taylor_shell(table, i);
            if !shell.is_empty() {
                out.accumulate(&normal_order_product(&shell, block));
            }
        }
        out
    }

    /// The a-coefficient shell alone, used as the rightmost factor when
    /// the trailing derivative block is factored out of the whole sum.
    fn correction_stripped(&self, i: u32) -> DiffOp {
        self.taylor_shell(&|p, q| self.jet.a(p, q), i)
    }
}

/// Order-`i` correction operator `G_i` as a function of the pending time,
/// with integrals anchored at `t0`:
///
/// ```text
/// G_i = a_i(M)(∂x²−∂x) + b_i(M)∂y² + c_i(M)∂x∂y + f_i(M)∂y
/// ```
///
/// where `g_i(M)` substitutes the recentered transport operators into the
/// order-`i` Taylor term of coefficient `g`. The result is normal-ordered.
///
/// # Errors
///
/// [`LsvaError::InvalidInput`] if `i = 0` or the jet was not built deep
/// enough.
pub fn build_g_operator(jet: &CoefficientJet, i: u32, t0: f64) -> Result<DiffOp> {
    if i == 0 {
        return Err(LsvaError::invalid(
            "correction operators start at order 1; order 0 is the base generator",
        ));
    }
    jet.require_order(i)?;
    Ok(CorrectionBuilder::new(jet, t0, i).correction(i))
}

/// Core of the iterated-integral assembly shared by the reduced and full
/// drivers. For every composition `(i_1, …, i_k)` of `n` the time-ordered
/// product `G_{i_1}(t_1) ⋯ G_{i_k}(t_k)` is integrated over
/// `t0 < t_1 < … < t_k < T` innermost-first: the rightmost factor is
/// integrated from the pending variable up to `T`, composed with the next
/// factor to its left, and so on; the outermost integral runs from `t0`
/// and leaves constant coefficients. With `strip_last`, the rightmost
/// factor of every composition is replaced by its bare a-shell (no
/// trailing derivative block), which is valid when the target of the
/// operator is independent of `y`.
fn dyson_operator(
    jet: &CoefficientJet,
    n: u32,
    big_t: f64,
    t0: f64,
    strip_last: bool,
) -> Result<DiffOp> {
    if n == 0 {
        return Err(LsvaError::invalid("expansion corrections start at order 1"));
    }
    jet.require_order(n)?;
    if !big_t.is_finite() || !(big_t > t0) {
        return Err(LsvaError::invalid(format!(
            "integration interval must satisfy t0 < T, got t0 = {t0}, T = {big_t}"
        )));
    }
    let builder = CorrectionBuilder::new(jet, t0, n);
    let full: Vec<DiffOp> = (1..=n).map(|i| builder.correction(i)).collect();
    let stripped: Vec<DiffOp> = (1..=n).map(|i| builder.correction_stripped(i)).collect();

    let mut total = DiffOp::zero();
    for group in enumerate_compositions(n)? {
        for composition in group {
            let k = composition.len();
            let last = composition[k - 1] as usize - 1;
            let mut op = if strip_last { stripped[last].clone() } else { full[last].clone() };
            for j in (1..=k).rev() {
                if j < k {
                    op = normal_order_product(&full[composition[j - 1] as usize - 1], &op);
                    if op.len() > MONOMIAL_GUARD {
                        return Err(LsvaError::invalid(format!(
                            "operator at order {n} exceeded the {MONOMIAL_GUARD}-term guard"
                        )));
                    }
                }
                let lower = if j == 1 { LowerBound::Numeric(t0) } else { LowerBound::Variable };
                op = op.integrate(lower, big_t);
            }
            // Each factor adds at most its own order plus the two
            // derivatives of its block; stripping drops one block.
            let bound = n + 2 * k as u32 - if strip_last { 2 } else { 0 };
            assert!(
                op.max_derivative_order() <= bound,
                "degree bookkeeping violated: order {} exceeds bound {bound} for {composition:?}",
                op.max_derivative_order()
            );
            total.accumulate(&op);
        }
    }
    Ok(total)
}

/// Reduced n-th order expansion operator as scalar weights, under the
/// default order cap.
///
/// See [`dyson_ltilde_with_cap`] for the contract.
pub fn dyson_ltilde(jet: &CoefficientJet, n: u32, big_t: f64, t0: f64) -> Result<Vec<(u32, f64)>> {
    dyson_ltilde_with_cap(jet, n, big_t, t0, DEFAULT_ORDER_CAP)
}

/// Reduced n-th order expansion operator as scalar weights `(m, w_m)`
/// such that the n-th price correction is `Σ_m w_m ∂x^m (∂x²−∂x) u₀`
/// applied to the base price `u₀` at the expansion point.
///
/// The reduction drops monomials with offset powers (evaluation happens at
/// the expansion point where `ξ = υ = 0`) and with `∂y` factors (the base
/// price does not depend on `y`); factoring the trailing `∂x²−∂x` out of
/// the surviving part is exact because the discarded blocks always retain
/// a `∂y`.
///
/// # Errors
///
/// [`LsvaError::InvalidInput`] for `n = 0`, `n` above `cap`, a jet that is
/// too shallow, a degenerate interval, or an intermediate operator
/// exceeding the term guard.
pub fn dyson_ltilde_with_cap(
    jet: &CoefficientJet,
    n: u32,
    big_t: f64,
    t0: f64,
    cap: u32,
) -> Result<Vec<(u32, f64)>> {
    if n > cap {
        return Err(LsvaError::invalid(format!(
            "expansion order {n} exceeds the configured cap {cap}"
        )));
    }
    let reduced = dyson_operator(jet, n, big_t, t0, true)?;
    let mut weights = Vec::new();
    for (&(p, q, r, s), coeff) in &reduced.terms {
        if p > 0 || q > 0 || s > 0 {
            continue;
        }
        let w = coeff.eval(0.0);
        if w != 0.0 {
            weights.push((r, w));
        }
    }
    Ok(weights)
}

/// Full n-th order expansion operator on the two-dimensional monomial
/// basis, with constant coefficients. Keeps every offset and `∂y` term,
/// for density approximation and for residual checks of the expansion
/// hierarchy.
pub(crate) fn dyson_full(jet: &CoefficientJet, n: u32, big_t: f64, t0: f64) -> Result<DiffOp> {
    dyson_operator(jet, n, big_t, t0, false)
}
