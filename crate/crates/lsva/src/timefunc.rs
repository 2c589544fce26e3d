//! Exact arithmetic and integration in the ring of exponential polynomials.
//!
//! An [`ExpPoly`] is a finite sum of terms `c · t^m · e^{γt}` with real
//! coefficient `c`, nonnegative integer power `m`, and real rate `γ`. This
//! class is closed under addition, multiplication, and integration with one
//! numeric bound, which is exactly what the nested time integrals of the
//! operator expansion require: every iterated integral of model coefficients
//! stays inside the ring and is computed in closed form, with no quadrature
//! error.
//!
//! Time-homogeneous models contribute constant terms only; the transformed
//! Heston coefficients contribute `e^{±κt}` factors. Piecewise or general
//! bounded time dependence is out of scope.

use std::fmt;

/// Defensive absolute tolerance used when merging terms whose rates differ
/// by floating-point noise. Rates are built from sums of a handful of model
/// rate constants, so genuinely distinct rates are never this close.
pub const RATE_MERGE_TOL: f64 = 1e-14;

/// One term `coeff · t^power · e^{rate·t}` of an exponential polynomial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpTerm {
    /// Multiplicative coefficient `c`.
    pub coeff: f64,
    /// Power `m ≥ 0` of the time variable.
    pub power: u32,
    /// Exponential rate `γ`.
    pub rate: f64,
}

/// An exponential polynomial `Σ c · t^m · e^{γt}` in canonical form:
/// terms sorted by `(power, rate)`, no two terms sharing a `(power, rate)`
/// key, zero coefficients removed.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpPoly {
    terms: Vec<EpTerm>,
}

/// Lower bound of [`ep_integral`]: either a number or the symbol of the
/// next-outer integration variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LowerBound {
    /// A numeric lower limit.
    Numeric(f64),
    /// The symbolic lower limit; the integral becomes an [`ExpPoly`] in it.
    Variable,
}

impl ExpPoly {
    /// Builds an exponential polynomial from raw terms and normalizes it.
    pub fn new(terms: Vec<EpTerm>) -> Self {
        let mut p = ExpPoly { terms };
        p.normalize();
        p
    }

    /// The zero element (empty term list).
    pub fn zero() -> Self {
        ExpPoly { terms: Vec::new() }
    }

    /// The constant function `c`.
    pub fn constant(c: f64) -> Self {
        ExpPoly::new(vec![EpTerm { coeff: c, power: 0, rate: 0.0 }])
    }

    /// The single term `coeff · t^power · e^{rate·t}`.
    pub fn term(coeff: f64, power: u32, rate: f64) -> Self {
        ExpPoly::new(vec![EpTerm { coeff, power, rate }])
    }

    /// Read-only view of the canonical term list.
    pub fn terms(&self) -> &[EpTerm] {
        &self.terms
    }

    /// True if this is the zero function.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// If the function is a constant (a single `t^0 e^{0t}` term or zero),
    /// returns its value.
    pub fn constant_value(&self) -> Option<f64> {
        match self.terms.as_slice() {
            [] => Some(0.0),
            [t] if t.power == 0 && t.rate == 0.0 => Some(t.coeff),
            _ => None,
        }
    }

    /// Evaluates `Σ c · t^m · e^{γt}` at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| term.coeff * t.powi(term.power as i32) * (term.rate * t).exp())
            .sum()
    }

    /// Returns `scale · self`.
    pub fn scale(&self, scale: f64) -> Self {
        ExpPoly::new(
            self.terms
                .iter()
                .map(|t| EpTerm { coeff: scale * t.coeff, ..*t })
                .collect(),
        )
    }

    /// Sorts by `(power, rate)`, merges terms whose keys coincide (rates
    /// compared with [`RATE_MERGE_TOL`]), and drops zero coefficients.
    /// Idempotent: normalizing a canonical polynomial leaves it unchanged.
    fn normalize(&mut self) {
        self.terms.sort_by(|a, b| {
            a.power
                .cmp(&b.power)
                .then(a.rate.partial_cmp(&b.rate).expect("rates are finite"))
        });
        let mut merged: Vec<EpTerm> = Vec::with_capacity(self.terms.len());
        for term in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last)
                    if last.power == term.power
                        && (last.rate - term.rate).abs() <= RATE_MERGE_TOL =>
                {
                    last.coeff += term.coeff;
                }
                _ => merged.push(term),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        self.terms = merged;
    }

    /// Antiderivative `F` with `F' = self`, as an exponential polynomial in
    /// the same variable (integration constant zero).
    ///
    /// For `γ ≠ 0`: `∫ t^m e^{γt} dt = e^{γt} Σ_{j=0}^{m} (−1)^j
    /// m!/(m−j)! · t^{m−j} / γ^{j+1}`; for `γ = 0` the polynomial rule.
    fn antiderivative(&self) -> ExpPoly {
        let mut out = Vec::new();
        for term in &self.terms {
            if term.rate == 0.0 {
                out.push(EpTerm {
                    coeff: term.coeff / f64::from(term.power + 1),
                    power: term.power + 1,
                    rate: 0.0,
                });
            } else {
                let mut falling = 1.0; // m·(m−1)···(m−j+1)
                let mut rate_pow = term.rate;
                let mut sign = 1.0;
                for j in 0..=term.power {
                    out.push(EpTerm {
                        coeff: sign * term.coeff * falling / rate_pow,
                        power: term.power - j,
                        rate: term.rate,
                    });
                    falling *= f64::from(term.power - j);
                    rate_pow *= term.rate;
                    sign = -sign;
                }
            }
        }
        ExpPoly::new(out)
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", t.coeff)?;
            if t.power > 0 {
                write!(f, "*t^{}", t.power)?;
            }
            if t.rate != 0.0 {
                write!(f, "*exp({}*t)", t.rate)?;
            }
        }
        Ok(())
    }
}

/// Pointwise sum of two exponential polynomials.
pub fn ep_add(p: &ExpPoly, q: &ExpPoly) -> ExpPoly {
    let mut terms = Vec::with_capacity(p.terms.len() + q.terms.len());
    terms.extend_from_slice(&p.terms);
    terms.extend_from_slice(&q.terms);
    ExpPoly::new(terms)
}

/// Pointwise product of two exponential polynomials: powers add, rates add.
pub fn ep_mul(p: &ExpPoly, q: &ExpPoly) -> ExpPoly {
    let mut terms = Vec::with_capacity(p.terms.len() * q.terms.len());
    for a in &p.terms {
        for b in &q.terms {
            terms.push(EpTerm {
                coeff: a.coeff * b.coeff,
                power: a.power + b.power,
                rate: a.rate + b.rate,
            });
        }
    }
    ExpPoly::new(terms)
}

/// Definite integral `∫_lower^upper p(t) dt` with a numeric upper limit.
///
/// With a numeric lower limit the result is a constant polynomial. With
/// [`LowerBound::Variable`] the result is `F(upper) − F(s)` as an
/// exponential polynomial in the symbolic lower limit `s`, which is exactly
/// the shape needed when peeling nested integrals innermost-first.
pub fn ep_integral(p: &ExpPoly, lower: LowerBound, upper: f64) -> ExpPoly {
    let f = p.antiderivative();
    let at_upper = f.eval(upper);
    match lower {
        LowerBound::Numeric(a) => ExpPoly::constant(at_upper - f.eval(a)),
        LowerBound::Variable => ep_add(&ExpPoly::constant(at_upper), &f.scale(-1.0)),
    }
}

/// Running integral `∫_lower^s p(t) dt` as an exponential polynomial in the
/// upper variable `s` (numeric lower limit). This is the primitive needed by
/// the first-order characteristic operators, whose scalar parts are
/// integrals of the order-zero model coefficients up to a symbolic time.
pub fn ep_integral_from(p: &ExpPoly, lower: f64) -> ExpPoly {
    // ∫_a^s p = F(s) − F(a).
    let f = p.antiderivative();
    ep_add(&f, &ExpPoly::constant(-f.eval(lower)))
}
