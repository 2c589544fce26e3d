//! Small shared numeric helpers.

/// Binomial coefficient `C(n, k)` as a float, by the multiplicative rule.
pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut out = 1.0;
    for i in 0..k {
        out = out * f64::from(n - i) / f64::from(i + 1);
    }
    out
}

/// Falling factorial `n · (n−1) ··· (n−k+1)`.
pub(crate) fn falling_factorial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).map(|i| f64::from(n - i)).product()
}

/// `n!` as a float.
pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}
