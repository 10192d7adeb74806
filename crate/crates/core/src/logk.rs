//! Arithmetic on values stored as base-k logarithms.
//!
//! Weight masses such as `k^{p j}` overflow `f64` long before the level
//! horizons used by the experiments, so masses, norms and constants are kept
//! as `log_k(value)`. Zero is `-inf`.

/// Log-domain representation of zero.
pub const LOG_ZERO: f64 = f64::NEG_INFINITY;

/// `log_k(k^a + k^b)`.
pub fn add(k: u32, a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == LOG_ZERO {
        return hi;
    }
    let ln_k = (k as f64).ln();
    hi + ((lo - hi) * ln_k).exp().ln_1p() / ln_k
}

/// `log_k(sum_i k^{x_i})`, stable for any mixture of magnitudes.
pub fn sum<I: IntoIterator<Item = f64>>(k: u32, terms: I) -> f64 {
    let terms: Vec<f64> = terms.into_iter().collect();
    let hi = terms.iter().cloned().fold(LOG_ZERO, f64::max);
    if hi == LOG_ZERO || hi.is_infinite() {
        return hi;
    }
    let ln_k = (k as f64).ln();
    let s: f64 = terms.iter().map(|&t| ((t - hi) * ln_k).exp()).sum();
    hi + s.ln() / ln_k
}

/// `log_k(k^a - k^b)` for `a >= b`; `-inf` when they coincide.
pub fn sub(k: u32, a: f64, b: f64) -> f64 {
    if b == LOG_ZERO {
        return a;
    }
    if b >= a {
        return LOG_ZERO;
    }
    let ln_k = (k as f64).ln();
    a + (-((b - a) * ln_k).exp()).ln_1p() / ln_k
}

pub fn from_linear(k: u32, x: f64) -> f64 {
    if x <= 0.0 {
        LOG_ZERO
    } else {
        x.ln() / (k as f64).ln()
    }
}

pub fn to_linear(k: u32, x: f64) -> f64 {
    (k as f64).powf(x)
}

/// Relative difference `|k^a - k^b| / k^b` without leaving the log domain
/// more than necessary.
pub fn relative_change(k: u32, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if b == LOG_ZERO {
        return f64::INFINITY;
    }
    ((a - b) * (k as f64).ln()).exp_m1().abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_matches_linear() {
        let v = add(2, 3.0, 2.0);
        assert!((to_linear(2, v) - 12.0).abs() < 1e-12);
        assert_eq!(add(3, 1.5, LOG_ZERO), 1.5);
    }

    #[test]
    fn sum_of_huge_terms() {
        let v = sum(2, [2000.0, 2000.0]);
        assert!((v - 2001.0).abs() < 1e-12);
        assert_eq!(sum(2, []), LOG_ZERO);
    }

    #[test]
    fn sub_and_relative_change() {
        assert!((to_linear(2, sub(2, 3.0, 1.0)) - 6.0).abs() < 1e-12);
        assert_eq!(sub(2, 1.0, 1.0), LOG_ZERO);
        assert!((relative_change(2, from_linear(2, 101.0), from_linear(2, 100.0)) - 0.01).abs() < 1e-12);
    }
}
