//! Scalar abstraction shared by the floating and exact evaluators.
//!
//! Every operator that works on level functions or sparse functions is
//! written once against [`Scalar`]. Instantiated with `f64` it is the fast
//! path; instantiated with [`BigRational`] it is the exact oracle used by the
//! equivalence tests.

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Rational64};
use num_traits::{FromPrimitive, Num, ToPrimitive, Zero};

pub trait Scalar: Clone + Debug + PartialOrd + Num + FromPrimitive + Send + Sync {
    /// Exact image of a vertex count (may saturate to infinity for floats).
    fn from_count(n: &BigUint) -> Self;

    /// `k^e`, or `None` if the value has no representation in `Self`.
    fn k_pow(k: u32, e: Rational64) -> Option<Self>;

    /// `self^e` for `self >= 0`, or `None` if not representable.
    fn pow_ratio(&self, e: Rational64) -> Option<Self>;

    fn as_f64(&self) -> f64;

    /// Whether arithmetic in this type is exact.
    const EXACT: bool;

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

fn ratio_to_f64(e: Rational64) -> f64 {
    *e.numer() as f64 / *e.denom() as f64
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_count(n: &BigUint) -> Self {
                n.to_f64().map(|v| v as $t).unwrap_or(<$t>::INFINITY)
            }

            fn k_pow(k: u32, e: Rational64) -> Option<Self> {
                let base = k as $t;
                if e.is_integer() {
                    if let Ok(n) = i32::try_from(*e.numer()) {
                        return Some(base.powi(n));
                    }
                }
                Some(base.powf(ratio_to_f64(e) as $t))
            }

            fn pow_ratio(&self, e: Rational64) -> Option<Self> {
                if e.is_integer() {
                    if let Ok(n) = i32::try_from(*e.numer()) {
                        return Some(self.powi(n));
                    }
                }
                Some(self.powf(ratio_to_f64(e) as $t))
            }

            fn as_f64(&self) -> f64 {
                *self as f64
            }
        }
    };
}

impl_float_scalar!(f64);
impl_float_scalar!(f32);

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_count(n: &BigUint) -> Self {
        BigRational::from_integer(BigInt::from(n.clone()))
    }

    fn k_pow(k: u32, e: Rational64) -> Option<Self> {
        if !e.is_integer() {
            return None;
        }
        let n = i32::try_from(*e.numer()).ok()?;
        let base = BigRational::from_integer(BigInt::from(k));
        Some(num_traits::pow::Pow::pow(&base, n))
    }

    fn pow_ratio(&self, e: Rational64) -> Option<Self> {
        if !e.is_integer() {
            return None;
        }
        let n = i32::try_from(*e.numer()).ok()?;
        if n < 0 && self.is_zero() {
            return None;
        }
        Some(num_traits::pow::Pow::pow(self, n))
    }

    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Convenience: `1 / k^n` in any scalar type.
pub fn k_inv_pow<S: Scalar>(k: u32, n: usize) -> S {
    // integer exponents are representable in every Scalar
    S::k_pow(k, Rational64::from_integer(-(n as i64))).unwrap_or_else(S::zero)
}

pub(crate) fn small<S: Scalar>(n: u64) -> S {
    S::from_u64(n).unwrap_or_else(|| {
        let mut acc = S::zero();
        for _ in 0..n {
            acc = acc + S::one();
        }
        acc
    })
}

#[allow(dead_code)]
pub(crate) fn is_one<S: Scalar>(x: &S) -> bool {
    *x == S::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_powers_of_k() {
        let v = BigRational::k_pow(3, Rational64::from_integer(-2)).unwrap();
        assert_eq!(v, BigRational::new(BigInt::from(1), BigInt::from(9)));
        assert!(BigRational::k_pow(2, Rational64::new(1, 2)).is_none());
        assert_eq!(f64::k_pow(2, Rational64::from_integer(10)).unwrap(), 1024.0);
        assert!((f64::k_pow(4, Rational64::new(1, 2)).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn counts_saturate_for_floats() {
        let huge = BigUint::from(2u32).pow(2000);
        assert!(f64::from_count(&huge).is_infinite());
        assert_eq!(BigRational::from_count(&BigUint::from(12u32)).as_f64(), 12.0);
    }
}
