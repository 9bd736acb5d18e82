//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! The control laws and geometry are written once against [`Scalar`] and run
//! on `f32`, `f64` or exact [`BigRational`] values. Exact arithmetic is what
//! the theorem checks use at rational step lengths.

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Number type the synthesis functions and geometry are generic over.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive {
    /// Exact conversion of a non-negative integer (binomial weights, step counts).
    fn from_biguint(n: &BigUint) -> Self;

    /// Slack allowed on the upper edge of the falling-factorial bracket used
    /// to pick the isochronous index. Four ulps of `x` for floats, zero for
    /// exact types.
    fn bracket_slack(x: &Self) -> Self;

    fn from_count(n: u128) -> Self {
        Self::from_biguint(&BigUint::from(n))
    }

    fn from_index(n: usize) -> Self {
        Self::from_count(n as u128)
    }
}

macro_rules! impl_float_scalar {
    ($f:ty) => {
        impl Scalar for $f {
            fn from_biguint(n: &BigUint) -> Self {
                n.to_f64().map_or(<$f>::INFINITY, |v| v as $f)
            }

            fn bracket_slack(x: &Self) -> Self {
                x.abs() * 4.0 * <$f>::EPSILON
            }

            fn from_count(n: u128) -> Self {
                n as $f
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Scalar for BigRational {
    fn from_biguint(n: &BigUint) -> Self {
        BigRational::from_integer(BigInt::from(n.clone()))
    }

    fn bracket_slack(_x: &Self) -> Self {
        num_traits::Zero::zero()
    }
}

/// `base^exp` by repeated multiplication, so small powers of the step length
/// are bit-reproducible across platforms.
pub fn pow<T: Scalar>(base: &T, exp: usize) -> T {
    let mut acc = T::one();
    for _ in 0..exp {
        acc = acc * base.clone();
    }
    acc
}

/// `(-1)^n` as a scalar.
pub fn neg_one_pow<T: Scalar>(n: usize) -> T {
    if n.is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    }
}

/// Builds an exact rational `num / den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
