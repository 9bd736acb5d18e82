//! Exact extended binomial coefficients, falling factorials and the
//! generating-function identities the synthesis derivation rests on.
//!
//! `binom(n, k)` follows the extended convention: it is zero whenever
//! `k < 0` or `k > n`. Every identity in [`Identity`] is checked by evaluating
//! its left side as a literal sum of [`binom`] terms and its right side
//! through an independent factorial-ratio route in arbitrary precision, so a
//! bug in one route cannot mask a bug in the other.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Extended binomial coefficient `C(n, k)` in exact 128-bit arithmetic.
///
/// Zero outside `0 <= k <= n`. Negative `n` is rejected and overflow is an
/// error rather than a wrap.
pub fn binom(n: i64, k: i64) -> Result<u128> {
    if n < 0 {
        return Err(Error::NegativeBinomialTop(n));
    }
    if k < 0 || k > n {
        return Ok(0);
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc == C(n, i) here, and C(n, i) * (n - i) is divisible by i + 1.
        acc = acc
            .checked_mul(n - i)
            .ok_or(Error::Overflow("binomial coefficient"))?
            / (i + 1);
    }
    Ok(acc)
}

/// Arbitrary-width `C(n, k)` for callers whose indices may leave the 128-bit range.
pub fn binom_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Binomial weight `C(n, k)` converted into the scalar type, exact as an
/// integer before the conversion.
pub(crate) fn binom_weight<T: Scalar>(n: u64, k: u64) -> T {
    match binom(n as i64, k as i64) {
        Ok(c) if n <= i64::MAX as u64 => T::from_count(c),
        _ => T::from_biguint(&binom_big(n, k)),
    }
}

/// `x (x - 1) ... (x - m + 1)`.
pub fn falling_factorial<T: Scalar>(x: &T, m: usize) -> T {
    let mut acc = T::one();
    for i in 0..m {
        acc = acc * (x.clone() - T::from_index(i));
    }
    acc
}

/// `n!` as an exact integer.
pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// The combinatorial identities used by the derivation, each with the
/// parameters it is stated for.
///
/// Left sides are the literal sums; right sides are the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Identity {
    /// `sum_{j=1}^{k} C(j+m-i-1, m-i) = C(m+k-i, m-i+1)` for `k >= 0`, `m >= 1`, `1 <= i <= m`.
    HockeyStick { m: i64, i: i64, k: i64 },
    /// `sum_{i=0}^{m-1} (-1)^i C(m-1, i) C(k+m-i-1, m-i) = C(k, m)` for `k, m >= 1`.
    RowConvolution { m: i64, k: i64 },
    /// `sum_{i=0}^{m-1} (-1)^i C(k, i) C(k+m-i-1, m-i) = (-1)^(m-1) C(k, m)` for `k >= m-1`, `m >= 2`.
    DiagonalConvolution { m: i64, k: i64 },
    /// `sum_{i=0}^{m-1} (-1)^i C(k, i) C(k+m-i-2, m-i) = (-1)^(m-1) C(k, m)` for `k >= m-1`, `m >= 2`.
    ShiftedDiagonalConvolution { m: i64, k: i64 },
    /// `sum_{i=0}^{m-1} (-1)^i C(k, i) = (-1)^(m-1) C(k-1, m-1)` for `k, m >= 1`.
    AlternatingPartialSum { m: i64, k: i64 },
    /// `sum_{i=0}^{m-1} (-1)^i C(m, i) C(k+m-i-1, m-i) = C(k-1, m) + (-1)^(m-1)` for `k, m >= 1`.
    FullRowConvolution { m: i64, k: i64 },
    /// `sum_{i=0}^{m-1} (-1)^i C(m, i) = (-1)^(m-1)` for `m >= 1`.
    AlternatingRowSum { m: i64 },
    /// `sum_{i=0}^{m-nu-1} (-1)^i C(m-nu-1, i) C(k+m-i-nu-1, m-i-nu) = 0`
    /// for `m >= 1`, `0 <= nu <= m-1`, `0 <= k <= m-1-nu`.
    NestedConvolution { m: i64, nu: i64, k: i64 },
}

impl Identity {
    /// Short stable label, used in verification reports.
    pub fn label(&self) -> &'static str {
        match self {
            Identity::HockeyStick { .. } => "hockey-stick",
            Identity::RowConvolution { .. } => "row-convolution",
            Identity::DiagonalConvolution { .. } => "diagonal-convolution",
            Identity::ShiftedDiagonalConvolution { .. } => "shifted-diagonal-convolution",
            Identity::AlternatingPartialSum { .. } => "alternating-partial-sum",
            Identity::FullRowConvolution { .. } => "full-row-convolution",
            Identity::AlternatingRowSum { .. } => "alternating-row-sum",
            Identity::NestedConvolution { .. } => "nested-convolution",
        }
    }

    fn precondition(&self) -> std::result::Result<(), String> {
        let ok = |cond: bool, msg: &str| if cond { Ok(()) } else { Err(msg.to_string()) };
        match *self {
            Identity::HockeyStick { m, i, k } => {
                ok(k >= 0 && m >= 1 && 1 <= i && i <= m, "need k >= 0, m >= 1, 1 <= i <= m")
            }
            Identity::RowConvolution { m, k }
            | Identity::AlternatingPartialSum { m, k }
            | Identity::FullRowConvolution { m, k } => ok(k >= 1 && m >= 1, "need k, m >= 1"),
            Identity::DiagonalConvolution { m, k } | Identity::ShiftedDiagonalConvolution { m, k } => {
                ok(m >= 2 && k >= m - 1, "need k >= m - 1, m >= 2")
            }
            Identity::AlternatingRowSum { m } => ok(m >= 1, "need m >= 1"),
            Identity::NestedConvolution { m, nu, k } => ok(
                m >= 1 && 0 <= nu && nu < m && 0 <= k && k <= m - 1 - nu,
                "need m >= 1, 0 <= nu <= m - 1, 0 <= k <= m - 1 - nu",
            ),
        }
    }

    /// Literal summation of the left side.
    fn lhs(&self) -> Result<BigInt> {
        let c = |n: i64, k: i64| -> Result<BigInt> { Ok(BigInt::from(binom(n, k)?)) };
        let sign = |i: i64| if i % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        let mut sum = BigInt::zero();
        match *self {
            Identity::HockeyStick { m, i, k } => {
                for j in 1..=k {
                    sum += c(j + m - i - 1, m - i)?;
                }
            }
            Identity::RowConvolution { m, k } => {
                for i in 0..m {
                    sum += sign(i) * c(m - 1, i)? * c(k + m - i - 1, m - i)?;
                }
            }
            Identity::DiagonalConvolution { m, k } => {
                for i in 0..m {
                    sum += sign(i) * c(k, i)? * c(k + m - i - 1, m - i)?;
                }
            }
            Identity::ShiftedDiagonalConvolution { m, k } => {
                for i in 0..m {
                    sum += sign(i) * c(k, i)? * c(k + m - i - 2, m - i)?;
                }
            }
            Identity::AlternatingPartialSum { m, k } => {
                for i in 0..m {
                    sum += sign(i) * c(k, i)?;
                }
            }
            Identity::FullRowConvolution { m, k } => {
                for i in 0..m {
                    sum += sign(i) * c(m, i)? * c(k + m - i - 1, m - i)?;
                }
            }
            Identity::AlternatingRowSum { m } => {
                for i in 0..m {
                    sum += sign(i) * c(m, i)?;
                }
            }
            Identity::NestedConvolution { m, nu, k } => {
                let top = m - nu - 1;
                for i in 0..=top {
                    sum += sign(i) * c(top, i)? * c(k + m - i - nu - 1, m - i - nu)?;
                }
            }
        }
        Ok(sum)
    }

    /// Closed-form right side, through factorial ratios.
    fn rhs(&self) -> BigInt {
        let sign = |i: i64| if i.rem_euclid(2) == 0 { BigInt::one() } else { -BigInt::one() };
        match *self {
            Identity::HockeyStick { m, i, k } => factorial_binom(m + k - i, m - i + 1),
            Identity::RowConvolution { m, k } => factorial_binom(k, m),
            Identity::DiagonalConvolution { m, k } | Identity::ShiftedDiagonalConvolution { m, k } => {
                sign(m - 1) * factorial_binom(k, m)
            }
            Identity::AlternatingPartialSum { m, k } => sign(m - 1) * factorial_binom(k - 1, m - 1),
            Identity::FullRowConvolution { m, k } => factorial_binom(k - 1, m) + sign(m - 1),
            Identity::AlternatingRowSum { m } => sign(m - 1),
            Identity::NestedConvolution { .. } => BigInt::zero(),
        }
    }

    /// Both sides, after checking the stated parameter range.
    pub fn sides(&self) -> Result<(BigInt, BigInt)> {
        self.precondition().map_err(|reason| Error::IdentityPrecondition {
            identity: self.label(),
            reason,
        })?;
        Ok((self.lhs()?, self.rhs()))
    }
}

/// `n! / (k! (n-k)!)` with the extended-zero convention.
fn factorial_binom(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let (n, k) = (n as u64, k as u64);
    BigInt::from(factorial(n) / (factorial(k) * factorial(n - k)))
}

/// Evaluates both sides of `identity` exactly and reports whether they agree.
///
/// Out-of-range parameters are an error, so a failing identity is never
/// confused with a violated precondition.
pub fn identity_check(identity: Identity) -> Result<bool> {
    let (lhs, rhs) = identity.sides()?;
    Ok(lhs == rhs)
}

/// Every in-range parameter tuple with `m <= max_m` and `k <= max_k`.
pub fn identity_grid(max_m: i64, max_k: i64) -> Vec<Identity> {
    let mut out = Vec::new();
    for m in 1..=max_m {
        out.push(Identity::AlternatingRowSum { m });
        for k in 0..=max_k {
            for i in 1..=m {
                out.push(Identity::HockeyStick { m, i, k });
            }
            if k >= 1 {
                out.push(Identity::RowConvolution { m, k });
                out.push(Identity::AlternatingPartialSum { m, k });
                out.push(Identity::FullRowConvolution { m, k });
            }
            if m >= 2 && k >= m - 1 {
                out.push(Identity::DiagonalConvolution { m, k });
                out.push(Identity::ShiftedDiagonalConvolution { m, k });
            }
            for nu in 0..m {
                if k <= m - 1 - nu {
                    out.push(Identity::NestedConvolution { m, nu, k });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binom_examples() {
        assert_eq!(binom(4, 2).unwrap(), 6);
        assert_eq!(binom(2, 5).unwrap(), 0);
        assert_eq!(binom(7, -1).unwrap(), 0);
        assert_eq!(binom(0, 0).unwrap(), 1);
        assert_eq!(binom(60, 30).unwrap(), 118_264_581_564_861_424);
    }

    #[test]
    fn binom_rejects_negative_top() {
        assert_eq!(binom(-1, 0), Err(Error::NegativeBinomialTop(-1)));
    }

    #[test]
    fn binom_overflow_is_an_error() {
        assert!(matches!(binom(200, 100), Err(Error::Overflow(_))));
        assert_eq!(binom_big(200, 100).to_string(), "90548514656103281165404177077484163874504589675413336841320");
    }

    #[test]
    fn falling_factorial_examples() {
        assert_eq!(falling_factorial(&3.0f64, 2), 6.0);
        assert_eq!(falling_factorial(&5.0f64, 3), 60.0);
        assert_eq!(falling_factorial(&4.0f64, 5), 0.0);
    }

    #[test]
    fn pascal_recurrence_up_to_sixty() {
        for n in 2..=60 {
            for k in 1..n {
                assert_eq!(binom(n, k).unwrap(), binom(n - 1, k).unwrap() + binom(n - 1, k - 1).unwrap());
            }
        }
    }

    #[test]
    fn identity_examples() {
        let hs = Identity::HockeyStick { m: 3, i: 1, k: 4 };
        assert_eq!(hs.sides().unwrap(), (BigInt::from(20), BigInt::from(20)));
        let alt = Identity::AlternatingRowSum { m: 5 };
        assert_eq!(alt.sides().unwrap(), (BigInt::one(), BigInt::one()));
        let empty = Identity::HockeyStick { m: 1, i: 1, k: 0 };
        assert_eq!(empty.sides().unwrap(), (BigInt::zero(), BigInt::zero()));
    }

    #[test]
    fn identity_preconditions_are_enforced() {
        for bad in [
            Identity::HockeyStick { m: 2, i: 3, k: 1 },
            Identity::HockeyStick { m: 2, i: 1, k: -1 },
            Identity::RowConvolution { m: 0, k: 1 },
            Identity::DiagonalConvolution { m: 1, k: 3 },
            Identity::ShiftedDiagonalConvolution { m: 4, k: 2 },
            Identity::AlternatingPartialSum { m: 1, k: 0 },
            Identity::FullRowConvolution { m: 3, k: 0 },
            Identity::AlternatingRowSum { m: 0 },
            Identity::NestedConvolution { m: 3, nu: 3, k: 0 },
            Identity::NestedConvolution { m: 3, nu: 1, k: 2 },
        ] {
            assert!(matches!(identity_check(bad), Err(Error::IdentityPrecondition { .. })), "{bad:?}");
        }
    }

    #[test]
    fn every_identity_holds_on_the_small_grid() {
        for id in identity_grid(6, 12) {
            assert!(identity_check(id).unwrap(), "{id:?}");
        }
    }

    proptest! {
        #[test]
        fn binom_symmetry(n in 0i64..=90, k in 0i64..=90) {
            prop_assume!(k <= n);
            prop_assert_eq!(binom(n, k).unwrap(), binom(n, n - k).unwrap());
        }

        #[test]
        fn falling_factorial_matches_binomial(k in 0u64..=40, m in 1usize..=8) {
            prop_assume!(k >= m as u64);
            let ff = falling_factorial(&(k as f64), m);
            let expected = binom(k as i64, m as i64).unwrap() as f64 * factorial(m as u64).iter_u64_digits().next().unwrap() as f64;
            prop_assert_eq!(ff, expected);
        }

        #[test]
        fn big_and_small_binomials_agree(n in 0u64..=120, k in 0u64..=12) {
            prop_assert_eq!(binom_big(n, k), BigUint::from(binom(n as i64, k as i64).unwrap()));
        }
    }
}
