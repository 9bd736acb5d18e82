//! Time-optimal control synthesis for the discrete integrator chain
//!
//! ```text
//! x_i(k+1) = x_i(k) + h x_{i+1}(k),  i < m
//! x_m(k+1) = x_m(k) + h u(k),        |u| <= r
//! ```
//!
//! State space is cut into slabs by the parallel hyperplanes
//! `y(X) = C(k, m) h^m r s`, where `y = sum_i C(m-1, i) h^i x_{i+1}` and
//! `s = sign(y)`. Inside the band `|y| <= h^m r` the law is linear; outside,
//! the slab index `k` is found from the falling-factorial bracket and the
//! control steers the state onto the next switching hyperplane in one step.

use num_traits::Float;

use crate::combinatorics::{binom_weight, falling_factorial};
use crate::error::{Error, Result};
use crate::scalar::{neg_one_pow, pow, Scalar};

/// Order `m`, step `h` and control bound `r` of an integrator chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams<T> {
    m: usize,
    h: T,
    r: T,
}

impl<T: Scalar> SystemParams<T> {
    pub fn new(m: usize, h: T, r: T) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParams(format!("order m must be at least 2, got {m}")));
        }
        if !(h > T::zero()) {
            return Err(Error::InvalidParams(format!("step h must be positive, got {h:?}")));
        }
        if !(r > T::zero()) {
            return Err(Error::InvalidParams(format!("control bound r must be positive, got {r:?}")));
        }
        Ok(Self { m, h, r })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> &T {
        &self.h
    }

    pub fn r(&self) -> &T {
        &self.r
    }

    /// Same order and bound with a different step length.
    pub fn with_step(&self, h: T) -> Result<Self> {
        Self::new(self.m, h, self.r.clone())
    }

    /// `h^m r`, the half-width of the linear band in `y`.
    pub fn linear_bound(&self) -> T {
        pow(&self.h, self.m) * self.r.clone()
    }

    pub(crate) fn check_state(&self, state: &State<T>) {
        assert_eq!(
            state.len(),
            self.m,
            "state length {} does not match system order {}",
            state.len(),
            self.m
        );
    }
}

/// The chain state `(x_1, ..., x_m)` at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct State<T>(Vec<T>);

impl<T: Scalar> State<T> {
    pub fn new(x: Vec<T>) -> Self {
        Self(x)
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![T::zero(); m])
    }

    /// Checks the length against an expected order.
    pub fn with_order(x: Vec<T>, m: usize) -> Result<Self> {
        if x.len() != m {
            return Err(Error::StateLength { expected: m, got: x.len() });
        }
        Ok(Self(x))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.0.iter()
    }

    /// `a * self + b * other`, componentwise.
    pub fn combine(&self, a: &T, other: &Self, b: &T) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(x, y)| a.clone() * x.clone() + b.clone() * y.clone())
                .collect(),
        )
    }

    pub fn scaled(&self, a: &T) -> Self {
        Self(self.0.iter().map(|x| a.clone() * x.clone()).collect())
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, x| if x.abs() > acc { x.abs() } else { acc })
    }
}

impl<T> std::ops::Index<usize> for State<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> std::ops::IndexMut<usize> for State<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T: Scalar> From<Vec<T>> for State<T> {
    fn from(x: Vec<T>) -> Self {
        Self(x)
    }
}

/// Which control law applies to a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `|y| <= h^m r`.
    Linear,
    /// Between the `(k-1)`-th and `k`-th level hyperplanes of `y`.
    Nonlinear { k: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionDecision<T> {
    pub regime: Regime,
    pub y: T,
    pub s: i8,
}

/// Three-valued sign: `+1`, `0` or `-1`.
pub fn sign<T: Scalar>(x: &T) -> i8 {
    if *x > T::zero() {
        1
    } else if *x < T::zero() {
        -1
    } else {
        0
    }
}

/// Unit-saturating linear function: `x / delta` on `|x| <= delta`, `sign(x)` outside.
pub fn sat<T: Scalar>(x: &T, delta: &T) -> Result<T> {
    if !(*delta > T::zero()) {
        return Err(Error::NonPositiveDelta);
    }
    Ok(sat_unchecked(x, delta))
}

fn sat_unchecked<T: Scalar>(x: &T, delta: &T) -> T {
    if x.abs() > *delta {
        T::from_i8(sign(x)).expect("sign fits every scalar")
    } else {
        x.clone() / delta.clone()
    }
}

/// `sum_{i<m} C(k, i) h^i x_{i+1}`, the weighted sum shared by `y` and `z(k)`.
pub(crate) fn binomial_sum<T: Scalar>(k: u64, h: &T, state: &[T]) -> T {
    let mut h_pow = T::one();
    let mut acc = T::zero();
    for (i, x) in state.iter().enumerate() {
        acc = acc + binom_weight::<T>(k, i as u64) * h_pow.clone() * x.clone();
        h_pow = h_pow * h.clone();
    }
    acc
}

/// `y = sum_{i<m} C(m-1, i) h^i x_{i+1}`.
pub fn y_value<T: Scalar>(params: &SystemParams<T>, state: &State<T>) -> T {
    params.check_state(state);
    binomial_sum(params.m as u64 - 1, &params.h, state.as_slice())
}

/// `z(k) = sum_{i<m} C(k, i) h^i x_{i+1}` for `k >= m - 1`.
pub fn z_value<T: Scalar>(params: &SystemParams<T>, k: u64, state: &State<T>) -> Result<T> {
    params.check_state(state);
    let min = params.m as u64 - 1;
    if k < min {
        return Err(Error::IndexTooSmall { k, min });
    }
    Ok(binomial_sum(k, &params.h, state.as_slice()))
}

/// `m!` in the scalar type.
fn factorial_scalar<T: Scalar>(m: usize) -> T {
    (1..=m).fold(T::one(), |acc, i| acc * T::from_index(i))
}

// Beyond this the slab index no longer fits the float mantissa exactly.
const MAX_INDEX: u64 = 1 << 52;

/// Slab index of a state outside the linear band.
///
/// Returns the smallest integer `k >= m` with
/// `m! |y| / (h^m r) <= (k)_m` (falling factorial), where the upper edge is
/// widened by [`Scalar::bracket_slack`]. A `y` lying exactly on the `k`-th
/// level hyperplane therefore maps to `k`, not `k + 1`.
pub fn solve_k<T: Scalar>(params: &SystemParams<T>, y: &T) -> Result<u64> {
    let bound = params.linear_bound();
    if y.abs() <= bound {
        return Err(Error::LinearRegime {
            y: y.to_f64().unwrap_or(f64::NAN),
            bound: bound.to_f64().unwrap_or(f64::NAN),
        });
    }
    let m = params.m;
    let target = factorial_scalar::<T>(m) * y.abs() / bound;
    let covers = |k: u64| {
        let ff = falling_factorial(&T::from_count(k as u128), m);
        let slack = T::bracket_slack(&ff);
        target <= ff + slack
    };

    // (k)_m ~ (k - (m-1)/2)^m, so this lands within a step or two of the answer.
    let guess = target
        .to_f64()
        .map(|t| t.powf(1.0 / m as f64) + (m as f64 - 1.0) / 2.0)
        .filter(|g| g.is_finite())
        .ok_or(Error::IndexOverflow)?;
    if guess > MAX_INDEX as f64 {
        return Err(Error::IndexOverflow);
    }
    let mut k = (guess.ceil() as u64).max(m as u64);
    while k > m as u64 && covers(k - 1) {
        k -= 1;
    }
    while !covers(k) {
        k += 1;
        if k > MAX_INDEX {
            return Err(Error::IndexOverflow);
        }
    }
    Ok(k)
}

/// Regime, `y` and `s` for a state.
pub fn decide_region<T: Scalar>(params: &SystemParams<T>, state: &State<T>) -> RegionDecision<T> {
    let y = y_value(params, state);
    let s = sign(&y);
    let regime = if y.abs() <= params.linear_bound() {
        Regime::Linear
    } else {
        debug_assert!(s != 0);
        // Saturate the index instead of failing; sat() bounds the control anyway.
        Regime::Nonlinear { k: solve_k(params, &y).unwrap_or(MAX_INDEX) }
    };
    RegionDecision { regime, y, s }
}

/// Pre-saturation argument `a(X)` of the m-th order synthesis function.
pub fn control_argument<T: Scalar>(params: &SystemParams<T>, state: &State<T>) -> T {
    let decision = decide_region(params, state);
    let m = params.m;
    let h_m = pow(&params.h, m);
    match decision.regime {
        Regime::Linear => binomial_sum(m as u64, &params.h, state.as_slice()) / h_m,
        Regime::Nonlinear { k } => {
            let s = T::from_i8(decision.s).expect("sign fits every scalar");
            let k_s = T::from_count(k as u128);
            let m_s = T::from_index(m);
            let bias = neg_one_pow::<T>(m - 1) * (T::one() - k_s / m_s) * params.r.clone() * s;
            let denom = binom_weight::<T>(k - 1, m as u64 - 1) * h_m;
            bias + binomial_sum(k, &params.h, state.as_slice()) / denom
        }
    }
}

/// Time-optimal bounded control `u = -r sat(a(X), r)` for an order-m chain.
///
/// Always satisfies `|u| <= r`. At `m = 2` it reproduces
/// [`second_order_control`] exactly.
pub fn time_optimal_control<T: Scalar>(state: &State<T>, params: &SystemParams<T>) -> T {
    let a = control_argument(params, state);
    -(params.r.clone() * sat_unchecked(&a, &params.r))
}

/// Unbounded linear synthesis `u = -sum_i C(m, i) h^i x_{i+1} / h^m`.
pub fn linear_control<T: Scalar>(state: &State<T>, params: &SystemParams<T>) -> T {
    params.check_state(state);
    -(binomial_sum(params.m as u64, &params.h, state.as_slice()) / pow(&params.h, params.m))
}

/// Closed-form second-order synthesis function.
///
/// Written directly in the two state coordinates with the slab index taken
/// from the quadratic root `k' = (1 + sqrt(1 + 8|y| / (h^2 r))) / 2`; it is an
/// independent route to the `m = 2` case of [`time_optimal_control`].
pub fn second_order_control<T: Scalar + Float>(x1: T, x2: T, r: T, h: T) -> T {
    let two = T::one() + T::one();
    let h2 = h * h;
    let y = x1 + h * x2;
    let bound = h2 * r;
    let a = if Float::abs(y) <= bound {
        (x1 + (two * h) * x2) / h2
    } else {
        let s = Float::signum(y);
        let target = two * Float::abs(y) / bound;
        let root = (T::one() + Float::sqrt(T::one() + (two + two) * target)) / two;
        let covers = |k: T| {
            let ff = k * (k - T::one());
            target <= ff + <T as Scalar>::bracket_slack(&ff)
        };
        let mut k = Float::max(Float::ceil(root), two);
        // Same boundary convention as the general solver: the smallest k whose
        // falling factorial covers the target within the float slack.
        while k > two && covers(k - T::one()) {
            k = k - T::one();
        }
        while !covers(k) {
            k = k + T::one();
        }
        -(T::one() - k / two) * r * s + (x1 + (k * h) * x2) / ((k - T::one()) * h2)
    };
    -(r * sat_unchecked(&a, &r))
}
