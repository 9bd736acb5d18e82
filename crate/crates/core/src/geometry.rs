//! Plant dynamics and the geometry of the isochronous regions.
//!
//! The `k`-step transition matrix of the chain is upper triangular with
//! entries `C(k, j-i) h^(j-i)`; its inverse has the closed form
//! `(-1)^(j-i) C(k+j-i-1, j-i) h^(j-i)`. From these, the states that reach the
//! origin in exactly `k` steps under a given control sequence follow in
//! closed form, and with them the bang-bang vertices `a_k`, `b_k` and the
//! hyperplane families that organise the time-optimal trajectories.

use crate::combinatorics::binom_weight;
use crate::error::{Error, Result};
use crate::kernel::{binomial_sum, sign, y_value, State, SystemParams};
use crate::scalar::{neg_one_pow, pow, Scalar};

/// An integrator chain together with its current state.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant<T> {
    params: SystemParams<T>,
    state: State<T>,
}

impl<T: Scalar> Plant<T> {
    pub fn new(params: SystemParams<T>, state: State<T>) -> Result<Self> {
        if state.len() != params.m() {
            return Err(Error::StateLength { expected: params.m(), got: state.len() });
        }
        Ok(Self { params, state })
    }

    pub fn at_origin(params: SystemParams<T>) -> Self {
        let state = State::zeros(params.m());
        Self { params, state }
    }

    pub fn params(&self) -> &SystemParams<T> {
        &self.params
    }

    pub fn state(&self) -> &State<T> {
        &self.state
    }

    pub fn into_state(self) -> State<T> {
        self.state
    }

    /// Advances one step under control `u`.
    ///
    /// `u` is not clamped to `[-r, r]`: the unbounded linear law exceeds the
    /// bound by construction.
    pub fn step(&self, u: &T) -> Self {
        let state = step_state(self.params.h(), &self.state, u);
        Self { params: self.params.clone(), state }
    }
}

/// One step of the chain with step length `h`.
pub fn step_state<T: Scalar>(h: &T, state: &State<T>, u: &T) -> State<T> {
    let x = state.as_slice();
    let m = x.len();
    let mut next = Vec::with_capacity(m);
    for i in 0..m {
        let drive = if i + 1 < m { x[i + 1].clone() } else { u.clone() };
        next.push(x[i].clone() + h.clone() * drive);
    }
    State::new(next)
}

/// Dense square matrix, row-major. Only as much as the closed forms need.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        Self::from_fn(self.n, |i, j| {
            (0..self.n).fold(T::zero(), |acc, v| acc + self.get(i, v).clone() * rhs.get(v, j).clone())
        })
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.n, x.len(), "dimension mismatch");
        (0..self.n)
            .map(|i| (0..self.n).fold(T::zero(), |acc, j| acc + self.get(i, j).clone() * x[j].clone()))
            .collect()
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }
}

/// The one-step matrix `A`: ones on the diagonal, `h` on the superdiagonal.
pub fn step_matrix<T: Scalar>(params: &SystemParams<T>) -> Matrix<T> {
    Matrix::from_fn(params.m(), |i, j| {
        if i == j {
            T::one()
        } else if j == i + 1 {
            params.h().clone()
        } else {
            T::zero()
        }
    })
}

/// `A^k` in closed form: entry `(i, j)` is `C(k, j-i) h^(j-i)`, zero below the diagonal.
pub fn transition_matrix<T: Scalar>(params: &SystemParams<T>, k: u64) -> Matrix<T> {
    Matrix::from_fn(params.m(), |i, j| {
        if j < i {
            T::zero()
        } else {
            let d = j - i;
            binom_weight::<T>(k, d as u64) * pow(params.h(), d)
        }
    })
}

/// `(A^k)^-1` in closed form: entry `(i, j)` is `(-1)^(j-i) C(k+j-i-1, j-i) h^(j-i)`.
pub fn transition_inverse<T: Scalar>(params: &SystemParams<T>, k: u64) -> Result<Matrix<T>> {
    if k < 1 {
        return Err(Error::IndexTooSmall { k, min: 1 });
    }
    Ok(Matrix::from_fn(params.m(), |i, j| {
        if j < i {
            T::zero()
        } else {
            let d = j - i;
            neg_one_pow::<T>(d) * binom_weight::<T>(k + d as u64 - 1, d as u64) * pow(params.h(), d)
        }
    }))
}

/// `A^index B_0`: component `i` (1-based) is `C(index, m-i) h^(m-i+1)`.
pub fn control_vector<T: Scalar>(params: &SystemParams<T>, index: u64) -> Vec<T> {
    let m = params.m();
    (1..=m)
        .map(|i| binom_weight::<T>(index, (m - i) as u64) * pow(params.h(), m - i + 1))
        .collect()
}

/// The initial state that reaches the origin after applying `controls` in order.
///
/// `x_i(0) = (-1)^(m-i+1) sum_mu C(m-i+mu, m-i) h^(m-i+1) u(mu)`.
pub fn isochronous_initial_state<T: Scalar>(params: &SystemParams<T>, controls: &[T]) -> Result<State<T>> {
    if controls.is_empty() {
        return Err(Error::EmptyControls);
    }
    let m = params.m();
    let x = (1..=m)
        .map(|i| {
            let d = m - i;
            let sum = controls.iter().enumerate().fold(T::zero(), |acc, (mu, u)| {
                acc + binom_weight::<T>((d + mu) as u64, d as u64) * u.clone()
            });
            neg_one_pow::<T>(d + 1) * pow(params.h(), d + 1) * sum
        })
        .collect();
    Ok(State::new(x))
}

/// The four bang-bang vertex families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexFamily {
    /// Reached the origin under `k` controls of `+r`.
    APlus,
    /// Reached the origin under `k` controls of `-r`.
    AMinus,
    /// One `+r` step onto `a_{-(k-1)}`, then `-r` to the origin.
    BPlus,
    /// One `-r` step onto `a_{+(k-1)}`, then `+r` to the origin.
    BMinus,
}

impl VertexFamily {
    pub const ALL: [VertexFamily; 4] = [Self::APlus, Self::AMinus, Self::BPlus, Self::BMinus];

    /// `sign(y)` at the family's vertices.
    pub fn s(self, m: usize) -> i8 {
        let even = m.is_multiple_of(2);
        match self {
            Self::APlus | Self::BMinus => {
                if even {
                    1
                } else {
                    -1
                }
            }
            Self::AMinus | Self::BPlus => {
                if even {
                    -1
                } else {
                    1
                }
            }
        }
    }

    pub fn is_a(self) -> bool {
        matches!(self, Self::APlus | Self::AMinus)
    }

    fn min_k(self) -> u64 {
        if self.is_a() {
            1
        } else {
            2
        }
    }

    /// The `a` family with the given `s` at order `m`.
    pub fn a_with_sign(m: usize, s: i8) -> Self {
        if Self::APlus.s(m) == s {
            Self::APlus
        } else {
            Self::AMinus
        }
    }

    /// The `b` family sharing its hyperplanes with `a_with_sign(m, s)`.
    pub fn b_with_sign(m: usize, s: i8) -> Self {
        if Self::BMinus.s(m) == s {
            Self::BMinus
        } else {
            Self::BPlus
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex<T> {
    pub family: VertexFamily,
    pub k: u64,
    pub coords: State<T>,
}

/// Closed-form vertex coordinates; `k = 0` on an `a` family is the origin.
///
/// `a_k: x_i = (-1)^(i-1) C(m+k-i, m-i+1) h^(m-i+1) r s`, and `b_k` subtracts
/// `2` from the binomial.
pub fn vertex_coords<T: Scalar>(params: &SystemParams<T>, family: VertexFamily, k: u64) -> State<T> {
    let m = params.m();
    let s = T::from_i8(family.s(m)).expect("sign fits every scalar");
    let shift = if family.is_a() { T::zero() } else { T::one() + T::one() };
    let x = (1..=m)
        .map(|i| {
            let c = binom_weight::<T>(m as u64 + k - i as u64, (m - i + 1) as u64) - shift.clone();
            neg_one_pow::<T>(i - 1) * c * pow(params.h(), m - i + 1) * params.r().clone() * s.clone()
        })
        .collect();
    State::new(x)
}

/// Vertex `k` of `family`. `k >= 1` for `a` families, `k >= 2` for `b` families.
pub fn vertex<T: Scalar>(params: &SystemParams<T>, family: VertexFamily, k: u64) -> Result<Vertex<T>> {
    if k < family.min_k() {
        return Err(Error::VertexIndex { family, k });
    }
    Ok(Vertex { family, k, coords: vertex_coords(params, family, k) })
}

/// The bang-bang control sequence that defines a vertex, in application order.
pub fn defining_controls<T: Scalar>(params: &SystemParams<T>, family: VertexFamily, k: u64) -> Result<Vec<T>> {
    if k < family.min_k() {
        return Err(Error::VertexIndex { family, k });
    }
    let r = params.r().clone();
    let (first, rest) = match family {
        VertexFamily::APlus => (r.clone(), r),
        VertexFamily::AMinus => (-r.clone(), -r),
        VertexFamily::BPlus => (r.clone(), -r),
        VertexFamily::BMinus => (-r.clone(), r),
    };
    let mut out = vec![first];
    out.extend(std::iter::repeat_n(rest, k as usize - 1));
    Ok(out)
}

/// The hyperplane families of the isochronous geometry.
///
/// Each variant is an affine equation in the state; `s` is the sign of `y`
/// on the half of state space the hyperplane belongs to.
#[derive(Debug, Clone, PartialEq)]
pub enum Hyperplane<T> {
    /// `y = C(k, m) h^m r s`: the level separating the `k`-th and `(k+1)`-th slabs.
    YLevel { k: u64, s: i8 },
    /// `z(k) = (-1)^(m-1) C(k, m) h^m r s`: through `a_k` and `a_{k-1}`, `k >= m-1`.
    ZLevel { k: u64, s: i8 },
    /// `z(k) = (-1)^(m-1) (C(k, m) - 2 C(k-1, m-1)) h^m r s`: through `b_k` and `b_{k-1}`.
    ZLevelBar { k: u64, s: i8 },
    /// `z(k) = (-1)^(m-1) (C(k, m) - 2 (1-beta) C(k-1, m-1)) h^m r s`, `0 <= beta <= 1`.
    ZLevelBlend { k: u64, beta: T, s: i8 },
    /// `ybar = (C(k-1, m) + (-1)^(m-1)) h^m r s` with `ybar = sum_i C(m, i) h^i x_{i+1}`, `k >= 1`.
    YBarLevel { k: u64, s: i8 },
    /// The nested linear-region subspaces: `z_{m-mu}(m-mu-1) = 0` for `mu = 0..=nu`.
    Nested { nu: usize },
}

impl<T: Scalar> Hyperplane<T> {
    fn validate(&self, m: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::MalformedHyperplane(msg));
        let check_s = |s: i8| if s == 1 || s == -1 { Ok(()) } else { bad(format!("s must be +1 or -1, got {s}")) };
        match self {
            Hyperplane::YLevel { s, .. } => check_s(*s),
            Hyperplane::ZLevel { k, s } | Hyperplane::ZLevelBar { k, s } => {
                check_s(*s)?;
                if (*k as usize) + 1 < m {
                    return bad(format!("k = {k} below m - 1 = {}", m - 1));
                }
                Ok(())
            }
            Hyperplane::ZLevelBlend { k, beta, s } => {
                check_s(*s)?;
                if (*k as usize) + 1 < m {
                    return bad(format!("k = {k} below m - 1 = {}", m - 1));
                }
                if *beta < T::zero() || *beta > T::one() {
                    return bad(format!("beta = {beta:?} outside [0, 1]"));
                }
                Ok(())
            }
            Hyperplane::YBarLevel { k, s } => {
                check_s(*s)?;
                if *k < 1 {
                    return bad("k must be at least 1".into());
                }
                Ok(())
            }
            Hyperplane::Nested { nu } => {
                if *nu >= m {
                    return bad(format!("nu = {nu} must be below m = {m}"));
                }
                Ok(())
            }
        }
    }
}

/// `sum_{i<m} C(m, i) h^i x_{i+1}`.
pub fn ybar_value<T: Scalar>(params: &SystemParams<T>, state: &State<T>) -> T {
    weighted(params, params.m() as u64, state.as_slice())
}

fn weighted<T: Scalar>(params: &SystemParams<T>, k: u64, x: &[T]) -> T {
    binomial_sum(k, params.h(), x)
}

/// Left side minus right side of the hyperplane equation at `state`.
///
/// For [`Hyperplane::Nested`] the result is the largest `|z_{m-mu}(m-mu-1)|`
/// over `mu = 0..=nu`.
pub fn hyperplane_residual<T: Scalar>(params: &SystemParams<T>, plane: &Hyperplane<T>, state: &State<T>) -> Result<T> {
    let m = params.m();
    if state.len() != m {
        return Err(Error::StateLength { expected: m, got: state.len() });
    }
    plane.validate(m)?;
    let unit = params.linear_bound();
    let sgn = |s: i8| T::from_i8(s).expect("sign fits every scalar");
    let c = |n: u64, k: u64| binom_weight::<T>(n, k);
    let alt = neg_one_pow::<T>(m - 1);
    let x = state.as_slice();
    let two = T::one() + T::one();
    let mu = m as u64;
    Ok(match plane {
        Hyperplane::YLevel { k, s } => y_value(params, state) - c(*k, mu) * unit * sgn(*s),
        Hyperplane::ZLevel { k, s } => weighted(params, *k, x) - alt * c(*k, mu) * unit * sgn(*s),
        Hyperplane::ZLevelBar { k, s } => {
            let level = c(*k, mu) - two * c(k - 1, mu - 1);
            weighted(params, *k, x) - alt * level * unit * sgn(*s)
        }
        Hyperplane::ZLevelBlend { k, beta, s } => {
            let level = c(*k, mu) - two * (T::one() - beta.clone()) * c(k - 1, mu - 1);
            weighted(params, *k, x) - alt * level * unit * sgn(*s)
        }
        Hyperplane::YBarLevel { k, s } => ybar_value(params, state) - (c(k - 1, mu) + alt) * unit * sgn(*s),
        Hyperplane::Nested { nu } => (0..=*nu).fold(T::zero(), |worst, level| {
            let tail = &x[level..];
            let r = weighted(params, (m - level - 1) as u64, tail).abs();
            if r > worst {
                r
            } else {
                worst
            }
        }),
    })
}

/// Scale for "on the hyperplane" tests: `max(1, C(k, m)) h^m r`, or
/// `C(2m, m) h^(m-nu) r` for the nested family.
pub fn residual_scale<T: Scalar>(params: &SystemParams<T>, plane: &Hyperplane<T>) -> T {
    let m = params.m();
    let k = match plane {
        Hyperplane::Nested { nu } => {
            return binom_weight::<T>(2 * m as u64, m as u64) * pow(params.h(), m - nu) * params.r().clone();
        }
        Hyperplane::YLevel { k, .. }
        | Hyperplane::ZLevel { k, .. }
        | Hyperplane::ZLevelBar { k, .. }
        | Hyperplane::ZLevelBlend { k, .. }
        | Hyperplane::YBarLevel { k, .. } => *k,
    };
    let c = binom_weight::<T>(k, m as u64);
    let c = if c > T::one() { c } else { T::one() };
    c * params.linear_bound()
}

/// Whether `state` lies between the `(k-1)`-th and `k`-th `y` levels on the `s` side:
/// `C(k-1, m) h^m r < |y| <= C(k, m) h^m r` and `sign(y) = s`.
pub fn between_levels<T: Scalar>(params: &SystemParams<T>, k: u64, s: i8, state: &State<T>) -> bool {
    let y = y_value(params, state);
    let m = params.m() as u64;
    let unit = params.linear_bound();
    let lo = binom_weight::<T>(k.saturating_sub(1), m) * unit.clone();
    let hi = binom_weight::<T>(k, m) * unit;
    sign(&y) == s && y.abs() > lo && y.abs() <= hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;

    fn p(m: usize, h: f64, r: f64) -> SystemParams<f64> {
        SystemParams::new(m, h, r).unwrap()
    }

    #[test]
    fn step_examples() {
        let plant = Plant::new(p(2, 1.0, 1.0), State::new(vec![0.0, 1.0])).unwrap();
        assert_eq!(plant.step(&0.0).state().as_slice(), &[1.0, 1.0]);
        let plant = Plant::new(p(2, 1.0, 1.0), State::new(vec![-1.0, 1.0])).unwrap();
        assert_eq!(plant.step(&-1.0).state().as_slice(), &[0.0, 0.0]);
        let plant = Plant::new(p(4, 0.3, 1.0), State::new(vec![0.0, 0.0, 0.0, 2.0])).unwrap();
        assert_eq!(plant.step(&17.0).state()[0], 0.0);
        assert!(Plant::new(p(3, 1.0, 1.0), State::new(vec![0.0])).is_err());
    }

    #[test]
    fn transition_matrix_examples() {
        assert_eq!(transition_matrix(&p(4, 0.3, 1.0), 0), Matrix::identity(4));
        let a = transition_matrix(&p(2, 0.1, 1.0), 5);
        assert_eq!(a.rows(), vec![vec![1.0, 0.5], vec![0.0, 1.0]]);
        let a = transition_matrix(&p(3, 1.0, 1.0), 2);
        assert_eq!(a.rows(), vec![vec![1.0, 2.0, 1.0], vec![0.0, 1.0, 2.0], vec![0.0, 0.0, 1.0]]);
    }

    #[test]
    fn transition_inverse_examples() {
        let inv = transition_inverse(&p(2, 1.0, 1.0), 1).unwrap();
        assert_eq!(inv.rows(), vec![vec![1.0, -1.0], vec![0.0, 1.0]]);
        let inv = transition_inverse(&p(3, 1.0, 1.0), 2).unwrap();
        assert_eq!(inv.rows(), vec![vec![1.0, -2.0, 3.0], vec![0.0, 1.0, -2.0], vec![0.0, 0.0, 1.0]]);
        assert!(transition_inverse(&p(3, 1.0, 1.0), 0).is_err());
        for m in 2..=6 {
            let params = p(m, 0.37, 1.0);
            for k in 1..=12 {
                let prod = transition_matrix(&params, k).mul(&transition_inverse(&params, k).unwrap());
                for i in 0..m {
                    for j in 0..m {
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!((prod.get(i, j) - expect).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn control_vector_examples() {
        assert_eq!(control_vector(&p(4, 0.25, 1.0), 0), vec![0.0, 0.0, 0.0, 0.25]);
        assert_eq!(control_vector(&p(2, 1.0, 1.0), 3), vec![3.0, 1.0]);
        assert_eq!(control_vector(&p(3, 0.5, 1.0), 1), vec![0.0, 0.25, 0.5]);
        // A^n B_0 by repeated multiplication.
        let params = p(4, 0.5, 1.0);
        let a = step_matrix(&params);
        let mut b = vec![0.0, 0.0, 0.0, 0.5];
        for n in 0..8 {
            assert_eq!(control_vector(&params, n), b);
            b = a.mul_vec(&b);
        }
    }

    #[test]
    fn isochronous_initial_state_examples() {
        let params = p(2, 1.0, 1.0);
        assert_eq!(isochronous_initial_state(&params, &[-1.0]).unwrap().as_slice(), &[-1.0, 1.0]);
        assert_eq!(isochronous_initial_state(&params, &[0.0, 0.0, 0.0]).unwrap().as_slice(), &[0.0, 0.0]);
        assert_eq!(isochronous_initial_state::<f64>(&params, &[]), Err(Error::EmptyControls));
        let b = isochronous_initial_state(&params, &[1.0, -1.0, -1.0]).unwrap();
        assert_eq!(b, vertex(&params, VertexFamily::BPlus, 3).unwrap().coords);
    }

    #[test]
    fn isochronous_round_trip_exact() {
        let params = SystemParams::new(4, ratio(1, 7), ratio(2, 1)).unwrap();
        let controls: Vec<BigRational> = [3, -2, 1, 0, 2, -1, 1].iter().map(|&c| ratio(c, 3)).collect();
        let x0 = isochronous_initial_state(&params, &controls).unwrap();
        let mut plant = Plant::new(params, x0).unwrap();
        for u in &controls {
            plant = plant.step(u);
        }
        assert_eq!(plant.into_state(), State::zeros(4));
    }

    #[test]
    fn vertex_examples() {
        let params = p(2, 1.0, 1.0);
        assert_eq!(vertex(&params, VertexFamily::AMinus, 2).unwrap().coords.as_slice(), &[-3.0, 2.0]);
        assert_eq!(vertex(&params, VertexFamily::BPlus, 2).unwrap().coords.as_slice(), &[-1.0, 0.0]);
        let (h, r) = (0.5, 3.0);
        let params = p(3, h, r);
        let a1 = vertex(&params, VertexFamily::AMinus, 1).unwrap();
        assert_eq!(VertexFamily::AMinus.s(3), 1);
        assert_eq!(a1.coords.as_slice(), &[h * h * h * r, -h * h * r, h * r]);
        assert!(vertex(&params, VertexFamily::APlus, 0).is_err());
        assert!(vertex(&params, VertexFamily::BMinus, 1).is_err());
    }

    #[test]
    fn second_order_vertices_match_planar_formulas() {
        let (h, r) = (0.2, 1.5);
        let params = p(2, h, r);
        for k in 2..=15u64 {
            let kf = k as f64;
            let tri = 0.5 * kf * (kf + 1.0) * h * h * r;
            let close = |a: &State<f64>, b: [f64; 2]| (a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12;
            assert!(close(&vertex_coords(&params, VertexFamily::AMinus, k), [-tri, kf * h * r]));
            assert!(close(&vertex_coords(&params, VertexFamily::APlus, k), [tri, -kf * h * r]));
            assert!(close(
                &vertex_coords(&params, VertexFamily::BPlus, k),
                [-tri + 2.0 * h * h * r, (kf - 2.0) * h * r]
            ));
            assert!(close(
                &vertex_coords(&params, VertexFamily::BMinus, k),
                [tri - 2.0 * h * h * r, -(kf - 2.0) * h * r]
            ));
        }
    }

    #[test]
    fn hyperplane_residual_examples() {
        let params = SystemParams::new(4, ratio(1, 3), ratio(5, 2)).unwrap();
        for family in VertexFamily::ALL {
            let s = family.s(4);
            for k in 2..=12u64 {
                let v = vertex_coords(&params, family, k);
                let on_n = hyperplane_residual(&params, &Hyperplane::YLevel { k, s }, &v).unwrap();
                assert_eq!(on_n, ratio(0, 1));
                if family.is_a() {
                    let r = hyperplane_residual(&params, &Hyperplane::YBarLevel { k, s }, &v).unwrap();
                    assert_eq!(r, ratio(0, 1));
                } else {
                    if k >= 3 {
                        let r = hyperplane_residual(&params, &Hyperplane::ZLevelBar { k, s }, &v).unwrap();
                        assert_eq!(r, ratio(0, 1));
                    }
                    // Off the shifted level by exactly 2 (-1)^m h^m r s.
                    let off = hyperplane_residual(&params, &Hyperplane::YBarLevel { k, s }, &v).unwrap();
                    let expect = ratio(2 * s as i64, 1) * params.linear_bound();
                    assert_eq!(off, expect);
                }
            }
        }
    }

    #[test]
    fn malformed_hyperplanes_are_rejected() {
        let params = p(4, 1.0, 1.0);
        let x = State::zeros(4);
        for plane in [
            Hyperplane::YLevel { k: 3, s: 0 },
            Hyperplane::ZLevel { k: 2, s: 1 },
            Hyperplane::ZLevelBlend { k: 5, beta: 1.5, s: 1 },
            Hyperplane::YBarLevel { k: 0, s: -1 },
            Hyperplane::Nested { nu: 4 },
        ] {
            assert!(matches!(
                hyperplane_residual(&params, &plane, &x),
                Err(Error::MalformedHyperplane(_))
            ));
        }
        assert!(hyperplane_residual(&params, &Hyperplane::Nested { nu: 1 }, &State::zeros(3)).is_err());
    }

    #[test]
    fn between_levels_is_half_open() {
        let params = p(2, 1.0, 1.0);
        // C(3,2) = 3 exactly: belongs to slab 3, not slab 4.
        let on = State::new(vec![3.0, 0.0]);
        assert!(between_levels(&params, 3, 1, &on));
        assert!(!between_levels(&params, 4, 1, &on));
        assert!(!between_levels(&params, 3, -1, &on));
    }
}
