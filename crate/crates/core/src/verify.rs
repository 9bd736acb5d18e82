//! Verification suites for the combinatorial identities, the transition
//! matrices, the isochronous geometry and the closed-loop law.
//!
//! Every suite records one pass or fail per checked instance. Geometry and
//! matrix suites are generic over the scalar: with exact rationals the
//! tolerance is zero, with floats it is scale-aware.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::combinatorics::{binom_weight, identity_check, identity_grid};
use crate::error::{Error, Result};
use crate::geometry::{
    between_levels, defining_controls, hyperplane_residual, isochronous_initial_state, residual_scale,
    step_matrix, step_state, transition_inverse, transition_matrix, vertex_coords, ybar_value, Hyperplane, Matrix,
    VertexFamily,
};
use crate::kernel::{second_order_control, time_optimal_control, y_value, State, SystemParams};
use crate::scalar::{neg_one_pow, pow, ratio, Scalar};

/// Relative tolerance for float geometry checks.
pub const GEOMETRY_TOL: f64 = 1e-9;
/// Relative tolerance for float matrix checks.
pub const MATRIX_TOL: f64 = 1e-12;
/// Blend weights sampled along vertex segments.
pub const BETAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub id: &'static str,
    pub passed: u64,
    pub failed: u64,
    /// Description of the first failing instance, if any.
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn record(&mut self, id: &'static str, ok: bool, detail: impl FnOnce() -> String) {
        let idx = match self.suites.iter().position(|s| s.id == id) {
            Some(i) => i,
            None => {
                self.suites.push(SuiteResult { id, passed: 0, failed: 0, first_failure: None });
                self.suites.len() - 1
            }
        };
        let suite = &mut self.suites[idx];
        if ok {
            suite.passed += 1;
        } else {
            suite.failed += 1;
            if suite.first_failure.is_none() {
                suite.first_failure = Some(detail());
            }
        }
    }

    pub fn merge(&mut self, other: VerifyReport) {
        for s in other.suites {
            match self.suites.iter_mut().find(|t| t.id == s.id) {
                Some(t) => {
                    t.passed += s.passed;
                    t.failed += s.failed;
                    if t.first_failure.is_none() {
                        t.first_failure = s.first_failure;
                    }
                }
                None => self.suites.push(s),
            }
        }
    }

    pub fn suite(&self, id: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.id == id)
    }

    pub fn total_failed(&self) -> u64 {
        self.suites.iter().map(|s| s.failed).sum()
    }

    pub fn total_passed(&self) -> u64 {
        self.suites.iter().map(|s| s.passed).sum()
    }

    pub fn all_passed(&self) -> bool {
        self.total_failed() == 0 && !self.suites.is_empty()
    }
}

/// Every in-range identity instance with `m <= max_m`, `k <= max_k`, one
/// suite per identity.
pub fn verify_identities(max_m: usize, max_k: u64) -> VerifyReport {
    let mut report = VerifyReport::default();
    for identity in identity_grid(max_m as i64, max_k as i64) {
        let outcome = identity_check(identity);
        report.record(identity.label(), matches!(outcome, Ok(true)), || format!("{identity:?}: {outcome:?}"));
    }
    report
}

fn within<T: Scalar>(diff: &T, scale: &T, tol: &T) -> bool {
    diff.abs() <= tol.clone() * scale.clone()
}

fn scalar<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("finite constant")
}

/// Closed-form `A^k` against the iterated product, and `A^k (A^k)^-1 = I`,
/// for `0 <= k <= max_k` (`k >= 1` for the inverse).
pub fn verify_matrices<T: Scalar>(params: &SystemParams<T>, max_k: u64, tol: &T) -> VerifyReport {
    let mut report = VerifyReport::default();
    let m = params.m();
    let a = step_matrix(params);
    let mut product = Matrix::<T>::identity(m);
    for k in 0..=max_k {
        let closed = transition_matrix(params, k);
        let mut ok = true;
        for i in 0..m {
            for j in 0..m {
                let (c, p) = (closed.get(i, j), product.get(i, j));
                ok &= within(&(c.clone() - p.clone()), &p.abs(), tol);
            }
        }
        report.record("transition-closed-form", ok, || format!("m={m} h={:?} k={k}", params.h()));

        if k >= 1 {
            let inverse = transition_inverse(params, k).expect("k >= 1");
            let mut ok = true;
            for i in 0..m {
                for j in 0..m {
                    let mut sum = T::zero();
                    let mut magnitude = T::zero();
                    for v in 0..m {
                        let term = closed.get(i, v).clone() * inverse.get(v, j).clone();
                        magnitude = magnitude + term.abs();
                        sum = sum + term;
                    }
                    let delta = if i == j { T::one() } else { T::zero() };
                    let scale = if magnitude > T::one() { magnitude } else { T::one() };
                    ok &= within(&(sum - delta), &scale, tol);
                }
            }
            report.record("transition-inverse", ok, || format!("m={m} h={:?} k={k}", params.h()));
        }
        product = product.mul(&a);
    }
    report
}

struct Geometry<'a, T> {
    params: &'a SystemParams<T>,
    tol: &'a T,
    report: VerifyReport,
}

impl<T: Scalar> Geometry<'_, T> {
    fn on(&mut self, id: &'static str, plane: Hyperplane<T>, x: &State<T>, what: impl FnOnce() -> String) {
        let residual = hyperplane_residual(self.params, &plane, x);
        let scale = residual_scale(self.params, &plane);
        let ok = matches!(&residual, Ok(r) if within(r, &scale, self.tol));
        let h = self.params.h().clone();
        self.report.record(id, ok, || format!("m={} h={h:?} {}: {plane:?} residual {residual:?}", self.params.m(), what()));
    }

    /// Componentwise comparison relative to `reference`, floored at the
    /// natural scale `h^(m-i+1) r` of each coordinate.
    fn same_state(
        &mut self,
        id: &'static str,
        got: &State<T>,
        want: &State<T>,
        reference: &State<T>,
        what: impl FnOnce() -> String,
    ) {
        let m = self.params.m();
        let ok = (0..m).all(|i| {
            let base = pow(self.params.h(), m - i) * self.params.r().clone();
            let scale = if reference[i].abs() > base { reference[i].abs() } else { base };
            within(&(got[i].clone() - want[i].clone()), &scale, self.tol)
        });
        let h = self.params.h().clone();
        self.report.record(id, ok, || format!("m={m} h={h:?} {}: {got:?} vs {want:?}", what()));
    }

    fn control(&mut self, id: &'static str, x: &State<T>, want: &T, what: impl FnOnce() -> String) {
        let u = time_optimal_control(x, self.params);
        let ok = within(&(u.clone() - want.clone()), self.params.r(), self.tol);
        let h = self.params.h().clone();
        self.report.record(id, ok, || format!("m={} h={h:?} {}: u={u:?} want {want:?}", self.params.m(), what()));
    }
}

/// Geometry of the isochronous regions for one parameter set, `k <= max_k`.
pub fn verify_geometry<T: Scalar>(params: &SystemParams<T>, max_k: u64, tol: &T) -> VerifyReport {
    let mut g = Geometry { params, tol, report: VerifyReport::default() };
    let m = params.m();
    let mu = m as u64;
    let unit = params.linear_bound();
    let r = params.r().clone();
    let bang_sign = neg_one_pow::<T>(m);

    for s in [1i8, -1] {
        let s_t: T = T::from_i8(s).expect("sign");
        let fa = VertexFamily::a_with_sign(m, s);
        let fb = VertexFamily::b_with_sign(m, s);
        let a_cache: Vec<State<T>> = (0..=max_k).map(|k| vertex_coords(params, fa, k)).collect();
        let b_cache: Vec<State<T>> = (0..=max_k).map(|k| vertex_coords(params, fb, k)).collect();
        let a = |k: u64| a_cache[k as usize].clone();
        let b = |k: u64| b_cache[k as usize].clone();
        let bang = bang_sign.clone() * r.clone() * s_t.clone();

        for k in 1..=max_k {
            let ak = a(k);
            g.on("vertices-on-y-level", Hyperplane::YLevel { k, s }, &ak, || format!("a_{k} s={s}"));
            g.on("a-vertex-on-ybar-level", Hyperplane::YBarLevel { k, s }, &ak, || format!("a_{k} s={s}"));
            g.control("law-at-vertices", &ak, &bang, || format!("a_{k} s={s}"));

            let controls = defining_controls(params, fa, k).expect("k >= 1");
            let rebuilt = isochronous_initial_state(params, &controls).expect("non-empty");
            g.same_state("vertex-matches-control-sequence", &rebuilt, &ak, &ak, || format!("a_{k} s={s}"));
            let end = controls.iter().fold(ak.clone(), |x, u| step_state(params.h(), &x, u));
            g.same_state("vertex-reaches-origin", &end, &State::zeros(m), &ak, || format!("a_{k} s={s}"));

            if k >= 2 {
                let bk = b(k);
                g.on("vertices-on-y-level", Hyperplane::YLevel { k, s }, &bk, || format!("b_{k} s={s}"));
                g.control("law-at-vertices", &bk, &(-bang.clone()), || format!("b_{k} s={s}"));

                // b_k sits exactly 2 h^m r off its ybar level.
                let plane = Hyperplane::YBarLevel { k, s };
                let off = hyperplane_residual(params, &plane, &bk);
                let scale = residual_scale(params, &plane);
                let ok = matches!(&off, Ok(d) if within(&(d.abs() - (T::one() + T::one()) * unit.clone()), &scale, tol));
                g.report.record("b-vertex-off-ybar-level", ok, || format!("m={m} b_{k} s={s}: {off:?}"));

                let controls = defining_controls(params, fb, k).expect("k >= 2");
                let rebuilt = isochronous_initial_state(params, &controls).expect("non-empty");
                g.same_state("vertex-matches-control-sequence", &rebuilt, &bk, &bk, || format!("b_{k} s={s}"));
                let end = controls.iter().fold(bk.clone(), |x, u| step_state(params.h(), &x, u));
                g.same_state("vertex-reaches-origin", &end, &State::zeros(m), &bk, || format!("b_{k} s={s}"));
            }
        }

        for k in (mu - 1).max(1)..=max_k {
            g.on("a-vertices-on-z-level", Hyperplane::ZLevel { k, s }, &a(k), || format!("a_{k} s={s}"));
            g.on("a-vertices-on-z-level", Hyperplane::ZLevel { k, s }, &a(k - 1), || format!("a_{} s={s}", k - 1));
            if k >= 2 {
                g.on("b-vertices-on-z-level-bar", Hyperplane::ZLevelBar { k, s }, &b(k), || format!("b_{k} s={s}"));
                for beta in BETAS {
                    let bt: T = scalar(beta);
                    let x = a(k).combine(&bt, &b(k), &(T::one() - bt.clone()));
                    let plane = Hyperplane::ZLevelBlend { k, beta: bt.clone(), s };
                    g.on("blend-on-z-level-blend", plane, &x, || format!("k={k} beta={beta} s={s}"));
                }
            }
            if k >= 3 {
                g.on("b-vertices-on-z-level-bar", Hyperplane::ZLevelBar { k, s }, &b(k - 1), || {
                    format!("b_{} s={s}", k - 1)
                });
            }
        }

        // One step from the blend plane between levels k and k-1.
        for k in mu.max(3)..=max_k {
            let top = |bt: &T| a(k).combine(bt, &b(k), &(T::one() - bt.clone()));
            let low = |bt: &T| a(k - 1).combine(bt, &b(k - 1), &(T::one() - bt.clone()));
            for beta in BETAS {
                let bt: T = scalar(beta);
                let two_beta_minus_one = (T::one() + T::one()) * bt.clone() - T::one();
                let u = bang.clone() * two_beta_minus_one;
                for lambda in [1.0, 0.75, 0.5, 0.25] {
                    let lt: T = scalar(lambda);
                    let x = top(&bt).combine(&lt, &low(&bt), &(T::one() - lt.clone()));
                    let what = || format!("k={k} beta={beta} lambda={lambda} s={s}");
                    // lambda = 1 sits on the upper level itself, where float
                    // rounding decides the side; membership is checked inside.
                    if lambda < 1.0 {
                        let between = between_levels(params, k, s, &x);
                        g.report.record("blend-samples-between-levels", between, || format!("m={m} {}", what()));
                    }
                    g.control("law-on-blend-plane", &x, &u, what);
                    let next = step_state(params.h(), &x, &u);
                    g.on("blend-step-lands-on-z-level", Hyperplane::ZLevel { k: k - 1, s }, &next, what);
                }
            }
        }

        // The a-segment maps onto the next segment under the bang control.
        for k in mu.max(2)..=max_k {
            for beta in BETAS {
                let bt: T = scalar(beta);
                let rest = T::one() - bt.clone();
                let x = a(k).combine(&bt, &a(k - 1), &rest);
                let want = a(k - 1).combine(&bt, &a(k - 2), &rest);
                let next = step_state(params.h(), &x, &bang);
                g.same_state("segment-maps-under-bang", &next, &want, &x, || format!("k={k} beta={beta} s={s}"));
            }
        }

        // The segment parameter read off ybar before the step equals the one
        // read off y after it. Samples leave the segment along a direction
        // inside the z level, sized to move the parameter by `shift`.
        for k in (mu + 1)..=max_k {
            let hk = |j: u64| binom_weight::<T>(j, mu);
            let gap = hk(k - 1) - hk(k - 2);
            let mut d = State::zeros(m);
            d[0] = -(T::from_count(k as u128) * params.h().clone());
            d[1] = T::one();
            // ybar(d) = h (m - k), negative for every k in range.
            let d_gain = -(params.h().clone() * T::from_count((k - mu) as u128));
            let alt = neg_one_pow::<T>(m - 1);
            for lambda in [0.25, 0.5, 0.75] {
                for shift in [-0.1, 0.0, 0.1] {
                    let lt: T = scalar(lambda);
                    let t = scalar::<T>(shift) * gap.clone() * unit.clone() * s_t.clone() / d_gain.clone();
                    let x = a(k).combine(&lt, &a(k - 1), &(T::one() - lt.clone())).combine(&T::one(), &d, &t);
                    let what = || format!("k={k} lambda={lambda} shift={shift} s={s}");
                    g.on("perturbed-segment-on-z-level", Hyperplane::ZLevel { k, s }, &x, what);
                    let next = step_state(params.h(), &x, &bang);
                    let before = ybar_value(params, &x) / (unit.clone() * s_t.clone());
                    let after = y_value(params, &next) / (unit.clone() * s_t.clone());
                    let beta = (before - hk(k - 2) - alt.clone()) / gap.clone();
                    let beta_next = (after - hk(k - 2)) / gap.clone();
                    let scale = if hk(k) > T::one() { hk(k) } else { T::one() };
                    let expected = lt.clone() + scalar::<T>(shift);
                    let ok = within(&(beta.clone() - beta_next.clone()), &scale, tol)
                        && within(&(beta.clone() - expected), &scale, tol)
                        && between_levels(params, k, s, &x)
                        && between_levels(params, k - 1, s, &next);
                    g.report.record("segment-parameter-preserved", ok, || {
                        format!("m={m} {}: {beta:?} vs {beta_next:?}", what())
                    });
                }
            }
        }
    }

    // Nested linear-region subspaces hold the low-index vertices.
    for nu in 0..m {
        let top = (m - 1 - nu) as u64;
        for family in VertexFamily::ALL {
            let first = if family.is_a() { 0 } else { 2 };
            for k in first..=top {
                let x = vertex_coords(params, family, k);
                g.on("nested-subspaces", Hyperplane::Nested { nu }, &x, || format!("nu={nu} {family:?} k={k}"));
            }
        }
    }

    g.report
}

/// Deadbeat regulation from every `a` vertex with `k <= max_k`: exactly `k`
/// steps to the origin, bounded controls, final state within
/// `tol h^m r` componentwise.
pub fn verify_regulation<T: Scalar>(params: &SystemParams<T>, max_k: u64, tol: &T) -> VerifyReport {
    let mut report = VerifyReport::default();
    let m = params.m();
    let bound = tol.clone() * params.linear_bound();
    for family in [VertexFamily::APlus, VertexFamily::AMinus] {
        for k in 1..=max_k {
            let mut x = vertex_coords(params, family, k);
            let mut bounded = true;
            let mut early = false;
            for step in 0..k {
                let u = time_optimal_control(&x, params);
                bounded &= u.abs() <= params.r().clone();
                x = step_state(params.h(), &x, &u);
                if step + 1 < k {
                    early |= x.iter().all(|c| c.is_zero());
                }
            }
            let landed = x.iter().all(|c| c.abs() <= bound);
            report.record("deadbeat-regulation", bounded && landed && !early, || {
                format!("m={m} h={:?} {family:?} k={k}: final {x:?} bounded={bounded} early={early}", params.h())
            });
        }
    }
    report
}

/// Distance in units in the last place between two finite doubles.
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    fn ordered(x: f64) -> i64 {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    }
    ordered(a).abs_diff(ordered(b))
}

/// Second-order closed form against the general law on `samples` random
/// states per step size, covering both regimes.
pub fn verify_second_order_equivalence(samples: usize, seed: u64) -> VerifyReport {
    let mut report = VerifyReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let cases = [(1.0, 1.0), (0.01, 1.0), (5e-4, 1.0), (0.1, 7.5)];
    for (h, r) in cases {
        let params = SystemParams::new(2, h, r).expect("valid");
        for _ in 0..samples.div_ceil(cases.len()) {
            // Log-uniform radius from inside the linear band out to ~1e6 levels.
            let reach = 10f64.powf(-1.0 + 7.0 * unit());
            let x1 = (2.0 * unit() - 1.0) * reach * h * h * r;
            let x2 = (2.0 * unit() - 1.0) * reach.sqrt() * 2.0 * h * r;
            let general = time_optimal_control(&State::new(vec![x1, x2]), &params);
            let closed = second_order_control(x1, x2, r, h);
            let ulps = ulp_distance(general, closed);
            report.record("second-order-equivalence", ulps <= 4, || {
                format!("h={h} r={r} x=({x1:e}, {x2:e}): {general:e} vs {closed:e} ({ulps} ulps)")
            });
        }
    }
    report
}

fn determinant(mut rows: Vec<Vec<BigRational>>) -> BigRational {
    let n = rows.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !rows[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            rows.swap(pivot, col);
            det = -det;
        }
        let p = rows[col][col].clone();
        det *= p.clone();
        let (upper, lower) = rows.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower.iter_mut() {
            let factor = row[col].clone() / p.clone();
            for (x, q) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= q.clone() * factor.clone();
            }
        }
    }
    det
}

/// The Vandermonde matrix on nodes `1..=m-1` has determinant
/// `prod_{j<i} (i - j)`, which is non-zero, for every `2 <= m <= max_m`.
pub fn verify_vandermonde(max_m: usize) -> VerifyReport {
    let mut report = VerifyReport::default();
    for m in 2..=max_m {
        let n = m - 1;
        let rows: Vec<Vec<BigRational>> = (0..n)
            .map(|p| (1..=n).map(|node| pow(&ratio(node as i64, 1), p)).collect())
            .collect();
        let det = determinant(rows);
        let product = (1..=n)
            .flat_map(|i| (1..i).map(move |j| (i - j) as i64))
            .fold(BigRational::one(), |acc, d| acc * ratio(d, 1));
        report.record("vandermonde-nonsingular", det == product && !det.is_zero(), || {
            format!("m={m}: det {det} vs product {product}")
        });
    }
    report
}

/// Step sizes used by the float geometry runs.
pub const FLOAT_STEPS: [f64; 3] = [1.0, 0.1, 5e-4];

/// Exact rational step sizes `1`, `1/10` and `1/2000`.
pub fn exact_steps() -> Vec<BigRational> {
    vec![ratio(1, 1), ratio(1, 10), ratio(1, 2000)]
}

/// Matrix suites: exact at `h = 1`, `1e-12` relative in floats at `h = 5e-4`.
pub fn matrix_suites(max_m: usize, max_k: u64) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    for m in 2..=max_m {
        let exact = SystemParams::new(m, ratio(1, 1), ratio(1, 1))?;
        report.merge(verify_matrices(&exact, max_k, &BigRational::zero()));
        let float = SystemParams::new(m, 5e-4, 1.0)?;
        report.merge(verify_matrices(&float, max_k, &MATRIX_TOL));
    }
    Ok(report)
}

/// Geometry suites for `2 <= m <= max_m`: floats at [`FLOAT_STEPS`] with
/// tolerance [`GEOMETRY_TOL`], and exact rationals at [`exact_steps`] with
/// zero tolerance.
pub fn geometry_suites(max_m: usize, max_k: u64) -> Result<VerifyReport> {
    let orders: Vec<usize> = (2..=max_m).collect();
    let parts = parallel_over(&orders, |&m| -> Result<VerifyReport> {
        let mut report = VerifyReport::default();
        for h in FLOAT_STEPS {
            report.merge(verify_geometry(&SystemParams::new(m, h, 1.0)?, max_k, &GEOMETRY_TOL));
        }
        for h in exact_steps() {
            report.merge(verify_geometry(&SystemParams::new(m, h, ratio(1, 1))?, max_k, &BigRational::zero()));
        }
        Ok(report)
    });
    collect_reports(parts)
}

/// Deadbeat regulation in exact arithmetic at `h = 1` and `h = 1/2000`, `r = 1`.
pub fn regulation_suites(max_m: usize, max_k: u64) -> Result<VerifyReport> {
    let orders: Vec<usize> = (2..=max_m).collect();
    let parts = parallel_over(&orders, |&m| -> Result<VerifyReport> {
        let mut report = VerifyReport::default();
        for h in [ratio(1, 1), ratio(1, 2000)] {
            report.merge(verify_regulation(&SystemParams::new(m, h, ratio(1, 1))?, max_k, &BigRational::zero()));
        }
        Ok(report)
    });
    collect_reports(parts)
}

fn parallel_over<I: Sync, R: Send>(items: &[I], f: impl Fn(&I) -> R + Sync) -> Vec<R> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = items.iter().map(|item| scope.spawn(|| f(item))).collect();
        handles.into_iter().map(|h| h.join().expect("verification thread panicked")).collect()
    })
}

fn collect_reports(parts: Vec<Result<VerifyReport>>) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    for part in parts {
        report.merge(part?);
    }
    Ok(report)
}

/// Runs every suite for `2 <= m <= max_m`, `k <= max_k`.
pub fn verify_all(max_m: usize, max_k: u64) -> Result<VerifyReport> {
    if !(2..=8).contains(&max_m) {
        return Err(Error::InvalidParams(format!("max_m must be in 2..=8, got {max_m}")));
    }
    if !(1..=50).contains(&max_k) {
        return Err(Error::InvalidParams(format!("max_k must be in 1..=50, got {max_k}")));
    }
    let mut report = verify_identities(max_m, max_k);
    report.merge(matrix_suites(max_m, max_k)?);
    report.merge(geometry_suites(max_m, max_k)?);
    report.merge(regulation_suites(max_m, max_k)?);
    report.merge(verify_second_order_equivalence(20_000, 0x5EED));
    report.merge(verify_vandermonde(max_m));
    Ok(report)
}
