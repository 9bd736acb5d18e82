use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;
use toc_core::combinatorics::falling_factorial;
use toc_core::geometry::{
    isochronous_initial_state, step_state, vertex_coords, VertexFamily,
};
use toc_core::kernel::{
    decide_region, solve_k, time_optimal_control, y_value, Regime, State, SystemParams,
};
use toc_core::scalar::ratio;
use toc_core::Scalar;

fn state_strategy(m: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    // Mantissa in [-1, 1] and a decade exponent per coordinate.
    prop::collection::vec((-1.0f64..1.0, -2.0f64..8.0), m)
}

fn scaled_state(params: &SystemParams<f64>, raw: &[(f64, f64)]) -> State<f64> {
    let m = params.m();
    State::new(
        raw.iter()
            .enumerate()
            .map(|(i, &(c, e))| c * 10f64.powf(e) * params.h().powi((m - i) as i32) * params.r())
            .collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn control_is_bounded(
        m in 2usize..=6,
        h in prop::sample::select(vec![1.0, 0.1, 0.01, 5e-4]),
        r in 0.1f64..100.0,
        raw in state_strategy(6),
    ) {
        let params = SystemParams::new(m, h, r).unwrap();
        let x = scaled_state(&params, &raw[..m]);
        let u = time_optimal_control(&x, &params);
        prop_assert!(u.is_finite());
        prop_assert!(u.abs() <= r, "u = {u}, r = {r}");
    }

    #[test]
    fn solve_k_brackets_the_level(
        m in 2usize..=6,
        h in prop::sample::select(vec![1.0, 0.01, 5e-4]),
        r in 0.5f64..20.0,
        mantissa in 1.0f64..10.0,
        decade in 0i32..12,
        negative in any::<bool>(),
    ) {
        let params = SystemParams::new(m, h, r).unwrap();
        let unit = params.linear_bound();
        let y = mantissa * 10f64.powi(decade) * unit * if negative { -1.0 } else { 1.0 };
        prop_assume!(y.abs() > unit);
        let k = solve_k(&params, &y).unwrap();
        prop_assert!(k >= m as u64);
        let factorial: f64 = (1..=m).map(|i| i as f64).product();
        let target = factorial * y.abs() / unit;
        let upper = falling_factorial(&(k as f64), m);
        prop_assert!(target <= upper + f64::bracket_slack(&upper));
        if k > m as u64 {
            let lower = falling_factorial(&((k - 1) as f64), m);
            prop_assert!(target > lower + f64::bracket_slack(&lower));
        }
    }

    #[test]
    fn exact_solve_k_is_the_smallest_covering_index(
        m in 2usize..=5,
        num in 2i64..2_000_000,
        den in 1i64..1000,
        negative in any::<bool>(),
    ) {
        let params = SystemParams::new(m, ratio(1, 2000), ratio(3, 1)).unwrap();
        let unit = params.linear_bound();
        let sign = if negative { ratio(-1, 1) } else { ratio(1, 1) };
        let y = ratio(num, den) * unit.clone() * sign;
        prop_assume!(y.abs() > unit);
        let k = solve_k(&params, &y).unwrap();
        let factorial: BigRational = (1..=m).fold(ratio(1, 1), |acc, i| acc * ratio(i as i64, 1));
        let target = factorial * y.abs() / unit;
        prop_assert!(target <= falling_factorial(&ratio(k as i64, 1), m));
        if k > m as u64 {
            prop_assert!(target > falling_factorial(&ratio(k as i64 - 1, 1), m));
        }
    }

    #[test]
    fn isochronous_state_returns_to_origin_exactly(
        m in 2usize..=5,
        controls in prop::collection::vec(-4i64..=4, 1..12),
    ) {
        let params = SystemParams::new(m, ratio(1, 20), ratio(4, 1)).unwrap();
        let us: Vec<BigRational> = controls.iter().map(|&u| ratio(u, 1)).collect();
        let x0 = isochronous_initial_state(&params, &us).unwrap();
        let end = us.iter().fold(x0, |x, u| step_state(params.h(), &x, u));
        prop_assert_eq!(end, State::zeros(m));
    }
}

#[test]
fn law_jumps_across_the_linear_band_edge() {
    // Off the vertex lines the two branches disagree at |y| = h^m r: inside,
    // a = (y + h x2) / h^3; just outside the index is m + 1, giving
    // a = -r/3 + z(4) / (3 h^3). With x2 = -8/7 h^2 r, x3 = 0 that is
    // u = r/7 on the edge against u -> 16r/21 from outside.
    let params = SystemParams::new(3, ratio(1, 10), ratio(1, 1)).unwrap();
    let h = params.h().clone();
    let unit = params.linear_bound();
    let x2 = ratio(-8, 7) * h.clone() * h.clone();
    let edge = State::new(vec![unit.clone() - ratio(2, 1) * h * x2.clone(), x2, ratio(0, 1)]);
    assert_eq!(y_value(&params, &edge), unit);
    assert_eq!(time_optimal_control(&edge, &params), ratio(1, 7));

    let eps = ratio(1, 1_000_000_000);
    let mut outside = edge.clone();
    outside[0] = outside[0].clone() + eps.clone() * unit;
    assert_eq!(decide_region(&params, &outside).regime, Regime::Nonlinear { k: 4 });
    let u = time_optimal_control(&outside, &params);
    assert!((u - ratio(16, 21)).abs() <= eps);
}

#[test]
fn control_at_vertices_is_the_bang_value() {
    for m in 2..=6 {
        for h in [1.0, 0.01, 5e-4] {
            let params = SystemParams::new(m, h, 1.0).unwrap();
            for family in [VertexFamily::APlus, VertexFamily::AMinus] {
                let s = family.s(m) as f64;
                let want = if m % 2 == 0 { s } else { -s };
                for k in 1..=20 {
                    let x = vertex_coords(&params, family, k);
                    let u = time_optimal_control(&x, &params);
                    assert!((u - want).abs() <= 1e-9, "m={m} h={h} {family:?} k={k}: {u}");
                }
            }
        }
    }
}

#[test]
fn vertex_regime_matches_its_index() {
    let params = SystemParams::new(4, ratio(1, 2000), ratio(1, 1)).unwrap();
    for k in 5..=40 {
        let x = vertex_coords(&params, VertexFamily::APlus, k);
        assert_eq!(decide_region(&params, &x).regime, Regime::Nonlinear { k });
    }
}
