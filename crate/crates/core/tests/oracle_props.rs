use csit_dmt::closed_form::{compute_dmt_curve, dk_eval, eval_dmt, set_a, tau};
use csit_dmt::oracle::{default_v_max, grid_oracle, outage_lhs, subset_oracle, tolerance};
use csit_dmt::ChannelConfig;
use proptest::prelude::*;

const STEP: f64 = 0.02;

fn cfg(m: usize, n: usize, alpha: f64) -> ChannelConfig {
    ChannelConfig::new(m, n, alpha).unwrap()
}

fn small_config() -> impl Strategy<Value = ChannelConfig> {
    (1usize..=2, 0usize..=2, 0.0f64..1.0).prop_map(|(n, extra, alpha)| cfg(n + extra, n, alpha))
}

fn positive_gain(c: ChannelConfig) -> impl Strategy<Value = (ChannelConfig, f64)> {
    let n = c.n_rx as f64;
    (Just(c), 0.01f64..=n)
}

fn at_left_edge(c: &ChannelConfig, r: f64) -> bool {
    set_a(c).iter().any(|&k| ((c.n_rx - k) as f64 * tau(c, k).unwrap() - r).abs() < 1e-12)
}

fn same(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grid_search_matches_closed_form((c, r) in small_config().prop_flat_map(positive_gain)) {
        let closed = eval_dmt(&compute_dmt_curve(&c), r).unwrap();
        let oracle = grid_oracle(&c, r, default_v_max(&c), STEP).unwrap();
        prop_assert!(same(oracle.d_min, closed, tolerance(&c, STEP)), "r={r}: oracle {} closed {closed}", oracle.d_min);
        if oracle.d_min.is_finite() {
            prop_assert!(outage_lhs(&c, &oracle.argmin_v) <= r + 1e-9, "minimiser outside the outage set");
        }
    }

    #[test]
    fn subset_minimum_matches_grid_search((c, r) in small_config().prop_flat_map(positive_gain)) {
        prop_assume!(!at_left_edge(&c, r));
        let subset_min = (1..=c.n_rx).map(|k| subset_oracle(&c, k, r).unwrap()).fold(f64::INFINITY, f64::min);
        let grid = grid_oracle(&c, r, default_v_max(&c), STEP).unwrap().d_min;
        prop_assert!(same(subset_min, grid, tolerance(&c, STEP)), "r={r}: subsets {subset_min} grid {grid}");
    }

    #[test]
    fn subset_oracle_reproduces_subset_curves(
        (c, r) in (1usize..=4, 0usize..=2, 0.0f64..1.5)
            .prop_map(|(n, e, a)| cfg(n + e, n, a))
            .prop_flat_map(positive_gain)
    ) {
        prop_assume!(!at_left_edge(&c, r));
        for k in set_a(&c) {
            let (s, d) = (subset_oracle(&c, k, r).unwrap(), dk_eval(&c, k, r).unwrap());
            prop_assert!(same(s, d, 1e-9 * d.abs().max(1.0)), "k={k} r={r}: subset {s} closed {d}");
        }
    }
}

#[test]
fn three_by_three_jump_region() {
    let c = cfg(3, 3, 1.0 / 3.0);
    let closed = eval_dmt(&compute_dmt_curve(&c), 2.2).unwrap();
    let oracle = grid_oracle(&c, 2.2, default_v_max(&c), STEP).unwrap().d_min;
    assert!((oracle - closed).abs() <= tolerance(&c, STEP), "{oracle} vs {closed}");
}
