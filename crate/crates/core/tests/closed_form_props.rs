use csit_dmt::closed_form::{
    baseline_no_csit, compute_dmt_curve, dk_eval, eval_dmt, full_gain_diversity, set_a, set_b, tau,
};
use csit_dmt::{CaseTag, ChannelConfig};
use proptest::prelude::*;

fn cfg(m: usize, n: usize, alpha: f64) -> ChannelConfig {
    ChannelConfig::new(m, n, alpha).unwrap()
}

/// `(M, N, α)` with `M ≥ N`, `N ≤ 4`, `M ≤ 6`.
fn config() -> impl Strategy<Value = ChannelConfig> {
    (1usize..=4, 0usize..=2, 0.0f64..1.5).prop_map(|(n, extra, alpha)| cfg(n + extra, n, alpha))
}

fn config_and_gain() -> impl Strategy<Value = (ChannelConfig, f64)> {
    config().prop_flat_map(|c| {
        let n = c.n_rx as f64;
        (Just(c), 0.0..=n)
    })
}

/// Left edges of the per-subset domains, where the subset curves are
/// defined as `+∞` but the DMT takes a finite closed-limit value.
fn at_left_edge(c: &ChannelConfig, r: f64) -> bool {
    set_a(c).iter().any(|&k| ((c.n_rx - k) as f64 * tau(c, k).unwrap() - r).abs() < 1e-12)
}

/// Zheng–Tse corner curve, written out independently of the crate.
fn zheng_tse(m: usize, n: usize, r: f64) -> f64 {
    let j = (r.floor() as usize).min(n - 1);
    let d = |k: usize| ((m - k) * (n - k)) as f64;
    d(j) + (r - j as f64) * (d(j + 1) - d(j))
}

#[test]
fn alpha_zero_coincides_with_corner_curve() {
    for n in 1..=5 {
        for m in n..=5 {
            let curve = compute_dmt_curve(&cfg(m, n, 0.0));
            let base = baseline_no_csit(&cfg(m, n, 0.0));
            for i in 0..=100 * n {
                let r = i as f64 / 100.0;
                let d = eval_dmt(&curve, r).unwrap();
                assert!((d - zheng_tse(m, n, r)).abs() < 1e-12, "({m},{n}) r={r}: {d}");
                assert!((d - eval_dmt(&base, r).unwrap()).abs() < 1e-12);
            }
            assert!(curve.jumps().iter().all(|j| (j.left_limit - j.value).abs() < 1e-12));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lower_subset_has_lower_diversity((c, r) in config_and_gain()) {
        let a = set_a(&c);
        for (i, &k1) in a.iter().enumerate() {
            for &k2 in &a[i + 1..] {
                let (d1, d2) = (dk_eval(&c, k1, r).unwrap(), dk_eval(&c, k2, r).unwrap());
                if d1.is_finite() && d2.is_finite() {
                    prop_assert!(d1 < d2, "k1={k1} k2={k2} r={r}: {d1} !< {d2}");
                }
            }
        }
    }

    #[test]
    fn segments_are_straight(c in config()) {
        let curve = compute_dmt_curve(&c);
        for s in &curve.segments {
            let mid = 0.5 * (s.r_left + s.r_right);
            let chord = 0.5 * (s.d_left + s.d_right);
            prop_assert!((eval_dmt(&curve, mid).unwrap() - chord).abs() <= 1e-12 * chord.max(1.0));
            prop_assert!((dk_eval(&c, s.k, mid).unwrap() - chord).abs() <= 1e-12 * chord.max(1.0));
        }
    }

    #[test]
    fn more_csit_never_hurts(n in 1usize..=4, extra in 0usize..=2, r_frac in 0.0f64..=1.0) {
        let m = n + extra;
        let r = r_frac * n as f64;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=30 {
            let d = eval_dmt(&compute_dmt_curve(&cfg(m, n, i as f64 * 0.05)), r).unwrap();
            prop_assert!(d >= prev - 1e-9, "alpha={} r={r}: {d} < {prev}", i as f64 * 0.05);
            prev = d;
        }
    }

    #[test]
    fn curve_is_lower_envelope_of_subset_curves((c, r) in config_and_gain()) {
        prop_assume!(!at_left_edge(&c, r));
        let curve = compute_dmt_curve(&c);
        let envelope = curve.b_set.iter().map(|&k| dk_eval(&c, k, r).unwrap()).fold(f64::INFINITY, f64::min);
        let d = eval_dmt(&curve, r).unwrap();
        prop_assert!((d - envelope).abs() <= 1e-9 * d.max(1.0), "r={r}: {d} vs {envelope}");
    }

    #[test]
    fn full_gain_matches_branch_formula(c in config()) {
        let (m, n) = (c.m_tx as f64, c.n_rx as f64);
        // Smallest k whose error-limited region is non-empty.
        let p = (1..=c.n_rx)
            .find(|&k| k == c.n_rx || c.alpha * (((c.m_tx - c.n_rx + k) * (c.n_rx - k)) as f64) < 1.0)
            .unwrap() as f64;
        let expected = p * c.alpha * (m - n + p) * (m * n + (p - n) * (n - p + 1.0)) - p * p + p;
        let d_n = eval_dmt(&compute_dmt_curve(&c), n).unwrap();
        prop_assert!((d_n - expected).abs() <= 1e-9 * expected.max(1.0));
        prop_assert!((full_gain_diversity(&c) - expected).abs() <= 1e-9 * expected.max(1.0));
        if c.n_rx == 1 || c.alpha * (((c.n_rx - 1) * (c.m_tx - c.n_rx + 1)) as f64) < 1.0 {
            let simple = c.alpha * n * (m - n + 1.0).powi(2);
            prop_assert!((d_n - simple).abs() <= 1e-9 * simple.max(1.0));
        }
    }

    #[test]
    fn jumps_only_go_down(c in config()) {
        for j in compute_dmt_curve(&c).jumps() {
            prop_assert!(j.value <= j.left_limit + 1e-12, "{j:?}");
        }
    }

    #[test]
    fn zero_gain_value_is_full_diversity(c in config()) {
        let mn = (c.m_tx * c.n_rx) as f64;
        let curve = compute_dmt_curve(&c);
        let d0 = eval_dmt(&curve, 0.0).unwrap();
        prop_assert!((d0 - mn * (1.0 + mn * c.alpha)).abs() <= 1e-9 * d0);
        let (b, _) = set_b(&c);
        prop_assert_eq!(curve.case_tag == CaseTag::SingleLine, b.len() == 1);
    }
}
