use csit_dmt::channel::{
    check_lemma1, exponent_order, sample_channel, sample_channel_with, wishart_log_density_unnormalized,
    wishart_log_norm_const,
};
use csit_dmt::rng::{derive_seed, seeded_rng};
use csit_dmt::ChannelConfig;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::Exp1;

/// Integrates the ordered-eigenvalue density by importance sampling with
/// i.i.d. unit exponentials: the unordered integral equals the mean of
/// `∏ λ^(M-N) ∏ (λ_i - λ_j)²`, and the ordered one is that divided by `N!`.
fn wishart_mass(m: usize, n: usize, samples: usize, seed: u64) -> f64 {
    let mut rng = seeded_rng(seed);
    let mut acc = 0.0;
    let mut lam = vec![0.0; n];
    for _ in 0..samples {
        for x in &mut lam {
            *x = rng.sample(Exp1);
        }
        lam.sort_by(f64::total_cmp);
        let sum: f64 = lam.iter().sum();
        acc += (wishart_log_density_unnormalized(m, &lam) + sum).exp();
    }
    let n_fact: f64 = (1..=n).map(|i| i as f64).product();
    acc / samples as f64 / n_fact / wishart_log_norm_const(m, n).unwrap().exp()
}

#[test]
fn wishart_density_integrates_to_one() {
    for (m, n) in [(1, 1), (2, 1), (2, 2), (3, 2), (4, 2), (3, 3)] {
        let mass = wishart_mass(m, n, 1_000_000, 0xC0FFEE + (m * 10 + n) as u64);
        assert!((mass - 1.0).abs() < 0.02, "({m},{n}): mass {mass}");
    }
}

#[test]
fn error_exponents_sit_above_alpha() {
    let cfg = ChannelConfig::new(2, 2, 0.5).unwrap();
    let rho = 1e4;
    let draws = 10_000;
    let hits = (0..draws)
        .filter(|&i| {
            let t = sample_channel(&cfg, rho, derive_seed(7, 0, i)).unwrap().eigen_triple().unwrap();
            exponent_order(t.c[0], rho) >= cfg.alpha - 0.15
        })
        .count();
    assert!(hits as f64 >= 0.95 * draws as f64, "{hits} of {draws}");
}

#[test]
fn estimate_eigenvalues_bounded_by_channel_and_error() {
    let mut checked = 0;
    for (m, n) in [(1, 1), (2, 2), (3, 2), (3, 3)] {
        for alpha in [0.0, 0.5, 1.0] {
            let cfg = ChannelConfig::new(m, n, alpha).unwrap();
            for (s, rho) in [10.0, 1e2, 1e3].into_iter().enumerate() {
                for i in 0..1000 {
                    let t = sample_channel(&cfg, rho, derive_seed(11, s as u64, i)).unwrap().eigen_triple().unwrap();
                    assert!(check_lemma1(&t).unwrap(), "({m},{n},{alpha}) rho={rho}: {t:?}");
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 36_000);
}

#[test]
fn draw_sequence_is_reproducible() {
    let cfg = ChannelConfig::new(3, 2, 0.5).unwrap();
    let run = |seed| {
        let mut rng = seeded_rng(seed);
        (0..50).map(|_| sample_channel_with(&cfg, 100.0, &mut rng).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(run(99), run(99));
    assert_ne!(run(99), run(100));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lemma1_holds_for_any_draw(
        n in 1usize..=4,
        extra in 0usize..=2,
        alpha in 0.0f64..2.0,
        log_rho in 0.0f64..6.0,
        seed in any::<u64>(),
    ) {
        let cfg = ChannelConfig::new(n + extra, n, alpha).unwrap();
        let t = sample_channel(&cfg, 10f64.powf(log_rho), seed).unwrap().eigen_triple().unwrap();
        prop_assert!(check_lemma1(&t).unwrap());
        prop_assert!(t.a.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(t.b.iter().chain(&t.a).chain(&t.c).all(|&x| x >= 0.0));
    }
}
