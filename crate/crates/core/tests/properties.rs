use bernstein_clutter::bernstein::BernsteinModel;
use bernstein_clutter::estimators::{empirical_pmf, ks_distance, total_variation};
use bernstein_clutter::laws::{texture_cov, CountLaw};
use bernstein_clutter::mixing::MixingLaw;
use bernstein_clutter::texture::{simulate_with, window_sums, SimConfig, SimMode, TexturePath};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config(gamma: f64, window: f64, mode: SimMode) -> SimConfig {
    SimConfig {
        gamma,
        window,
        kappa: 150.0,
        duration: 200.0,
        dt: 0.1,
        seed: 0,
        mode,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn simulated_paths_are_nonnegative_step_functions(
        seed in any::<u64>(),
        gamma in 0.05_f64..4.0,
        window in 0.5_f64..10.0,
        infinite in any::<bool>(),
    ) {
        let (model, mode) = if infinite {
            (BernsteinModel::infinite_builtin(), SimMode::InfiniteApprox)
        } else {
            (BernsteinModel::finite_builtin(), SimMode::FiniteExact)
        };
        let cfg = config(gamma, window, mode);
        let path = simulate_with(&model, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(path.values().iter().all(|&v| v >= 0.0));
        prop_assert!(path.change_times().windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(path.change_times().len(), path.values().len());
    }

    #[test]
    fn window_sums_match_direct_sums(
        arrivals in prop::collection::vec(-10.0_f64..100.0, 0..200),
        window in 0.1_f64..20.0,
    ) {
        let mut arrivals = arrivals;
        arrivals.sort_by(f64::total_cmp);
        arrivals.dedup();
        let marks: Vec<f64> = (0..arrivals.len()).map(|i| 1.0 + (i % 7) as f64).collect();
        let times: Vec<f64> = (0..=90).map(|i| i as f64).collect();
        let sums = window_sums(&arrivals, &marks, window, &times).unwrap();
        for (t, s) in times.iter().zip(&sums) {
            let direct: f64 = arrivals
                .iter()
                .zip(&marks)
                // Arrival a is active on [a - T, a).
                .filter(|(a, _)| **a - window <= *t && *t < **a)
                .map(|(_, m)| m)
                .sum();
            prop_assert!((s - direct).abs() <= 1e-9 * direct.max(1.0));
        }
    }

    #[test]
    fn event_csv_round_trips(values in prop::collection::vec(0.0_f64..1e3, 1..50)) {
        let times: Vec<f64> = (0..values.len()).map(|i| i as f64 * 0.5).collect();
        let path = TexturePath::from_parts(times.clone(), values.clone(), 1.0, 100.0).unwrap();
        let csv = path.to_event_csv();
        let parsed: Vec<(f64, f64)> = csv
            .lines()
            .skip(1)
            .map(|l| {
                let (a, b) = l.split_once(',').unwrap();
                (a.parse().unwrap(), b.parse().unwrap())
            })
            .collect();
        prop_assert_eq!(parsed.len(), values.len());
        for ((t, v), (pt, pv)) in times.iter().zip(&values).zip(parsed) {
            prop_assert_eq!(*t, pt);
            prop_assert_eq!(*v, pv);
        }
    }

    #[test]
    fn texture_covariance_is_a_continuous_triangle(
        nu in 0.1_f64..100.0,
        window in 0.1_f64..50.0,
        h2 in -5.0_f64..-0.01,
        s in 0.0_f64..1.0,
    ) {
        let var = texture_cov(nu, window, h2, 0.0);
        prop_assert!((var + h2 / nu).abs() <= 1e-12 * var);
        let lag = s * window;
        let c = texture_cov(nu, window, h2, lag);
        prop_assert!((0.0..=var).contains(&c));
        prop_assert_eq!(c, texture_cov(nu, window, h2, -lag));
        prop_assert!(texture_cov(nu, window, h2, window * (1.0 - 1e-9)) < 1e-8 * var);
        prop_assert_eq!(texture_cov(nu, window, h2, window), 0.0);
    }

    #[test]
    fn distances_lie_in_unit_interval(
        samples in prop::collection::vec(0u64..40, 1..300),
        p in 0.05_f64..0.95,
    ) {
        let geometric = |n: u64| if n == 0 { 0.0 } else { p * (1.0 - p).powi(n as i32 - 1) };
        let tv = total_variation(&empirical_pmf(samples.iter().copied()), geometric);
        prop_assert!((0.0..=1.0).contains(&tv));
        let xs: Vec<f64> = samples.iter().map(|&n| n as f64).collect();
        let ks = ks_distance(&xs, |x| -(-x / 10.0).exp_m1().max(-1.0));
        prop_assert!((0.0..=1.0).contains(&ks));
    }

    #[test]
    fn builtin_mixing_laws_are_normalized(kappa in 0.01_f64..500.0, u in 0.01_f64..1.0) {
        for model in [BernsteinModel::finite_builtin(), BernsteinModel::infinite_builtin()] {
            let law = MixingLaw::new(&model, kappa).unwrap();
            let table = law.table();
            prop_assert!((table.mass() - 1.0).abs() < 1e-9);
            prop_assert_eq!(table.pmf[0], 0.0);
            let series: f64 = table.pmf.iter().enumerate().map(|(n, p)| p * u.powi(n as i32)).sum();
            prop_assert!((series - law.pgf(u).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn count_laws_are_normalized(nu in 0.05_f64..50.0, p in 0.0_f64..0.99, nbar in 0.1_f64..200.0) {
        for law in [CountLaw::polya_aeppli(nu, p).unwrap(), CountLaw::negative_binomial(nu, nbar).unwrap()] {
            let table = law.table();
            prop_assert!((table.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let mean: f64 = table.iter().enumerate().map(|(n, q)| n as f64 * q).sum();
            prop_assert!((mean - law.mean()).abs() < 1e-6 * law.mean().max(1.0));
        }
    }
}
