mod support;

use moblag_core::leadlag::{
    estimate_lag, hy_covariance, normalize_cumdeaths, normalize_mobility_reduction, ContrastMode, IrregularSeries,
    LagConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_times(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut t = rng.random_range(0.0..3.0);
    (0..n)
        .map(|_| {
            // occasional integer steps make shared endpoints likely
            t += if rng.random::<f64>() < 0.3 { 1.0 } else { rng.random_range(0.05..2.0) };
            t
        })
        .collect()
}

fn random_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) * 10.0).collect()
}

#[test]
fn hy_sweep_matches_naive_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let (n, m) = (rng.random_range(2..=50), rng.random_range(2..=50));
        let (t, s) = (random_times(&mut rng, n), random_times(&mut rng, m));
        let (x, y) = (random_values(&mut rng, n), random_values(&mut rng, m));
        let got = hy_covariance(
            &IrregularSeries::new(t.clone(), x.clone()).unwrap(),
            &IrregularSeries::new(s.clone(), y.clone()).unwrap(),
        )
        .unwrap();
        let want = support::hy_naive(&t, &x, &s, &y);
        assert!(support::close(got, want, 1e-12, 1e-300), "{got} vs {want}");

        let swapped = hy_covariance(
            &IrregularSeries::new(s.clone(), y.clone()).unwrap(),
            &IrregularSeries::new(t.clone(), x.clone()).unwrap(),
        )
        .unwrap();
        assert!(support::close(got, swapped, 1e-12, 1e-12));

        let c = 3.5;
        let scaled = hy_covariance(
            &IrregularSeries::new(t.clone(), x.clone()).unwrap(),
            &IrregularSeries::new(s.clone(), y.iter().map(|v| v * c).collect()).unwrap(),
        )
        .unwrap();
        assert!(support::close(scaled, c * got, 1e-12, 1e-12));
    }
}

#[test]
fn synchronous_grid_reduces_to_increment_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let n = rng.random_range(2..=50);
        let t = random_times(&mut rng, n);
        let (x, y) = (random_values(&mut rng, n), random_values(&mut rng, n));
        let mut expected = 0.0;
        for i in 1..n {
            expected += (x[i] - x[i - 1]) * (y[i] - y[i - 1]);
        }
        let got = hy_covariance(&IrregularSeries::new(t.clone(), x).unwrap(), &IrregularSeries::new(t, y).unwrap()).unwrap();
        assert_eq!(got, expected);
    }
}

fn random_walk(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = 0.0;
    (0..n)
        .map(|_| {
            v += rng.sample::<f64, _>(StandardNormal);
            v
        })
        .collect()
}

fn normalized(values: Vec<f64>, t0: f64) -> moblag_core::leadlag::NormalizedSeries {
    normalize_cumdeaths(&IrregularSeries::regular(t0, values).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shifted_copy_recovers_its_lag(seed in 0u64..10_000, lag in -39i64..40, hy in any::<bool>()) {
        let n = (3 * lag.unsigned_abs() as usize).max(60);
        let x = random_walk(seed, n);
        let cfg = LagConfig {
            mode: if hy { ContrastMode::Hy } else { ContrastMode::Pearson },
            ..LagConfig::default()
        };
        let lead = normalized(x.clone(), 0.0);
        let lagged = normalized(x, lag as f64);
        let est = estimate_lag(&lead, &lagged, &cfg).unwrap();
        prop_assert_eq!(est.theta_hat, lag as f64);
        let back = estimate_lag(&lagged, &lead, &cfg).unwrap();
        prop_assert_eq!(back.theta_hat, -(lag as f64));
    }
}

#[test]
fn noise_moves_the_estimate_by_at_most_two_days() {
    let n = 120;
    let base = support::ramp(n, 45, 5, 1.0);
    let mut within = 0;
    for trial in 0..200u64 {
        let lag = [7usize, 14, 18, 21][trial as usize % 4];
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
        let mut noisy = |v: Vec<f64>| -> Vec<f64> {
            v.into_iter().map(|x| x + 0.05 * rng.sample::<f64, _>(StandardNormal)).collect()
        };
        let mobility: Vec<f64> = noisy(base.iter().map(|r| 1.0 - 0.7 * r).collect());
        let deaths = noisy(support::delayed(&base, lag));
        let lead = normalize_mobility_reduction(&IrregularSeries::regular(0.0, mobility).unwrap()).unwrap();
        let lagger = normalize_cumdeaths(&IrregularSeries::regular(0.0, deaths).unwrap()).unwrap();
        let est = estimate_lag(&lead, &lagger, &LagConfig::default()).unwrap();
        if (est.theta_hat - lag as f64).abs() <= 2.0 {
            within += 1;
        }
    }
    assert!(within >= 190, "{within}/200");
}
