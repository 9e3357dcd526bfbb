mod support;

use moblag_core::regress::{
    correlation, fit_model, ols_fit, select_cut, CorrelationMethod, Design, ModelKind, RegressionDataset,
    RegressionRow, ResponseTransform,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<f64>) {
    let p = rng.random_range(1..=4);
    let n = rng.random_range(p + 2..=100);
    let mut cols = vec![vec![1.0; n]];
    for _ in 1..p {
        let scale = 10f64.powi(rng.random_range(-2..3));
        cols.push((0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect());
    }
    let y = (0..n)
        .map(|i| {
            let signal: f64 = cols.iter().map(|c| c[i] * 0.7).sum();
            signal + rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    (cols, y)
}

fn design(cols: &[Vec<f64>]) -> Design {
    let mut d = Design::with_intercept(cols[0].len());
    for (k, c) in cols.iter().enumerate().skip(1) {
        d.push(format!("x{k}"), c.clone());
    }
    d
}

#[test]
fn qr_matches_normal_equations_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..300 {
        let (cols, y) = random_instance(&mut rng);
        let fit = ols_fit(&design(&cols), &y).unwrap();
        let oracle = support::normal_equations(&cols, &y);
        let scale = oracle.iter().fold(0.0f64, |m, b| m.max(b.abs()));
        for (got, want) in fit.coefficients.iter().zip(&oracle) {
            assert!((got - want).abs() <= 1e-9 * scale, "case {case}: {got} vs {want}");
        }
        let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        for c in &cols {
            let d: f64 = support::compensated_sum(c.iter().zip(&fit.residuals).map(|(a, r)| a * r));
            assert!(d.abs() < 1e-8 * ynorm * c.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0));
        }
        if cols.len() > 1 {
            let nested = ols_fit(&design(&cols[..cols.len() - 1]), &y).unwrap();
            assert!(fit.r_squared >= nested.r_squared - 1e-12);
        }
        assert!((0.0..=1.0).contains(&fit.r_squared));
        assert!(fit.p_values.iter().all(|p| (0.0..=1.0).contains(p)));
    }
}

fn rows(rng: &mut ChaCha8Rng, n: usize, zero_share: f64) -> Vec<RegressionRow> {
    (0..n)
        .map(|i| {
            let zero = |rng: &mut ChaCha8Rng| rng.random::<f64>() < zero_share;
            let mobility = if zero(rng) { 0.0 } else { rng.random_range(1.0..1e5) };
            let response = if zero(rng) { 0.0 } else { rng.random_range(1.0..500.0) };
            RegressionRow {
                region_id: format!("d{i:03}"),
                response,
                mobility,
                distance: rng.random_range(0.0..900.0),
            }
        })
        .collect()
}

fn dataset(rows: Vec<RegressionRow>) -> RegressionDataset {
    RegressionDataset {
        rows,
        response_date: None,
        mobility_period: None,
        seed_region: "d000".into(),
        response_transform: ResponseTransform::Log,
    }
}

#[test]
fn cut_matches_predicate_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let ds = dataset(rows(&mut rng, 60, 0.3));
        let cut = select_cut(&ds).unwrap();
        let expected: Vec<&RegressionRow> = ds.rows.iter().filter(|r| r.mobility > 0.0 && r.response > 0.0).collect();
        assert_eq!(cut.rows.iter().collect::<Vec<_>>(), expected);
    }
}

#[test]
fn nested_models_never_fit_better() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let ds = select_cut(&dataset(rows(&mut rng, 40, 0.1))).unwrap();
        let full = fit_model(&ds, ModelKind::Full).unwrap().r_squared;
        let mob = fit_model(&ds, ModelKind::MobilityOnly).unwrap().r_squared;
        let dist = fit_model(&ds, ModelKind::DistanceOnly).unwrap().r_squared;
        assert!(full >= mob - 1e-12 && full >= dist - 1e-12);
    }
}

#[test]
fn rescaling_mobility_is_absorbed_by_intercept_and_linear_term() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..30 {
        let ds = select_cut(&dataset(rows(&mut rng, 40, 0.0))).unwrap();
        let c = rng.random_range(0.01..100.0);
        let mut scaled = ds.clone();
        scaled.rows.iter_mut().for_each(|r| r.mobility *= c);
        let a = fit_model(&ds, ModelKind::Full).unwrap();
        let b = fit_model(&scaled, ModelKind::Full).unwrap();
        assert!((a.r_squared - b.r_squared).abs() < 1e-9);
        for name in ["alpha2", "alpha3"] {
            assert!((a.p_values[name] - b.p_values[name]).abs() < 1e-9, "{name}");
        }
        assert!((a.standardized_coefficients["alpha3"] - b.standardized_coefficients["alpha3"]).abs() < 1e-9);
        assert!((a.coefficients["alpha2"] - b.coefficients["alpha2"]).abs() < 1e-9 * a.coefficients["alpha2"].abs().max(1.0));
    }
}

proptest! {
    #[test]
    fn correlations_are_bounded_and_spearman_is_rank_invariant(
        pts in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..40),
    ) {
        let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
        if let Ok(r) = correlation(&x, &y, CorrelationMethod::Pearson) {
            prop_assert!((-1.0..=1.0).contains(&r));
            prop_assert!((r - support::pearson(&x, &y)).abs() < 1e-9);
        }
        if let Ok(s) = correlation(&x, &y, CorrelationMethod::Spearman) {
            prop_assert!((-1.0..=1.0).contains(&s));
            let xt: Vec<f64> = x.iter().map(|v| (v / 500.0).exp()).collect();
            let s2 = correlation(&xt, &y, CorrelationMethod::Spearman).unwrap();
            prop_assert!((s - s2).abs() < 1e-12);
        }
    }
}
