use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Correlation coefficients with their textbook meanings: Pearson is the
/// linear (product-moment) coefficient, Spearman the rank coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

impl fmt::Display for CorrelationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrelationMethod::Pearson => "pearson",
            CorrelationMethod::Spearman => "spearman",
        })
    }
}

impl FromStr for CorrelationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pearson" => Ok(CorrelationMethod::Pearson),
            "spearman" => Ok(CorrelationMethod::Spearman),
            other => Err(Error::Config(format!("unknown correlation method `{other}`"))),
        }
    }
}

pub fn correlation(x: &[f64], y: &[f64], method: CorrelationMethod) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Config(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData(format!("{} points, need at least 3", x.len())));
    }
    match method {
        CorrelationMethod::Pearson => pearson(x, y),
        CorrelationMethod::Spearman => pearson(&average_ranks(x), &average_ranks(y)),
    }
}

pub(crate) fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance(
            if sxx == 0.0 { "x" } else { "y" }.to_string(),
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks, ties sharing the mean of their positions.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_is_one() {
        let x = [1.0, 4.0, 2.0, 8.0, 5.0];
        for m in [CorrelationMethod::Pearson, CorrelationMethod::Spearman] {
            assert!((correlation(&x, &x, m).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn monotone_nonlinear() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        assert_eq!(correlation(&x, &y, CorrelationMethod::Spearman).unwrap(), 1.0);
        assert!(correlation(&x, &y, CorrelationMethod::Pearson).unwrap() < 1.0);
    }

    #[test]
    fn ties_get_average_ranks() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            correlation(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], CorrelationMethod::Pearson),
            Err(Error::ZeroVariance(_))
        ));
        assert!(correlation(&[1.0, 2.0], &[1.0, 2.0], CorrelationMethod::Pearson).is_err());
        assert!(correlation(&[1.0, 2.0, 3.0], &[1.0, 2.0], CorrelationMethod::Pearson).is_err());
    }

    #[test]
    fn spearman_matches_textbook_formula_without_ties() {
        // 1 - 6 sum d^2 / (n (n^2 - 1)) holds when all ranks are distinct
        let x = [3.1, 0.2, 5.5, 4.0, 1.7, 9.9, 6.3];
        let y = [2.0, 1.0, 7.0, 3.0, 0.5, 6.0, 8.0];
        let (rx, ry) = (average_ranks(&x), average_ranks(&y));
        let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
        let n = x.len() as f64;
        let expected = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
        let got = correlation(&x, &y, CorrelationMethod::Spearman).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn bounded_and_rank_invariant(v in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..60)) {
            let (x, y): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            for m in [CorrelationMethod::Pearson, CorrelationMethod::Spearman] {
                if let Ok(r) = correlation(&x, &y, m) {
                    prop_assert!((-1.0..=1.0).contains(&r));
                }
            }
            if let Ok(r) = correlation(&x, &y, CorrelationMethod::Spearman) {
                let tx: Vec<f64> = x.iter().map(|v| (v / 100.0).exp()).collect();
                let ty: Vec<f64> = y.iter().map(|v| v * v * v).collect();
                let r2 = correlation(&tx, &ty, CorrelationMethod::Spearman).unwrap();
                prop_assert!((r - r2).abs() < 1e-12);
            }
        }
    }
}
