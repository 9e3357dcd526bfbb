//! Ordinary least squares by Householder QR.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Column-major design matrix with named columns.
#[derive(Debug, Clone)]
pub struct Design {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Design {
    /// A design holding only the intercept column `const`.
    pub fn with_intercept(n_rows: usize) -> Self {
        Self {
            names: vec!["const".into()],
            columns: vec![vec![1.0; n_rows]],
        }
    }

    pub fn push(&mut self, name: impl Into<String>, column: Vec<f64>) -> &mut Self {
        assert_eq!(column.len(), self.n_rows(), "column length mismatch");
        self.names.push(name.into());
        self.columns.push(column);
        self
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn n_params(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.columns[k]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    /// The response had zero centred variation; `r_squared` is then reported as 0.
    pub degenerate_response: bool,
    pub residuals: Vec<f64>,
    pub ssr: f64,
    pub sst: f64,
    pub n_rows: usize,
    pub df_resid: usize,
}

/// Rank tolerance relative to each column's norm.
const RANK_TOL: f64 = 1e-10;

pub fn ols_fit(design: &Design, y: &[f64]) -> Result<OlsFit> {
    let n = design.n_rows();
    let p = design.n_params();
    if y.len() != n {
        return Err(Error::Config(format!("response has {} rows, design has {n}", y.len())));
    }
    if n <= p {
        return Err(Error::InsufficientData(format!("{n} rows for {p} parameters")));
    }

    let mut a: Vec<Vec<f64>> = design.columns.clone();
    let mut qty = y.to_vec();
    let mut r = vec![vec![0.0; p]; p];

    for k in 0..p {
        let col_norm = norm(&design.columns[k]);
        let alpha_sq: f64 = a[k][k..].iter().map(|v| v * v).sum();
        let alpha = alpha_sq.sqrt();
        if col_norm == 0.0 || alpha <= RANK_TOL * col_norm {
            return Err(Error::RankDeficient(design.names[k].clone()));
        }
        // Householder vector v = x - s e1, s = -sign(x0) |x|
        let s = if a[k][k] >= 0.0 { -alpha } else { alpha };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= s;
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        let reflect = |col: &mut [f64]| {
            let dot: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vnorm_sq;
            col.iter_mut().zip(&v).for_each(|(c, vi)| *c -= f * vi);
        };
        for col in a.iter_mut().take(p).skip(k) {
            reflect(&mut col[k..]);
        }
        reflect(&mut qty[k..]);
        for (j, rj) in r[k].iter_mut().enumerate().skip(k) {
            *rj = a[j][k];
        }
    }

    let coefficients = back_substitute(&r, &qty[..p]);

    let residuals: Vec<f64> = (0..n)
        .map(|i| y[i] - (0..p).map(|k| design.columns[k][i] * coefficients[k]).sum::<f64>())
        .collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let degenerate_response = sst == 0.0;
    let r_squared = if degenerate_response { 0.0 } else { (1.0 - ssr / sst).clamp(0.0, 1.0) };

    let df_resid = n - p;
    let sigma2 = ssr / df_resid as f64;
    let rinv = invert_upper(&r);
    let standard_errors: Vec<f64> = (0..p)
        .map(|k| (sigma2 * (k..p).map(|j| rinv[k][j] * rinv[k][j]).sum::<f64>()).sqrt())
        .collect();
    let t_dist = StudentsT::new(0.0, 1.0, df_resid as f64).expect("positive degrees of freedom");
    let (t_values, p_values): (Vec<f64>, Vec<f64>) = coefficients
        .iter()
        .zip(&standard_errors)
        .map(|(&b, &se)| {
            if se > 0.0 {
                let t = b / se;
                (t, (2.0 * t_dist.sf(t.abs())).clamp(0.0, 1.0))
            } else if b == 0.0 {
                (0.0, 1.0)
            } else {
                (f64::INFINITY.copysign(b), 0.0)
            }
        })
        .unzip();

    Ok(OlsFit {
        names: design.names.clone(),
        coefficients,
        standard_errors,
        t_values,
        p_values,
        r_squared,
        degenerate_response,
        residuals,
        ssr,
        sst,
        n_rows: n,
        df_resid,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn back_substitute(r: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let p = b.len();
    let mut x = vec![0.0; p];
    for k in (0..p).rev() {
        let s: f64 = (k + 1..p).map(|j| r[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / r[k][k];
    }
    x
}

fn invert_upper(r: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = r.len();
    let mut inv = vec![vec![0.0; p]; p];
    for j in 0..p {
        let mut e = vec![0.0; p];
        e[j] = 1.0;
        let col = back_substitute(r, &e);
        for (i, v) in col.into_iter().enumerate() {
            inv[i][j] = v;
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (1..=5).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 + 3.0 * v).collect();
        let mut d = Design::with_intercept(5);
        d.push("x", x);
        let fit = ols_fit(&d, &y).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 3.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit.p_values[1] < 1e-6);
    }

    #[test]
    fn constant_response_is_flagged() {
        let mut d = Design::with_intercept(6);
        d.push("x", (0..6).map(f64::from).collect());
        let fit = ols_fit(&d, &[4.0; 6]).unwrap();
        assert!(fit.degenerate_response);
        assert_eq!(fit.r_squared, 0.0);
        assert!(fit.coefficients[1].abs() < 1e-12);
        assert!((fit.coefficients[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_column_is_named() {
        let x: Vec<f64> = (0..8).map(f64::from).collect();
        let mut d = Design::with_intercept(8);
        d.push("x", x.clone());
        d.push("twice_x", x.iter().map(|v| 2.0 * v).collect());
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        match ols_fit(&d, &y) {
            Err(Error::RankDeficient(name)) => assert_eq!(name, "twice_x"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn too_few_rows() {
        let mut d = Design::with_intercept(2);
        d.push("x", vec![1.0, 2.0]);
        assert!(matches!(ols_fit(&d, &[1.0, 2.0]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn p_value_matches_known_t_quantile() {
        // t = 2.228 is the two-sided 5% point at 10 degrees of freedom.
        let t = StudentsT::new(0.0, 1.0, 10.0).unwrap();
        assert!((2.0 * t.sf(2.228138851986273) - 0.05).abs() < 1e-9);
    }
}
