use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flags::LagFlag;
use super::hy::hy_covariance;
use super::series::{IrregularSeries, NormalizedSeries};
use crate::error::{Error, Result};
use crate::regress::pearson;

/// Timestamps closer than this (in days) are treated as simultaneous.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContrastMode {
    /// Hayashi-Yoshida covariance of increments; works on nonsynchronous grids.
    Hy,
    /// Sample correlation over coinciding timestamps.
    Pearson,
}

impl fmt::Display for ContrastMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContrastMode::Hy => "hy",
            ContrastMode::Pearson => "pearson",
        })
    }
}

impl FromStr for ContrastMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hy" => Ok(ContrastMode::Hy),
            "pearson" => Ok(ContrastMode::Pearson),
            other => Err(Error::Config(format!("unknown contrast mode `{other}` (hy|pearson)"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LagConfig {
    /// Lags are searched in the open interval (-delta, delta), in days.
    pub delta: f64,
    pub step: f64,
    pub mode: ContrastMode,
    /// Grid points with fewer overlapping observations are excluded.
    pub min_overlap: usize,
}

impl Default for LagConfig {
    fn default() -> Self {
        Self {
            delta: 40.0,
            step: 1.0,
            mode: ContrastMode::Pearson,
            min_overlap: 3,
        }
    }
}

impl LagConfig {
    /// Symmetric grid `k * step` with `|k * step| < delta`; always contains 0.
    pub fn grid(&self) -> Result<Vec<f64>> {
        if !(self.delta > 0.0) || !(self.step > 0.0) {
            return Err(Error::Config("delta and step must be positive".into()));
        }
        let k_max = (self.delta / self.step).ceil() as i64 - 1;
        Ok((-k_max..=k_max).map(|k| k as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastPoint {
    pub theta: f64,
    /// `None` when the point was excluded.
    pub value: Option<f64>,
    pub overlap_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excluded: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagEstimate {
    pub mode: ContrastMode,
    pub contrast: Vec<ContrastPoint>,
    /// Lag (days) by which the lagger trails the leader.
    pub theta_hat: f64,
    pub contrast_at_theta_hat: f64,
    pub correlation_raw: Option<f64>,
    pub correlation_shifted: Option<f64>,
    pub r_squared_shifted: Option<f64>,
    pub overlap_count: usize,
    pub lagger_raw_iqr: f64,
    #[serde(default)]
    pub flags: Vec<LagFlag>,
}

impl LagEstimate {
    pub fn grid(&self) -> Vec<f64> {
        self.contrast.iter().map(|c| c.theta).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Values of `x` and `y` at coinciding timestamps.
pub(crate) fn paired_values(x: &IrregularSeries, y: &IrregularSeries) -> (Vec<f64>, Vec<f64>) {
    let (tx, ty) = (x.times(), y.times());
    let (mut i, mut j) = (0, 0);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    while i < tx.len() && j < ty.len() {
        let d = tx[i] - ty[j];
        if d.abs() <= TIME_EPS {
            a.push(x.values()[i]);
            b.push(y.values()[j]);
            i += 1;
            j += 1;
        } else if d < 0.0 {
            i += 1;
        } else {
            j += 1;
        }
    }
    (a, b)
}

fn paired_correlation(x: &IrregularSeries, y: &IrregularSeries, min_overlap: usize) -> Option<f64> {
    let (a, b) = paired_values(x, y);
    if a.len() < min_overlap.max(3) {
        return None;
    }
    pearson(&a, &b).ok()
}

fn evaluate(x: &IrregularSeries, y: &IrregularSeries, theta: f64, cfg: &LagConfig) -> ContrastPoint {
    // y observed at s pairs with x at s - theta: U(theta) contrasts X_t with Y_{t+theta}
    let shifted = y.shift_time(-theta);
    let point = |value, overlap_count, excluded: Option<String>| ContrastPoint {
        theta,
        value,
        overlap_count,
        excluded,
    };
    match cfg.mode {
        ContrastMode::Pearson => {
            let (a, b) = paired_values(x, &shifted);
            if a.len() < cfg.min_overlap {
                return point(None, a.len(), Some(format!("{} overlapping points", a.len())));
            }
            match pearson(&a, &b) {
                Ok(r) => point(Some(r), a.len(), None),
                Err(e) => point(None, a.len(), Some(e.to_string())),
            }
        }
        ContrastMode::Hy => {
            let (lo, hi) = (shifted.times()[0], shifted.times()[shifted.len() - 1]);
            let overlap = x
                .times()
                .iter()
                .filter(|&&t| t >= lo - TIME_EPS && t <= hi + TIME_EPS)
                .count();
            if overlap < cfg.min_overlap {
                return point(None, overlap, Some(format!("{overlap} overlapping points")));
            }
            match hy_covariance(x, &shifted) {
                Ok(u) => point(Some(u), overlap, None),
                Err(e) => point(None, overlap, Some(e.to_string())),
            }
        }
    }
}

/// Preference order for the argmax: larger |U| first, then smaller |theta|,
/// then positive theta. Magnitudes within a relative 1e-12 count as tied.
fn better(a: &ContrastPoint, b: &ContrastPoint) -> Ordering {
    let (ua, ub) = (a.value.unwrap_or(0.0).abs(), b.value.unwrap_or(0.0).abs());
    let tol = 1e-12 * ua.max(ub).max(f64::MIN_POSITIVE);
    if (ua - ub).abs() > tol {
        return ua.total_cmp(&ub);
    }
    b.theta
        .abs()
        .total_cmp(&a.theta.abs())
        .then(a.theta.total_cmp(&b.theta))
}

/// Estimates how many days `lagger` trails `leader` by maximising the
/// contrast `|U(theta)|` over the lag grid.
pub fn estimate_lag(leader: &NormalizedSeries, lagger: &NormalizedSeries, cfg: &LagConfig) -> Result<LagEstimate> {
    let grid = cfg.grid()?;
    let (x, y) = (&leader.series, &lagger.series);
    let contrast: Vec<ContrastPoint> = grid.par_iter().map(|&theta| evaluate(x, y, theta, cfg)).collect();

    let best = contrast
        .iter()
        .filter(|c| c.value.is_some())
        .max_by(|a, b| better(a, b))
        .ok_or(Error::NoAdmissibleLag(cfg.min_overlap))?;
    let theta_hat = best.theta;

    let correlation_raw = paired_correlation(x, y, cfg.min_overlap);
    let shifted = y.shift_time(-theta_hat);
    let correlation_shifted = paired_correlation(x, &shifted, cfg.min_overlap);
    let overlap_count = match cfg.mode {
        ContrastMode::Pearson => best.overlap_count,
        ContrastMode::Hy => paired_values(x, &shifted).0.len().max(best.overlap_count),
    };

    Ok(LagEstimate {
        mode: cfg.mode,
        theta_hat,
        contrast_at_theta_hat: best.value.expect("filtered"),
        correlation_raw,
        correlation_shifted,
        r_squared_shifted: correlation_shifted.map(|r| r * r),
        overlap_count,
        lagger_raw_iqr: lagger.raw_iqr(),
        flags: Vec::new(),
        contrast,
    })
}
