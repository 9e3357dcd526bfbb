use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::dates::day_number;
use crate::error::{Error, Result};

/// Observations at strictly increasing times (days since 1970-01-01).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrregularSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl IrregularSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidSeries(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::InvalidSeries("at least 2 observations required".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSeries("observation times must be strictly increasing".into()));
        }
        if values.iter().chain(&times).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries("non-finite observation".into()));
        }
        Ok(Self { times, values })
    }

    /// Daily series; dates must be strictly increasing.
    pub fn from_dated(points: &[(NaiveDate, f64)]) -> Result<Self> {
        Self::new(
            points.iter().map(|(d, _)| day_number(*d)).collect(),
            points.iter().map(|(_, v)| *v).collect(),
        )
    }

    /// Values at `t0, t0 + 1, ...`.
    pub fn regular(t0: f64, values: Vec<f64>) -> Result<Self> {
        Self::new((0..values.len()).map(|k| t0 + k as f64).collect(), values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Same values observed `offset` days later.
    pub fn shift_time(&self, offset: f64) -> Self {
        Self {
            times: self.times.iter().map(|t| t + offset).collect(),
            values: self.values.clone(),
        }
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            times: self.times.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationKind {
    /// Mobility reduction: 1 at the window minimum of mobility, 0 at its maximum.
    Nmob,
    /// Min-max scaled cumulative excess deaths.
    CumdeathsNorm,
}

/// A series rescaled into [0, 1], remembering the raw range it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedSeries {
    pub series: IrregularSeries,
    pub kind: NormalizationKind,
    pub raw_min: f64,
    pub raw_max: f64,
}

impl NormalizedSeries {
    /// Interquartile range of the raw (pre-normalisation) values.
    pub fn raw_iqr(&self) -> f64 {
        iqr(self.series.values()) * (self.raw_max - self.raw_min)
    }
}

fn min_max(values: &[f64]) -> Result<(f64, f64)> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return Err(Error::DegenerateNormalization);
    }
    Ok((min, max))
}

/// `1 - (m - min) / (max - min)` over the series window.
pub fn normalize_mobility_reduction(series: &IrregularSeries) -> Result<NormalizedSeries> {
    let (min, max) = min_max(series.values())?;
    let range = max - min;
    Ok(NormalizedSeries {
        series: series.map_values(|m| (1.0 - (m - min) / range).clamp(0.0, 1.0)),
        kind: NormalizationKind::Nmob,
        raw_min: min,
        raw_max: max,
    })
}

/// `(v - min) / (max - min)` over the series window. The input need not be
/// monotone, since excess deaths can dip.
pub fn normalize_cumdeaths(series: &IrregularSeries) -> Result<NormalizedSeries> {
    let (min, max) = min_max(series.values())?;
    let range = max - min;
    Ok(NormalizedSeries {
        series: series.map_values(|v| ((v - min) / range).clamp(0.0, 1.0)),
        kind: NormalizationKind::CumdeathsNorm,
        raw_min: min,
        raw_max: max,
    })
}

/// Interquartile range with linear interpolation between order statistics.
pub fn iqr(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25)
}

pub(crate) fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}
