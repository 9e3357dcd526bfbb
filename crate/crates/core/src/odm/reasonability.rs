use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::series::OdmSeries;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReasonabilityConfig {
    /// Days in the trailing window used as the volume reference.
    pub trailing_days: i64,
    /// A day is anomalous when its total exceeds `ratio` times the trailing
    /// mean, or falls below the trailing mean divided by `ratio`.
    pub volume_ratio: f64,
    /// Largest acceptable share of zero (or absent) cells over the present days.
    pub max_zero_share: f64,
}

impl Default for ReasonabilityConfig {
    fn default() -> Self {
        Self {
            trailing_days: 7,
            volume_ratio: 3.0,
            max_zero_share: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeAnomaly {
    pub date: NaiveDate,
    pub total: f64,
    pub trailing_mean: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasonabilityReport {
    pub missing_dates: Vec<NaiveDate>,
    pub volume_anomalies: Vec<VolumeAnomaly>,
    pub zero_share: f64,
    pub zero_share_ok: bool,
    pub passed: bool,
}

/// Ingest-time sanity checks. `n_regions` sizes the full matrix for the
/// zero-cell share. Never modifies the series.
pub fn reasonability_check(
    series: &OdmSeries,
    n_regions: usize,
    config: &ReasonabilityConfig,
) -> ReasonabilityReport {
    let mut daily: BTreeMap<NaiveDate, (f64, usize)> = BTreeMap::new();
    for r in series.records() {
        let e = daily.entry(r.date).or_insert((0.0, 0));
        e.0 += r.count;
        if r.count > 0.0 {
            e.1 += 1;
        }
    }

    let missing_dates: Vec<NaiveDate> = series
        .date_range()
        .days()
        .filter(|d| !daily.contains_key(d))
        .collect();

    let mut volume_anomalies = Vec::new();
    for (&date, &(total, _)) in &daily {
        let window = daily.range(date - Duration::days(config.trailing_days)..date);
        let (sum, n) = window.fold((0.0, 0usize), |(s, n), (_, &(t, _))| (s + t, n + 1));
        if n == 0 {
            continue;
        }
        let mean = sum / n as f64;
        let anomalous = if mean > 0.0 {
            total > mean * config.volume_ratio || total < mean / config.volume_ratio
        } else {
            total > 0.0
        };
        if anomalous {
            volume_anomalies.push(VolumeAnomaly {
                date,
                total,
                trailing_mean: mean,
                ratio: if mean > 0.0 { total / mean } else { f64::INFINITY },
            });
        }
    }

    let cells = (n_regions * n_regions * daily.len()) as f64;
    let nonzero: usize = daily.values().map(|&(_, nz)| nz).sum();
    let zero_share = if cells > 0.0 { 1.0 - nonzero as f64 / cells } else { 1.0 };
    let zero_share_ok = zero_share <= config.max_zero_share;

    ReasonabilityReport {
        passed: missing_dates.is_empty() && volume_anomalies.is_empty() && zero_share_ok,
        missing_dates,
        volume_anomalies,
        zero_share,
        zero_share_ok,
    }
}
