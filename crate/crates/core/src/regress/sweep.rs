//! Goodness-of-fit and correlation curves over response dates or mobility weeks.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::correlation::{correlation, CorrelationMethod};
use super::model::{fit_model, select_cut, FitResult, ModelKind, RegressionDataset, ResponseTransform};
use crate::dates::{parse_date, DayInterval};
use crate::error::{Error, Result};

/// Per-region values keyed by region id.
pub type RegionValues = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SweepOutcome {
    Fitted(FitResult),
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    /// Response date for date sweeps, mobility-week start for week sweeps.
    pub date: NaiveDate,
    pub kind: ModelKind,
    pub outcome: SweepOutcome,
}

impl SweepRecord {
    pub fn r_squared(&self) -> Option<f64> {
        match &self.outcome {
            SweepOutcome::Fitted(f) => Some(f.r_squared),
            SweepOutcome::Skipped { .. } => None,
        }
    }
}

/// Fits every kind on every dataset. Failing fits become skip markers. The
/// output is ordered by (date, kind) whatever the execution schedule.
pub fn sweep_fits(points: &[(NaiveDate, RegressionDataset)], kinds: &[ModelKind], cut: bool) -> Vec<SweepRecord> {
    let jobs: Vec<(NaiveDate, &RegressionDataset, ModelKind)> = points
        .iter()
        .flat_map(|(d, ds)| kinds.iter().map(move |&k| (*d, ds, k)))
        .collect();
    let mut out: Vec<SweepRecord> = jobs
        .par_iter()
        .map(|&(date, ds, kind)| {
            let fitted = if cut {
                select_cut(ds).and_then(|c| fit_model(&c, kind))
            } else {
                fit_model(ds, kind)
            };
            SweepRecord {
                date,
                kind,
                outcome: match fitted {
                    Ok(f) => SweepOutcome::Fitted(f),
                    Err(e) => SweepOutcome::Skipped { reason: e.to_string() },
                },
            }
        })
        .collect();
    out.sort_by(|a, b| a.date.cmp(&b.date).then(a.kind.cmp(&b.kind)));
    out
}

/// Fixed mobility, response evaluated at each date.
#[allow(clippy::too_many_arguments)]
pub fn sweep_fit_over_dates(
    seed_region: &str,
    responses: &BTreeMap<NaiveDate, RegionValues>,
    mobility: &RegionValues,
    mobility_period: Option<DayInterval>,
    distances: &RegionValues,
    dates: &[NaiveDate],
    kinds: &[ModelKind],
    transform: ResponseTransform,
) -> Vec<SweepRecord> {
    let empty = RegionValues::new();
    let points: Vec<(NaiveDate, RegressionDataset)> = dates
        .iter()
        .map(|&d| {
            let mut ds = RegressionDataset::from_maps(seed_region, mobility, responses.get(&d).unwrap_or(&empty), distances)
                .with_transform(transform);
            ds.response_date = Some(d);
            ds.mobility_period = mobility_period;
            (d, ds)
        })
        .collect();
    sweep_fits(&points, kinds, true)
}

/// Fixed response, mobility taken from each week in turn.
pub fn sweep_fit_over_weeks(
    seed_region: &str,
    weekly_mobility: &[(DayInterval, RegionValues)],
    response: &RegionValues,
    response_date: Option<NaiveDate>,
    distances: &RegionValues,
    kinds: &[ModelKind],
    transform: ResponseTransform,
) -> Vec<SweepRecord> {
    let points: Vec<(NaiveDate, RegressionDataset)> = weekly_mobility
        .iter()
        .map(|(week, mob)| {
            let mut ds = RegressionDataset::from_maps(seed_region, mob, response, distances).with_transform(transform);
            ds.response_date = response_date;
            ds.mobility_period = Some(*week);
            (week.start, ds)
        })
        .collect();
    sweep_fits(&points, kinds, true)
}

const SWEEP_NAMES: [&str; 7] = ["const", "alpha1", "alpha2", "alpha3", "beta1", "beta2", "gamma1"];

/// Wide CSV: one row per (date, kind) with p-values and standardized
/// coefficients in fixed columns, empty where a model has no such term.
pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["date".to_string(), "kind".into(), "status".into(), "n_rows".into(), "r_squared".into()];
    header.extend(SWEEP_NAMES.iter().map(|n| format!("p_{n}")));
    header.extend(SWEEP_NAMES.iter().map(|n| format!("std_{n}")));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.date.to_string(), r.kind.to_string()];
        match &r.outcome {
            SweepOutcome::Fitted(f) => {
                row.push("fitted".into());
                row.push(f.n_rows.to_string());
                row.push(f.r_squared.to_string());
                for map in [&f.p_values, &f.standardized_coefficients] {
                    row.extend(SWEEP_NAMES.iter().map(|n| map.get(*n).map(|v| v.to_string()).unwrap_or_default()));
                }
            }
            SweepOutcome::Skipped { .. } => {
                row.push("skipped".into());
                row.extend(std::iter::repeat_n(String::new(), 2 + 2 * SWEEP_NAMES.len()));
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One point of an R² curve read back from a sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCurvePoint {
    pub date: NaiveDate,
    pub kind: String,
    pub r_squared: Option<f64>,
}

pub fn read_sweep_csv<R: Read>(reader: R) -> Result<Vec<SweepCurvePoint>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let bad = |m: &str| Error::Parse { line, message: m.to_string() };
        let date = parse_date(row.get(0).ok_or_else(|| bad("missing date"))?).ok_or_else(|| bad("invalid date"))?;
        let kind = row.get(1).ok_or_else(|| bad("missing kind"))?.to_string();
        let r2 = row.get(4).unwrap_or("");
        let r_squared = if r2.is_empty() {
            None
        } else {
            Some(r2.parse().map_err(|_| bad("invalid r_squared"))?)
        };
        out.push(SweepCurvePoint { date, kind, r_squared });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub week_start: NaiveDate,
    pub method: CorrelationMethod,
    /// Correlation of the outcome with mobility from the seed; `None` when undefined.
    pub rho_mobility: Option<f64>,
    pub rho_distance: Option<f64>,
    pub n_regions: usize,
}

/// Correlates a fixed outcome (e.g. IgG positives) with each week's mobility
/// from the seed and with distance from the seed.
pub fn sweep_correlation_over_weeks(
    outcome: &RegionValues,
    weekly_mobility: &[(DayInterval, RegionValues)],
    distances: &RegionValues,
    methods: &[CorrelationMethod],
) -> Vec<CorrelationRecord> {
    let mut weeks: Vec<&(DayInterval, RegionValues)> = weekly_mobility.iter().collect();
    weeks.sort_by_key(|(w, _)| *w);
    let mut out = Vec::new();
    for (week, mob) in weeks {
        let (mut y, mut m, mut d) = (Vec::new(), Vec::new(), Vec::new());
        for (id, &v) in outcome {
            if let (Some(&mv), Some(&dv)) = (mob.get(id), distances.get(id)) {
                y.push(v);
                m.push(mv);
                d.push(dv);
            }
        }
        for &method in methods {
            out.push(CorrelationRecord {
                week_start: week.start,
                method,
                rho_mobility: correlation(&y, &m, method).ok(),
                rho_distance: correlation(&y, &d, method).ok(),
                n_regions: y.len(),
            });
        }
    }
    out
}

pub fn write_correlation_csv<W: Write>(records: &[CorrelationRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["week_start", "method", "rho_mobility", "rho_distance", "n_regions"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in records {
        w.write_record([
            r.week_start.to_string(),
            r.method.to_string(),
            opt(r.rho_mobility),
            opt(r.rho_distance),
            r.n_regions.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Duration;

    fn day(k: i64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 3, 1).unwrap() + Duration::days(k)
    }

    fn regions(n: usize) -> (RegionValues, RegionValues) {
        let mob = (0..n).map(|i| (format!("r{i:02}"), 1.0 + (i * i) as f64)).collect();
        let dist = (0..n).map(|i| (format!("r{i:02}"), 5.0 + ((i * 7) % 11) as f64 * 20.0)).collect();
        (mob, dist)
    }

    #[test]
    fn singleton_sweep_equals_direct_fit() {
        let (mob, dist) = regions(12);
        let resp: RegionValues = mob.iter().map(|(k, m)| (k.clone(), 3.0 + m.ln() + (k.len() as f64))).collect();
        let mut responses = BTreeMap::new();
        responses.insert(day(0), resp.clone());
        let t = sweep_fit_over_dates("r00", &responses, &mob, None, &dist, &[day(0)], &[ModelKind::Full], ResponseTransform::Identity);
        assert_eq!(t.len(), 1);
        let mut ds = RegressionDataset::from_maps("r00", &mob, &resp, &dist);
        ds.response_date = Some(day(0));
        let direct = fit_model(&select_cut(&ds).unwrap(), ModelKind::Full).unwrap();
        assert_eq!(t[0].outcome, SweepOutcome::Fitted(direct));
    }

    #[test]
    fn failing_dates_are_marked_not_errors() {
        let (mob, dist) = regions(12);
        let mut responses = BTreeMap::new();
        responses.insert(day(1), mob.keys().map(|k| (k.clone(), 0.0)).collect());
        let t = sweep_fit_over_dates("r00", &responses, &mob, None, &dist, &[day(1), day(0)], &ModelKind::ALL, ResponseTransform::Identity);
        assert_eq!(t.len(), 6);
        assert!(t.iter().all(|r| matches!(r.outcome, SweepOutcome::Skipped { .. })));
        assert_eq!(t[0].date, day(0));
        let mut buf = Vec::new();
        write_sweep_csv(&t, &mut buf).unwrap();
        let back = read_sweep_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 6);
        assert!(back.iter().all(|p| p.r_squared.is_none()));
    }

    #[test]
    fn constant_mobility_gives_flat_correlation_curve() {
        let (mob, dist) = regions(10);
        let igg: RegionValues = mob.iter().map(|(k, m)| (k.clone(), m.sqrt() * 3.0)).collect();
        let weeks: Vec<_> = (0..4).map(|w| (DayInterval::week(day(7 * w)), mob.clone())).collect();
        let t = sweep_correlation_over_weeks(&igg, &weeks, &dist, &[CorrelationMethod::Spearman]);
        assert_eq!(t.len(), 4);
        assert!(t.windows(2).all(|w| w[0].rho_mobility == w[1].rho_mobility));
        assert_eq!(t[0].rho_mobility, Some(1.0));
    }

    #[test]
    fn monotone_outcome_of_one_week_has_unit_spearman() {
        let (mob, dist) = regions(10);
        let other: RegionValues = mob.iter().map(|(k, m)| (k.clone(), (m * 7.3) % 5.0 + 1.0)).collect();
        let igg: RegionValues = other.iter().map(|(k, m)| (k.clone(), m.powf(1.7))).collect();
        let weeks = vec![(DayInterval::week(day(0)), mob.clone()), (DayInterval::week(day(7)), other)];
        let t = sweep_correlation_over_weeks(&igg, &weeks, &dist, &[CorrelationMethod::Spearman, CorrelationMethod::Pearson]);
        assert_eq!(t[2].rho_mobility, Some(1.0));
        assert_eq!(t[2].method, CorrelationMethod::Spearman);
        assert!(t[0].rho_mobility.unwrap() < 1.0);
    }
}
