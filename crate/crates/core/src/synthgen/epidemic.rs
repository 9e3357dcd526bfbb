use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::mobility::{substream, STREAM_EPIDEMIC};
use crate::dates::DayInterval;
use crate::error::{Error, Result};
use crate::leadlag::{normalize_mobility_reduction, IrregularSeries};
use crate::odm::{aggregate_connectivity, daily_internal_mobility, OdmSeries, Partition, RegionRegistry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionTruth {
    /// Connectivity from the seed region over the pre-lockdown week.
    pub mobility: f64,
    pub final_toll: f64,
    /// Multiplier of the background epidemic, independent of mobility.
    pub background_weight: f64,
    pub igg_tested: u64,
    pub igg_positives: u64,
}

/// Planted parameters, written next to every synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub planted_lag_days: i64,
    pub lockdown_date: NaiveDate,
    pub seed_region: String,
    pub outbreak_date: Option<NaiveDate>,
    pub mobility_period: DayInterval,
    /// `log(toll) = const + beta1*log(m) + beta2*log(m)^2`.
    pub coefficients: BTreeMap<String, f64>,
    pub noise_sigma: f64,
    pub regions: BTreeMap<String, RegionTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Epidemic {
    pub dates: Vec<NaiveDate>,
    /// Cumulative excess deaths per group, one value per date.
    pub cumdeaths: BTreeMap<String, Vec<f64>>,
    /// Daily internal (diagonal) flow per group, one value per date.
    pub internal_mobility: BTreeMap<String, Vec<f64>>,
    pub truth: GroundTruth,
}

impl Epidemic {
    pub fn cumdeaths_series(&self, group: &str) -> Option<IrregularSeries> {
        dated(&self.dates, self.cumdeaths.get(group)?)
    }

    pub fn mobility_series(&self, group: &str) -> Option<IrregularSeries> {
        dated(&self.dates, self.internal_mobility.get(group)?)
    }

    /// Cumulative deaths of every group on `date`.
    pub fn cumdeaths_on(&self, date: NaiveDate) -> Option<BTreeMap<String, f64>> {
        let k = self.dates.binary_search(&date).ok()?;
        Some(self.cumdeaths.iter().map(|(g, v)| (g.clone(), v[k])).collect())
    }
}

fn dated(dates: &[NaiveDate], values: &[f64]) -> Option<IrregularSeries> {
    let points: Vec<(NaiveDate, f64)> = dates.iter().copied().zip(values.iter().copied()).collect();
    IrregularSeries::from_dated(&points).ok()
}

/// Running maximum of `nmob` delayed by `lag` days, padded with its first
/// value at the start.
fn lagged_profile(nmob: &[f64], lag: usize) -> Vec<f64> {
    let mut best = f64::NEG_INFINITY;
    (0..nmob.len())
        .map(|t| {
            best = best.max(nmob[t.saturating_sub(lag)]);
            best
        })
        .collect()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Cumulative excess-death curves driven by pre-lockdown connectivity from
/// the seed region, with a temporal profile that trails each group's own
/// mobility reduction by the planted lag.
///
/// The final toll of group `i` is `exp(const + b1*log(m_i) + b2*log(m_i)^2)`,
/// with `const` chosen so the median toll equals `toll_scale`. Increments get
/// Gaussian noise of sd `noise_sigma * toll / sqrt(days)` and the curve is
/// floored at its running maximum. An optional background epidemic
/// independent of mobility grows exponentially from `outbreak_date`.
pub fn gen_epidemic(registry: &RegionRegistry, odm: &OdmSeries, config: &ScenarioConfig) -> Result<Epidemic> {
    config.validate()?;
    if !config.date_range.is_within(&odm.date_range()) {
        return Err(Error::PeriodOutOfRange {
            period: config.date_range.to_string(),
            range: odm.date_range().to_string(),
        });
    }
    let partition = Partition::from_registry(registry);
    let groups = partition.groups().to_vec();
    if partition.group_index(&config.seed_region).is_none() {
        return Err(Error::Config(format!("seed region `{}` is not a group", config.seed_region)));
    }
    let dates: Vec<NaiveDate> = config.date_range.days().collect();
    let n_days = dates.len();

    let daily = daily_internal_mobility(odm, &partition);
    let mut internal = BTreeMap::new();
    for g in &groups {
        let by_date: BTreeMap<NaiveDate, f64> = daily[g].iter().copied().collect();
        let values = dates
            .iter()
            .map(|d| {
                by_date
                    .get(d)
                    .copied()
                    .ok_or_else(|| Error::InsufficientData(format!("no flows on {d}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        internal.insert(g.clone(), values);
    }

    let mobility_period = config.pre_lockdown_week();
    let seed_row = aggregate_connectivity(odm, mobility_period, &partition)?
        .row(&config.seed_region)
        .expect("seed is a group");

    let (b1, b2) = (config.epi_beta1, config.epi_beta2);
    let shape = |m: f64| {
        let l = m.ln();
        b1 * l + b2 * l * l
    };
    let mut shapes: Vec<f64> = seed_row.values().filter(|&&m| m > 0.0).map(|&m| shape(m)).collect();
    if shapes.is_empty() {
        return Err(Error::InsufficientData("no group receives flow from the seed region".into()));
    }
    let constant = config.toll_scale.ln() - median(&mut shapes);
    let log_tolls: BTreeMap<&String, f64> = seed_row
        .iter()
        .filter(|(_, &m)| m > 0.0)
        .map(|(g, &m)| (g, constant + shape(m)))
        .collect();
    let geo_mean_toll = (log_tolls.values().sum::<f64>() / log_tolls.len() as f64).exp();

    let lag = config.planted_lag_days as usize;
    let lock = config.day_index(config.lockdown_date);
    let outbreak = config.outbreak_date.map(|d| config.day_index(d));
    let sigma = config.noise_sigma;

    let per_group: Vec<(Vec<f64>, RegionTruth)> = groups
        .par_iter()
        .enumerate()
        .map(|(gi, g)| {
            let mut rng = substream(config.rng_seed, STREAM_EPIDEMIC + gi as u64);
            let raw = &internal[g];
            let nmob = IrregularSeries::regular(0.0, raw.clone())
                .and_then(|s| normalize_mobility_reduction(&s))
                .map(|n| n.series.values().to_vec())
                .unwrap_or_else(|_| vec![0.0; n_days]);
            let profile = lagged_profile(&nmob, lag);
            let toll = log_tolls.get(g).map_or(0.0, |l| l.exp());
            let z_bg: f64 = rng.sample(StandardNormal);
            let background_weight = (0.5 * z_bg).exp();

            let mut curve = Vec::with_capacity(n_days);
            let mut walk = 0.0;
            let mut floor = 0.0f64;
            let step_sd = sigma * toll / (n_days as f64).sqrt();
            for (t, p) in profile.iter().enumerate() {
                if sigma > 0.0 && t > 0 {
                    let z: f64 = rng.sample(StandardNormal);
                    walk += step_sd * z;
                }
                let bg = match outbreak {
                    Some(o) if t as i64 >= o => {
                        let s = (t as i64 - lock - lag as i64) as f64;
                        config.background_level * background_weight * geo_mean_toll * (config.background_rate * s).exp()
                    }
                    _ => 0.0,
                };
                floor = floor.max(toll * p + bg + walk);
                curve.push(floor);
            }

            let final_toll = *curve.last().expect("non-empty range");
            let population = registry
                .regions()
                .iter()
                .filter(|r| &r.group_id == g)
                .map(|r| r.population)
                .sum::<f64>();
            let tested = ((0.01 * population).round() as u64).max(100);
            let p = (config.igg_attack_rate_scale * final_toll / population).clamp(0.0, 1.0);
            let positives = Binomial::new(tested, p).expect("p in [0, 1]").sample(&mut rng);
            let truth = RegionTruth {
                mobility: seed_row[g],
                final_toll,
                background_weight,
                igg_tested: tested,
                igg_positives: positives,
            };
            (curve, truth)
        })
        .collect();

    let mut cumdeaths = BTreeMap::new();
    let mut regions = BTreeMap::new();
    for (g, (curve, truth)) in groups.iter().zip(per_group) {
        cumdeaths.insert(g.clone(), curve);
        regions.insert(g.clone(), truth);
    }
    let coefficients = BTreeMap::from([
        ("const".to_string(), constant),
        ("beta1".to_string(), b1),
        ("beta2".to_string(), b2),
    ]);
    Ok(Epidemic {
        dates,
        cumdeaths,
        internal_mobility: internal,
        truth: GroundTruth {
            planted_lag_days: config.planted_lag_days,
            lockdown_date: config.lockdown_date,
            seed_region: config.seed_region.clone(),
            outbreak_date: config.outbreak_date,
            mobility_period,
            coefficients,
            noise_sigma: sigma,
            regions,
        },
    })
}

/// Date `days` after the start of the scenario window.
pub fn scenario_day(config: &ScenarioConfig, days: i64) -> NaiveDate {
    config.date_range.start + Duration::days(days)
}
