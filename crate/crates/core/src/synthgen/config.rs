use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::dates::DayInterval;
use crate::error::{Error, Result};

/// Everything a synthetic scenario depends on. Identical configs produce
/// byte-identical corpora.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_regions: usize,
    pub rng_seed: u64,
    pub gravity_exponent: f64,
    pub lockdown_date: NaiveDate,
    /// Fraction of every flow removed once the lockdown ramp completes.
    pub lockdown_strength: f64,
    pub seed_region: String,
    pub planted_lag_days: i64,
    /// Lognormal sigma on flows, and relative sigma of the death increments.
    pub noise_sigma: f64,
    pub date_range: DayInterval,
    pub igg_attack_rate_scale: f64,
    /// Amplitude of the weekly cycle on inter-region flows.
    pub weekly_amplitude: f64,
    pub gravity_scale: f64,
    /// Internal flow per inhabitant per day.
    pub internal_factor: f64,
    /// Median final death toll across regions.
    pub toll_scale: f64,
    pub epi_beta1: f64,
    pub epi_beta2: f64,
    /// Start of the mobility-independent background epidemic; none if absent.
    pub outbreak_date: Option<NaiveDate>,
    pub background_level: f64,
    /// Daily exponential growth rate of the background epidemic.
    pub background_rate: f64,
    pub lat_range: (f64, f64),
    pub lon_range: (f64, f64),
    pub population_range: (f64, f64),
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date");
        Self {
            n_regions: 30,
            rng_seed: 0,
            gravity_exponent: 2.0,
            lockdown_date: start + Duration::days(45),
            lockdown_strength: 0.7,
            seed_region: "R001".into(),
            planted_lag_days: 14,
            noise_sigma: 0.0,
            date_range: DayInterval {
                start,
                end: start + Duration::days(119),
            },
            igg_attack_rate_scale: 100.0,
            weekly_amplitude: 0.2,
            gravity_scale: 1e-3,
            internal_factor: 0.5,
            toll_scale: 200.0,
            epi_beta1: 1.0,
            epi_beta2: -0.02,
            outbreak_date: None,
            background_level: 0.0,
            background_rate: 0.5,
            lat_range: (42.0, 50.0),
            lon_range: (-2.0, 8.0),
            population_range: (5e4, 2e6),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n_regions < 2 {
            return fail(format!("n_regions must be at least 2, got {}", self.n_regions));
        }
        if !self.date_range.contains(self.lockdown_date) {
            return fail(format!("lockdown_date {} outside {}", self.lockdown_date, self.date_range));
        }
        if self.lockdown_date == self.date_range.start {
            return fail("lockdown_date needs at least one pre-lockdown day".into());
        }
        if self.planted_lag_days < 0 || self.planted_lag_days >= self.date_range.len_days() {
            return fail(format!("planted_lag_days {} outside the date range", self.planted_lag_days));
        }
        if !(0.0..=1.0).contains(&self.lockdown_strength) {
            return fail(format!("lockdown_strength {} not in [0, 1]", self.lockdown_strength));
        }
        for (name, v) in [
            ("noise_sigma", self.noise_sigma),
            ("igg_attack_rate_scale", self.igg_attack_rate_scale),
            ("gravity_scale", self.gravity_scale),
            ("internal_factor", self.internal_factor),
            ("background_level", self.background_level),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return fail(format!("{name} must be a finite non-negative number, got {v}"));
            }
        }
        if !(self.toll_scale > 0.0) {
            return fail("toll_scale must be positive".into());
        }
        if !(self.weekly_amplitude.abs() < 1.0) {
            return fail("weekly_amplitude must lie in (-1, 1)".into());
        }
        let (p0, p1) = self.population_range;
        if !(p0 > 0.0 && p1 >= p0) {
            return fail("population_range must be positive and ordered".into());
        }
        Ok(())
    }

    /// Applies `key = value` overrides by field name. Values are read as JSON
    /// when possible and as plain strings otherwise.
    pub fn with_overrides<'a, I>(&self, overrides: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut value = serde_json::to_value(self)?;
        let map = value.as_object_mut().expect("config serializes to an object");
        for (key, raw) in overrides {
            let parsed = match key {
                "lockdown_date" | "outbreak_date" | "seed_region" => serde_json::Value::String(raw.to_string()),
                "date_range" => {
                    let (a, b) = raw
                        .split_once("..")
                        .ok_or_else(|| Error::Config(format!("date_range `{raw}` is not `start..end`")))?;
                    serde_json::json!({ "start": a.trim(), "end": b.trim() })
                }
                "lat_range" | "lon_range" | "population_range" => {
                    let (a, b) = raw
                        .split_once(',')
                        .ok_or_else(|| Error::Config(format!("{key} `{raw}` is not `lo,hi`")))?;
                    serde_json::from_str(&format!("[{},{}]", a.trim(), b.trim()))
                        .map_err(|e| Error::Config(format!("{key}: {e}")))?
                }
                _ => serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string())),
            };
            if !map.contains_key(key) {
                return Err(Error::Config(format!("unknown scenario key `{key}`")));
            }
            map.insert(key.to_string(), parsed);
        }
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }

    pub(crate) fn day_index(&self, date: NaiveDate) -> i64 {
        (date - self.date_range.start).num_days()
    }

    /// Fraction of the lockdown in force on day `t`: a five-day linear ramp
    /// reaching 1 on the fifth day of lockdown.
    pub(crate) fn lockdown_ramp(&self, t: i64) -> f64 {
        let lock = self.day_index(self.lockdown_date);
        ((t - lock + 1) as f64 / 5.0).clamp(0.0, 1.0)
    }

    /// The (up to) seven days before lockdown.
    pub fn pre_lockdown_week(&self) -> DayInterval {
        let end = self.lockdown_date - Duration::days(1);
        let start = (self.lockdown_date - Duration::days(7)).max(self.date_range.start);
        DayInterval { start, end }
    }
}
