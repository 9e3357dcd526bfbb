use serde::{Deserialize, Serialize};

use super::estimate::LagEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LagFlag {
    /// Lag too long or too few paired observations to be trusted.
    SpuriousLargeLag,
    /// The lagging series barely moves before normalisation.
    FlatTarget,
}

impl LagFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            LagFlag::SpuriousLargeLag => "SPURIOUS_LARGE_LAG",
            LagFlag::FlatTarget => "FLAT_TARGET",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LagQualityConfig {
    pub max_lag_days: f64,
    pub min_overlap: usize,
    /// Raw interquartile range of the lagger below which it counts as flat.
    pub flat_iqr_floor: f64,
}

impl Default for LagQualityConfig {
    fn default() -> Self {
        Self {
            max_lag_days: 30.0,
            min_overlap: 10,
            flat_iqr_floor: 1.0,
        }
    }
}

pub fn lag_quality_flags(estimate: &LagEstimate, config: &LagQualityConfig) -> Vec<LagFlag> {
    let mut flags = Vec::new();
    if estimate.theta_hat.abs() >= config.max_lag_days || estimate.overlap_count < config.min_overlap {
        flags.push(LagFlag::SpuriousLargeLag);
    }
    if estimate.lagger_raw_iqr < config.flat_iqr_floor {
        flags.push(LagFlag::FlatTarget);
    }
    flags
}
