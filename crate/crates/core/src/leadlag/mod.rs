//! Lead-lag estimation between mobility reduction (leader) and cumulative
//! excess deaths (lagger).

mod estimate;
mod flags;
mod hy;
mod series;

pub use estimate::{estimate_lag, ContrastMode, ContrastPoint, LagConfig, LagEstimate};
pub use flags::{lag_quality_flags, LagFlag, LagQualityConfig};
pub use hy::hy_covariance;
pub use series::{
    iqr, normalize_cumdeaths, normalize_mobility_reduction, IrregularSeries, NormalizationKind, NormalizedSeries,
};
