//! Origin-destination matrices: regions, daily movement records, validation,
//! anonymity thresholding and aggregation into connectivity matrices.

mod connectivity;
mod reasonability;
mod region;
mod series;

pub use connectivity::{
    aggregate_connectivity, daily_internal_mobility, internal_mobility, internal_mobility_series,
    ConnectivityMatrix, InternalMobilitySeries, Partition,
};
pub use reasonability::{reasonability_check, ReasonabilityConfig, ReasonabilityReport, VolumeAnomaly};
pub use region::{region_distance, Region, RegionId, RegionRegistry, EARTH_RADIUS_KM};
pub use series::{apply_anonymity_threshold, parse_odm, write_odm, OdmRecord, OdmSeries};
