//! Synthetic regions, gravity-model mobility with a lockdown, and epidemic
//! outcomes with planted lags and coefficients.

mod config;
mod cross_section;
mod epidemic;
mod mobility;

pub use config::ScenarioConfig;
pub use cross_section::{gen_regression_rows, CrossSectionConfig};
pub use epidemic::{gen_epidemic, scenario_day, Epidemic, GroundTruth, RegionTruth};
pub use mobility::{gen_odm, gen_regions, refine_odm, region_id, split_cells};

use crate::error::Result;
use crate::odm::{OdmSeries, RegionRegistry};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub registry: RegionRegistry,
    pub odm: OdmSeries,
    pub epidemic: Epidemic,
}

pub fn generate(config: &ScenarioConfig) -> Result<Scenario> {
    let registry = gen_regions(config)?;
    let odm = gen_odm(&registry, config)?;
    let epidemic = gen_epidemic(&registry, &odm, config)?;
    Ok(Scenario { registry, odm, epidemic })
}
