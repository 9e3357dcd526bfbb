use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use chrono::Datelike;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::odm::{region_distance, OdmRecord, OdmSeries, Region, RegionId, RegionRegistry};

pub(crate) const STREAM_REGIONS: u64 = 0;
pub(crate) const STREAM_ODM: u64 = 1 << 32;
pub(crate) const STREAM_EPIDEMIC: u64 = 2 << 32;
pub(crate) const STREAM_CELLS: u64 = 3 << 32;

pub(crate) fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn region_id(index: usize, n: usize) -> String {
    let width = n.to_string().len().max(3);
    format!("R{:0width$}", index + 1)
}

/// Random centroids in the configured box and log-uniform populations. Each
/// region is its own group.
pub fn gen_regions(config: &ScenarioConfig) -> Result<RegionRegistry> {
    config.validate()?;
    let mut rng = substream(config.rng_seed, STREAM_REGIONS);
    let (lat0, lat1) = config.lat_range;
    let (lon0, lon1) = config.lon_range;
    let (p0, p1) = config.population_range;
    let regions = (0..config.n_regions)
        .map(|i| {
            let id = region_id(i, config.n_regions);
            let lat = lat0 + (lat1 - lat0) * rng.random::<f64>();
            let lon = lon0 + (lon1 - lon0) * rng.random::<f64>();
            let population = (p0.ln() + (p1.ln() - p0.ln()) * rng.random::<f64>()).exp().round();
            Region {
                name: format!("Region {}", i + 1),
                group_id: id.clone(),
                id,
                lat,
                lon,
                population,
            }
        })
        .collect();
    RegionRegistry::new(regions)
}

/// Splits every region into `cells` sub-areas grouped under it, with random
/// population shares and centroids jittered by up to 0.05 degrees.
pub fn split_cells(registry: &RegionRegistry, cells: usize, seed: u64) -> Result<RegionRegistry> {
    if cells == 0 {
        return Err(Error::Config("cells per region must be positive".into()));
    }
    let mut out = Vec::with_capacity(registry.len() * cells);
    for (i, r) in registry.regions().iter().enumerate() {
        let mut rng = substream(seed, STREAM_CELLS + i as u64);
        let shares: Vec<f64> = (0..cells).map(|_| 0.5 + rng.random::<f64>()).collect();
        let total: f64 = shares.iter().sum();
        for (c, s) in shares.iter().enumerate() {
            out.push(Region {
                id: format!("{}c{}", r.id, c + 1),
                name: format!("{} cell {}", r.name, c + 1),
                lat: r.lat + 0.1 * (rng.random::<f64>() - 0.5),
                lon: r.lon + 0.1 * (rng.random::<f64>() - 0.5),
                population: r.population * s / total,
                group_id: r.group_id.clone(),
            });
        }
    }
    RegionRegistry::new(out)
}

/// Distributes each coarse flow over the cells of its origin and destination
/// groups in proportion to the product of population shares.
pub fn refine_odm(series: &OdmSeries, fine: &RegionRegistry) -> Result<OdmSeries> {
    let mut cells: HashMap<&str, Vec<(&RegionId, f64)>> = HashMap::new();
    let mut group_pop: HashMap<&str, f64> = HashMap::new();
    for (r, id) in fine.regions().iter().zip(fine.ids()) {
        cells.entry(r.group_id.as_str()).or_default().push((id, r.population));
        *group_pop.entry(r.group_id.as_str()).or_default() += r.population;
    }
    let mut records = Vec::new();
    for rec in series.records() {
        let (Some(co), Some(cd)) = (cells.get(&*rec.origin), cells.get(&*rec.destination)) else {
            return Err(Error::InvalidRegion(format!(
                "no cells for group `{}` or `{}`",
                rec.origin, rec.destination
            )));
        };
        let (po, pd) = (group_pop[&*rec.origin], group_pop[&*rec.destination]);
        for (a, wa) in co {
            for (b, wb) in cd {
                records.push(OdmRecord {
                    date: rec.date,
                    origin: Arc::clone(a),
                    destination: Arc::clone(b),
                    count: rec.count * (wa / po) * (wb / pd),
                });
            }
        }
    }
    OdmSeries::new(records, series.date_range())
}

/// Gravity-model daily flows with a weekly cycle on inter-region movement, a
/// lockdown ramp and multiplicative lognormal noise.
///
/// Each origin draws its noise from its own substream, so the output does not
/// depend on how the work is scheduled.
pub fn gen_odm(registry: &RegionRegistry, config: &ScenarioConfig) -> Result<OdmSeries> {
    config.validate()?;
    let regions = registry.regions();
    let ids = registry.ids();
    let n = regions.len();
    let dates: Vec<_> = config.date_range.days().collect();
    let baseline: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if i == j {
                config.internal_factor * regions[i].population
            } else {
                let d = region_distance(&regions[i], &regions[j]).max(1.0);
                config.gravity_scale * regions[i].population * regions[j].population
                    / d.powf(config.gravity_exponent)
            }
        })
        .collect();
    let daily_factor: Vec<(f64, f64)> = dates
        .iter()
        .enumerate()
        .map(|(t, date)| {
            let dow = date.weekday().num_days_from_monday() as f64;
            let weekly = 1.0 + config.weekly_amplitude * (TAU * dow / 7.0).sin();
            let lock = 1.0 - config.lockdown_strength * config.lockdown_ramp(t as i64);
            (weekly, lock)
        })
        .collect();

    // flows[origin][t * n + dest]
    let flows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(config.rng_seed, STREAM_ODM + i as u64);
            let mut out = Vec::with_capacity(dates.len() * n);
            for &(weekly, lock) in &daily_factor {
                for j in 0..n {
                    let mut v = baseline[i * n + j] * lock;
                    if i != j {
                        v *= weekly;
                    }
                    if config.noise_sigma > 0.0 {
                        let z: f64 = rng.sample(StandardNormal);
                        v *= (config.noise_sigma * z).exp();
                    }
                    out.push(v);
                }
            }
            out
        })
        .collect();

    let mut records = Vec::with_capacity(dates.len() * n * n);
    for (t, date) in dates.iter().enumerate() {
        for (i, row) in flows.iter().enumerate() {
            for j in 0..n {
                records.push(OdmRecord {
                    date: *date,
                    origin: Arc::clone(&ids[i]),
                    destination: Arc::clone(&ids[j]),
                    count: row[t * n + j],
                });
            }
        }
    }
    OdmSeries::new(records, config.date_range)
}
