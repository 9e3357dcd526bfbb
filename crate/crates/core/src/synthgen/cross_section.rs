use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regress::RegressionRow;

/// A cross-section drawn straight from the full regression model
/// `y = const + a1*log(m) + a2*log(m)^2 + a3*distance + noise`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionConfig {
    pub n_rows: usize,
    pub rng_seed: u64,
    /// `[const, alpha1, alpha2, alpha3]`.
    pub coefficients: [f64; 4],
    pub log_mobility_range: (f64, f64),
    pub distance_range: (f64, f64),
    /// Noise sd as a fraction of the sd of the noiseless response.
    pub noise_fraction: f64,
}

impl Default for CrossSectionConfig {
    fn default() -> Self {
        Self {
            n_rows: 60,
            rng_seed: 0,
            coefficients: [2.0, 1.5, -0.08, -0.004],
            log_mobility_range: (1.0, 12.0),
            distance_range: (5.0, 900.0),
            noise_fraction: 0.0,
        }
    }
}

pub fn gen_regression_rows(config: &CrossSectionConfig) -> Result<Vec<RegressionRow>> {
    if config.n_rows < 5 {
        return Err(Error::Config("a cross-section needs at least 5 rows".into()));
    }
    if !(config.noise_fraction >= 0.0) {
        return Err(Error::Config("noise_fraction must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let [c, a1, a2, a3] = config.coefficients;
    let (l0, l1) = config.log_mobility_range;
    let (d0, d1) = config.distance_range;
    let mut rows: Vec<RegressionRow> = (0..config.n_rows)
        .map(|i| {
            let l = l0 + (l1 - l0) * rng.random::<f64>();
            let distance = d0 + (d1 - d0) * rng.random::<f64>();
            RegressionRow {
                region_id: format!("X{:04}", i + 1),
                response: c + a1 * l + a2 * l * l + a3 * distance,
                mobility: l.exp(),
                distance,
            }
        })
        .collect();
    if config.noise_fraction > 0.0 {
        let n = rows.len() as f64;
        let mean = rows.iter().map(|r| r.response).sum::<f64>() / n;
        let sd = (rows.iter().map(|r| (r.response - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        for r in &mut rows {
            let z: f64 = rng.sample(StandardNormal);
            r.response += config.noise_fraction * sd * z;
        }
    }
    Ok(rows)
}
