use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::ols::{ols_fit, Design};
use crate::dates::DayInterval;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `const + a1 log m + a2 (log m)^2 + a3 distance`
    Full,
    /// `const + b1 log m + b2 (log m)^2`
    MobilityOnly,
    /// `const + g1 distance`
    DistanceOnly,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Full, ModelKind::MobilityOnly, ModelKind::DistanceOnly];

    pub fn coefficient_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Full => &["const", "alpha1", "alpha2", "alpha3"],
            ModelKind::MobilityOnly => &["const", "beta1", "beta2"],
            ModelKind::DistanceOnly => &["const", "gamma1"],
        }
    }

    pub fn n_params(self) -> usize {
        self.coefficient_names().len()
    }

    pub fn uses_mobility(self) -> bool {
        !matches!(self, ModelKind::DistanceOnly)
    }

    pub fn formula(self, transform: ResponseTransform) -> String {
        let y = match transform {
            ResponseTransform::Identity => "y",
            ResponseTransform::Log => "log(y)",
        };
        let rhs = match self {
            ModelKind::Full => "const + alpha1*log(mobility) + alpha2*log(mobility)^2 + alpha3*distance",
            ModelKind::MobilityOnly => "const + beta1*log(mobility) + beta2*log(mobility)^2",
            ModelKind::DistanceOnly => "const + gamma1*distance",
        };
        format!("{y} = {rhs}")
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Full => "full",
            ModelKind::MobilityOnly => "mob",
            ModelKind::DistanceOnly => "dist",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(ModelKind::Full),
            "mob" | "mobility" | "mobility_only" => Ok(ModelKind::MobilityOnly),
            "dist" | "distance" | "distance_only" => Ok(ModelKind::DistanceOnly),
            other => Err(Error::Config(format!("unknown model `{other}` (full|mob|dist)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseTransform {
    #[default]
    Identity,
    Log,
}

impl FromStr for ResponseTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" | "none" => Ok(ResponseTransform::Identity),
            "log" => Ok(ResponseTransform::Log),
            other => Err(Error::Config(format!("unknown response transform `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionRow {
    pub region_id: String,
    /// Cumulative excess deaths at the response date, or IgG positives.
    pub response: f64,
    /// Mobility from the seed region (non-negative).
    pub mobility: f64,
    /// Kilometres from the seed region.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionDataset {
    pub rows: Vec<RegressionRow>,
    pub response_date: Option<NaiveDate>,
    pub mobility_period: Option<DayInterval>,
    pub seed_region: String,
    pub response_transform: ResponseTransform,
}

impl RegressionDataset {
    /// Joins mobility from the seed region, responses and distances on region id.
    /// Regions missing any of the three are left out.
    pub fn from_maps(
        seed_region: impl Into<String>,
        mobility: &BTreeMap<String, f64>,
        response: &BTreeMap<String, f64>,
        distance: &BTreeMap<String, f64>,
    ) -> Self {
        let rows = mobility
            .iter()
            .filter_map(|(id, &m)| {
                Some(RegressionRow {
                    region_id: id.clone(),
                    response: *response.get(id)?,
                    mobility: m,
                    distance: *distance.get(id)?,
                })
            })
            .collect();
        Self {
            rows,
            response_date: None,
            mobility_period: None,
            seed_region: seed_region.into(),
            response_transform: ResponseTransform::Identity,
        }
    }

    pub fn with_transform(mut self, t: ResponseTransform) -> Self {
        self.response_transform = t;
        self
    }
}

/// Keeps rows with strictly positive mobility and response, in order.
pub fn select_cut(dataset: &RegressionDataset) -> Result<RegressionDataset> {
    let rows: Vec<RegressionRow> = dataset
        .rows
        .iter()
        .filter(|r| r.mobility > 0.0 && r.response > 0.0)
        .cloned()
        .collect();
    let needed = ModelKind::Full.n_params() + 1;
    if rows.len() < needed {
        return Err(Error::InsufficientData(format!(
            "{} rows survive the cut, at least {needed} needed",
            rows.len()
        )));
    }
    Ok(RegressionDataset { rows, ..dataset.clone() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model_kind: ModelKind,
    pub formula: String,
    pub coefficients: BTreeMap<String, f64>,
    pub standard_errors: BTreeMap<String, f64>,
    pub p_values: BTreeMap<String, f64>,
    pub r_squared: f64,
    pub degenerate_response: bool,
    /// Slopes rescaled by sd(x)/sd(y); `const` is carried over unscaled.
    pub standardized_coefficients: BTreeMap<String, f64>,
    pub intercept_unscaled: bool,
    pub n_rows: usize,
    pub df_resid: usize,
}

impl FitResult {
    pub fn coefficient(&self, name: &str) -> f64 {
        self.coefficients[name]
    }
}

fn response_values(dataset: &RegressionDataset) -> Result<Vec<f64>> {
    dataset
        .rows
        .iter()
        .map(|r| match dataset.response_transform {
            ResponseTransform::Identity => Ok(r.response),
            ResponseTransform::Log if r.response > 0.0 => Ok(r.response.ln()),
            ResponseTransform::Log => Err(Error::InsufficientData(format!(
                "log of non-positive response for region `{}`",
                r.region_id
            ))),
        })
        .collect()
}

pub(crate) fn build_design(dataset: &RegressionDataset, kind: ModelKind) -> Result<Design> {
    let rows = &dataset.rows;
    let mut design = Design::with_intercept(rows.len());
    let names = kind.coefficient_names();
    if kind.uses_mobility() {
        let logm = rows
            .iter()
            .map(|r| {
                if r.mobility > 0.0 {
                    Ok(r.mobility.ln())
                } else {
                    Err(Error::NonPositiveMobility(r.region_id.clone()))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        design.push(names[1], logm.clone());
        design.push(names[2], logm.iter().map(|v| v * v).collect());
    }
    if kind != ModelKind::MobilityOnly {
        design.push(*names.last().expect("non-empty"), rows.iter().map(|r| r.distance).collect());
    }
    Ok(design)
}

/// Fits one member of the model family and attaches standardized coefficients.
pub fn fit_model(dataset: &RegressionDataset, kind: ModelKind) -> Result<FitResult> {
    let design = build_design(dataset, kind)?;
    let y = response_values(dataset)?;
    let fit = ols_fit(&design, &y)?;
    let named = |v: &[f64]| -> BTreeMap<String, f64> {
        fit.names.iter().cloned().zip(v.iter().copied()).collect()
    };
    let mut result = FitResult {
        model_kind: kind,
        formula: kind.formula(dataset.response_transform),
        coefficients: named(&fit.coefficients),
        standard_errors: named(&fit.standard_errors),
        p_values: named(&fit.p_values),
        r_squared: fit.r_squared,
        degenerate_response: fit.degenerate_response,
        standardized_coefficients: BTreeMap::new(),
        intercept_unscaled: true,
        n_rows: fit.n_rows,
        df_resid: fit.df_resid,
    };
    result.standardized_coefficients = standardize_coefficients(&result, dataset)?;
    Ok(result)
}

fn sample_sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// `b_k * sd(x_k) / sd(y)` for every slope; the intercept is returned unscaled.
pub fn standardize_coefficients(fit: &FitResult, dataset: &RegressionDataset) -> Result<BTreeMap<String, f64>> {
    let design = build_design(dataset, fit.model_kind)?;
    let y = response_values(dataset)?;
    let sd_y = sample_sd(&y);
    if !(sd_y > 0.0) {
        return Err(Error::ZeroVariance("response".into()));
    }
    let mut out = BTreeMap::new();
    for (k, name) in design.names().iter().enumerate() {
        let b = *fit
            .coefficients
            .get(name)
            .ok_or_else(|| Error::Config(format!("fit has no coefficient `{name}`")))?;
        if k == 0 {
            out.insert(name.clone(), b);
            continue;
        }
        let sd_x = sample_sd(design.column(k));
        if !(sd_x > 0.0) {
            return Err(Error::ZeroVariance(format!("covariate `{name}`")));
        }
        out.insert(name.clone(), b * sd_x / sd_y);
    }
    Ok(out)
}
