//! The log-quadratic mobility/distance regression family, correlation
//! coefficients and their time sweeps.

mod correlation;
mod model;
mod ols;
mod sweep;

pub use correlation::{average_ranks, correlation, CorrelationMethod};
pub use model::{
    fit_model, select_cut, standardize_coefficients, FitResult, ModelKind, RegressionDataset, RegressionRow,
    ResponseTransform,
};
pub use ols::{ols_fit, Design, OlsFit};
pub use sweep::{
    read_sweep_csv, sweep_correlation_over_weeks, sweep_fit_over_dates, sweep_fit_over_weeks, sweep_fits,
    write_correlation_csv, write_sweep_csv, CorrelationRecord, RegionValues, SweepCurvePoint, SweepOutcome,
    SweepRecord,
};

pub(crate) use correlation::pearson;
