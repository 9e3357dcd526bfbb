//! Mobility/epidemic analytics over origin-destination matrices.
//!
//! The crate is organised the way an analysis is run:
//!
//! - [`odm`]: ingest daily origin-destination counts, validate them, apply the
//!   anonymity threshold and aggregate them into weekly connectivity matrices.
//! - [`regress`]: cut-sample selection, the log-quadratic mobility/distance
//!   regression family, correlation coefficients and time sweeps of fit quality.
//! - [`leadlag`]: min-max normalisation of mobility reduction and cumulative
//!   excess deaths, the Hayashi-Yoshida covariance and contrast-based lag estimation.
//! - [`netgraph`]: the directed lead-lag network between regions and its
//!   community structure.
//! - [`synthgen`]: seeded synthetic scenarios with planted ground truth, used to
//!   validate every estimator above.
//! - [`io`]: the CSV/JSON formats shared by the command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dates;
pub mod error;
pub mod io;
pub mod leadlag;
pub mod netgraph;
pub mod odm;
pub mod regress;
pub mod synthgen;

pub use dates::DayInterval;
pub use error::{Error, Result};
