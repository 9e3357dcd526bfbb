use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "moblag", version, about = "Mobility / epidemic lead-lag analytics", args_override_self = true)]
pub struct Cli {
    /// Worker threads for parallel library calls (outputs do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Seed for synthetic generation and community detection.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Key-value file mirroring the command-line flags; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = "MOBLAG_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Aggregate daily ODM counts into a connectivity matrix for one period.
    Connectivity(ConnectivityArgs),
    /// Fit one regression model for a seed region and response date.
    Regress(RegressArgs),
    /// Fit the model family over a range of response dates or mobility weeks.
    Sweep(SweepArgs),
    /// Estimate the lag between a mobility series and a death series.
    Leadlag(LeadlagArgs),
    /// Build and cluster the lead-lag network from per-region series.
    Network(NetworkArgs),
    /// Generate a synthetic corpus with planted ground truth.
    Synth(SynthArgs),
    /// Collect sweep, lag and network outputs into a CSV and an SVG summary.
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Connectivity(_) => "connectivity",
            Command::Regress(_) => "regress",
            Command::Sweep(_) => "sweep",
            Command::Leadlag(_) => "leadlag",
            Command::Network(_) => "network",
            Command::Synth(_) => "synth",
            Command::Report(_) => "report",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ConnectivityArgs {
    /// `date,origin,destination,count` CSV.
    #[arg(long)]
    pub odm: PathBuf,
    /// `id,name,lat,lon,population,group_id` CSV.
    #[arg(long)]
    pub regions: PathBuf,
    /// First day of the week to aggregate, or an explicit `start..end` range.
    #[arg(long)]
    pub week: String,
    /// Anonymity threshold: records with a count below it are discarded.
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct RegressArgs {
    /// Connectivity JSON written by `connectivity`.
    #[arg(long)]
    pub connectivity: PathBuf,
    /// `date,region,value` CSV of the response (cumulative excess deaths, IgG positives).
    #[arg(long)]
    pub deaths: PathBuf,
    #[arg(long)]
    pub regions: PathBuf,
    #[arg(long)]
    pub seed_region: String,
    /// Response date.
    #[arg(long)]
    pub date: String,
    /// full, mob or dist.
    #[arg(long, default_value = "full")]
    pub model: String,
    /// Keep only regions with positive mobility and positive response.
    #[arg(long)]
    pub cut: bool,
    /// identity or log.
    #[arg(long, default_value = "identity")]
    pub transform: String,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Connectivity JSON file(s), comma separated; one per week with `--mobility-weeks`.
    #[arg(long)]
    pub connectivity: String,
    #[arg(long)]
    pub deaths: PathBuf,
    #[arg(long)]
    pub regions: PathBuf,
    #[arg(long)]
    pub seed_region: String,
    /// Response dates `start..end`; every date present in the response file is fitted.
    #[arg(long, conflicts_with = "mobility_weeks")]
    pub dates: Option<String>,
    /// Treat each connectivity file as one mobility week against a fixed `--date`.
    #[arg(long, requires = "date")]
    pub mobility_weeks: bool,
    /// Response date for `--mobility-weeks`.
    #[arg(long)]
    pub date: Option<String>,
    /// Comma-separated model kinds.
    #[arg(long, default_value = "full,mob,dist")]
    pub models: String,
    #[arg(long, default_value = "identity")]
    pub transform: String,
    /// With `--mobility-weeks`: also correlate the response with mobility and
    /// distance using these methods (comma separated: pearson, spearman).
    #[arg(long)]
    pub correlation: Option<String>,
}

#[derive(Debug, Args, Serialize, Clone)]
pub struct LagArgs {
    /// Half-width of the lag grid in days.
    #[arg(long, default_value_t = 40.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    /// pearson or hy.
    #[arg(long, default_value = "pearson")]
    pub mode: String,
    /// Grid points with fewer overlapping observations are excluded.
    #[arg(long, default_value_t = 3)]
    pub min_overlap: usize,
    /// Lags at or beyond this many days are flagged as spurious.
    #[arg(long, default_value_t = 30.0)]
    pub max_lag_days: f64,
    /// Estimates with fewer overlapping observations are flagged as spurious.
    #[arg(long, default_value_t = 10)]
    pub flag_min_overlap: usize,
    /// Death series with a raw interquartile range below this are flagged flat.
    #[arg(long, default_value_t = 1.0)]
    pub flat_iqr_floor: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct LeadlagArgs {
    /// `date,value` CSV of raw internal mobility.
    #[arg(long)]
    pub mobility: PathBuf,
    /// `date,value` CSV of raw cumulative excess deaths.
    #[arg(long)]
    pub deaths: PathBuf,
    #[command(flatten)]
    pub lag: LagArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct NetworkArgs {
    /// Directory holding `internal_mobility.csv` and `cumdeaths.csv` (`date,region,value`).
    #[arg(long)]
    pub input_dir: PathBuf,
    #[command(flatten)]
    pub lag: LagArgs,
}

/// Scenario fields; unset ones keep their defaults. Dates are ISO-8601,
/// ranges `start..end` or `lo,hi`.
#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub n_regions: Option<String>,
    #[arg(long)]
    pub gravity_exponent: Option<String>,
    #[arg(long)]
    pub lockdown_date: Option<String>,
    #[arg(long)]
    pub lockdown_strength: Option<String>,
    #[arg(long)]
    pub seed_region: Option<String>,
    #[arg(long)]
    pub planted_lag_days: Option<String>,
    #[arg(long)]
    pub noise_sigma: Option<String>,
    #[arg(long)]
    pub date_range: Option<String>,
    #[arg(long)]
    pub igg_attack_rate_scale: Option<String>,
    #[arg(long)]
    pub weekly_amplitude: Option<String>,
    #[arg(long)]
    pub gravity_scale: Option<String>,
    #[arg(long)]
    pub internal_factor: Option<String>,
    #[arg(long)]
    pub toll_scale: Option<String>,
    #[arg(long)]
    pub epi_beta1: Option<String>,
    #[arg(long)]
    pub epi_beta2: Option<String>,
    #[arg(long)]
    pub outbreak_date: Option<String>,
    #[arg(long)]
    pub background_level: Option<String>,
    #[arg(long)]
    pub background_rate: Option<String>,
    #[arg(long)]
    pub lat_range: Option<String>,
    #[arg(long)]
    pub lon_range: Option<String>,
    #[arg(long)]
    pub population_range: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// Sweep CSV file(s), comma separated.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Lag estimate JSON file(s), comma separated.
    #[arg(long)]
    pub leadlag: Option<String>,
    /// Network JSON file(s), comma separated.
    #[arg(long)]
    pub network: Option<String>,
}

pub fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(String::from).collect()
}
