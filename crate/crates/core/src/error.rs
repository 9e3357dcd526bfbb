use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: unknown region id `{id}`")]
    UnknownRegion { line: u64, id: String },

    #[error("line {line}: negative count {count}")]
    NegativeCount { line: u64, count: f64 },

    #[error("line {line}: duplicate record for ({date}, {origin}, {destination})")]
    DuplicateRecord {
        line: u64,
        date: String,
        origin: String,
        destination: String,
    },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("period {period} is outside the series date range {range}")]
    PeriodOutOfRange { period: String, range: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("design matrix is rank deficient: column `{0}` is collinear with earlier columns")]
    RankDeficient(String),

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("cannot take log of non-positive mobility for region `{0}`; apply the cut first")]
    NonPositiveMobility(String),

    #[error("degenerate normalization: series is constant")]
    DegenerateNormalization,

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("no admissible lag: every grid point left fewer than {0} overlapping observations")]
    NoAdmissibleLag(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
