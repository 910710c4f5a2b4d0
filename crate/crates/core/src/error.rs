use crate::lattice::Site;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Two candidates in an argmax/argmin were bit-equal. With continuous
    /// weights this has probability zero, so it points at an RNG or logic fault.
    #[error("exact tie detected at site {0}")]
    TieDetected(Site),

    #[error("rectangle of {area} cells exceeds the enumeration limit of {limit}")]
    RectangleTooLarge { area: usize, limit: usize },

    #[error("{0} reached the boundary of the computed rectangle")]
    Truncated(&'static str),

    #[error("site {0} lies outside the grid")]
    OutOfGrid(Site),

    #[error("time {t} is beyond the recorded horizon {horizon}")]
    OutOfHorizon { t: f64, horizon: f64 },

    #[error("{name} = {value} is outside its domain")]
    Domain { name: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("window [{left}, {right}] is too small: {reason}")]
    WindowTooSmall {
        left: i64,
        right: i64,
        reason: &'static str,
    },

    #[error("window edge reached at site {site} (t = {t})")]
    WindowBreach { t: f64, site: i64 },

    #[error("Poisson epochs collide at t = {0}")]
    ClockCollision(f64),

    #[error("site {missing} has not interchanged by the horizon")]
    IncompleteRectangle { missing: Site },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("coupling violated: {0}")]
    CouplingViolation(Box<crate::exclusion::Violation>),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("resource budget exceeded: {0}")]
    Budget(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
