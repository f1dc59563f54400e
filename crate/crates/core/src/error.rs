use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("point ({x}, {y}) lies outside the workspace")]
    OutsideWorkspace { x: f64, y: f64 },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("requested {requested} targets but the map only has {cells} cells")]
    TooManyTargets { requested: usize, cells: usize },

    #[error("time {t} outside trajectory interval [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error("no feasible duration found up to {max_duration:.3} s (goal ({gx:.3}, {gy:.3}))")]
    Infeasible { max_duration: f64, gx: f64, gy: f64 },

    #[error("round {round}, agent {agent}: {source}")]
    Round {
        round: usize,
        agent: usize,
        #[source]
        source: Box<SearchError>,
    },
}

pub type Result<T, E = SearchError> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> SearchError {
    SearchError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
