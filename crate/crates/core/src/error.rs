use thiserror::Error;

/// Errors raised when model inputs do not fit together.
///
/// Indices carried here are 0-based; `Display` renders them 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },
    #[error("row {} has {found} entries, expected {expected}", .row + 1)]
    RaggedMatrix {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("threshold order violated: r1={r1} must be < r2={r2}")]
    ThresholdOrder { r1: f64, r2: f64 },
    #[error("travel time to point {} from station {} is not finite and >= 0: {value}", .point + 1, .station + 1)]
    InvalidTravelTime {
        point: usize,
        station: usize,
        value: f64,
    },
    #[error("penalty M[{}][{}] is not finite and >= 0: {value}", .station + 1, .ambulance + 1)]
    InvalidPenalty {
        station: usize,
        ambulance: usize,
        value: f64,
    },
    #[error("ambulance {} assigned to unknown station {}", .ambulance + 1, .station + 1)]
    UnknownStation { ambulance: usize, station: usize },
    #[error("station {} holds {load} ambulances, capacity {capacity}", .station + 1)]
    CapacityExceeded {
        station: usize,
        load: u32,
        capacity: u32,
    },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("brute force would enumerate {leaves} deployments, limit is {limit}")]
    TooLarge { leaves: f64, limit: f64 },
}
