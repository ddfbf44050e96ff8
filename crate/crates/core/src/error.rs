use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid block schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("level {level} exceeds the cached schedule depth {max_level}")]
    LevelOutOfRange { level: usize, max_level: usize },
    #[error("index {index} lies beyond the evaluable horizon {horizon}")]
    OutOfHorizon { index: u64, horizon: u64 },
    #[error("index {0} is out of range")]
    IndexOutOfRange(String),
    #[error("internal consistency failure: {0}")]
    Infeasible(String),
    #[error("budget of {budget} evaluations exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("stride {stride} is coarser than the allowed maximum {max}")]
    StrideTooCoarse { stride: u64, max: u64 },
    #[error("polyline vertex {0} coincides with the winding center")]
    DegenerateWinding(usize),
    #[error("no grid point of resolution 1/{0} lies in the target region")]
    EmptyGrid(String),
}
