use thiserror::Error;

/// Errors raised by the simulator, the samplers and the compiler.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("value {value} out of range [0, {bound})")]
    OutOfRange { value: usize, bound: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("enumeration of {required} items exceeds the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("refusing to enumerate: {0}")]
    GuardExceeded(String),

    #[error("partial table has no entry for index {0}")]
    MissingImageEntry(usize),

    #[error("input {0:?} is outside the function's domain")]
    OffDomain(Vec<usize>),

    #[error("oracle is incompatible with this call: {0}")]
    IncompatibleOracle(String),

    #[error("gadget ancilla left entangled (residual weight {0:e})")]
    AncillaNotClean(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
