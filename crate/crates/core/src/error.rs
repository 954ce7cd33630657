use thiserror::Error;

/// Errors raised by the core algorithms.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoreError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown symbol '{symbol}' at line {line}, column {column}")]
    UnknownSymbol {
        symbol: String,
        line: usize,
        column: usize,
    },

    #[error("rule {lhs} -> {rhs} is not shortlex-decreasing")]
    RuleNotDecreasing { lhs: String, rhs: String },

    #[error("peripheral generator '{0}' is not a generator of the group")]
    PeripheralNotInGroup(String),

    #[error("peripheral generators are not closed under inversion: '{0}' lacks its inverse")]
    PeripheralNotInverseClosed(String),

    #[error("rewriting system is not confluent: {word} reduces to both {left} and {right}")]
    NonConfluent {
        word: String,
        left: String,
        right: String,
    },

    #[error("peripheral subgroup is not normal-form closed: {word} has normal form {normal_form}")]
    PeripheralNotClosed { word: String, normal_form: String },

    #[error("resource cap exceeded: {what} (limit {limit})")]
    CapExceeded { what: &'static str, limit: usize },

    #[error("vertex {0} is not in the ball")]
    UnknownVertex(usize),

    #[error("steps {0} and {1} are not adjacent in the Cayley graph")]
    NotAdjacent(usize, usize),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("no valid interior endpoint pairs (radius {radius}, margin {margin})")]
    NoInteriorPairs { radius: usize, margin: usize },

    #[error("dimension {requested} exceeds the complex's cap {cap}")]
    DimensionExceeded { requested: usize, cap: usize },

    #[error("unknown coset {0}")]
    UnknownCoset(usize),

    #[error("inclusion fails: simplex {0:?} is missing from the target")]
    NotIncluded(Vec<usize>),

    #[error("chain is not a cycle")]
    NotACycle,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integer overflow in 64-bit chain arithmetic")]
    Overflow,
}

impl CoreError {
    /// True for errors caused by a configured resource cap.
    pub fn is_resource(&self) -> bool {
        matches!(self, CoreError::CapExceeded { .. })
    }
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
