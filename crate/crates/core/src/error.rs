//! Error type shared by every module of the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("loop edge at vertex {0}")]
    LoopEdge(u64),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(u64, u64),
    #[error("unknown vertex {0}")]
    UnknownVertex(u64),
    #[error("unknown edge {{{0}, {1}}}")]
    UnknownEdge(u64, u64),
    #[error("path enumeration exceeded cap {cap}")]
    PathExplosion { cap: usize },
    #[error("invalid iterated graph system: {}", .0.join("; "))]
    InvalidIgs(Vec<String>),
    #[error("base graph is disconnected")]
    DisconnectedBase,
    #[error("IGS has no global (phi_minus, phi_plus) orientation")]
    NotOriented,
    #[error("level {level} out of range (built levels 1..={top})")]
    LevelOutOfRange { level: usize, top: usize },
    #[error("edge budget exceeded: level {level} needs {needed} edges, budget is {budget}")]
    BudgetExceeded { level: usize, needed: u128, budget: usize },
    #[error("invalid path endpoints: {0}")]
    InvalidEndpoints(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("exponent p = {0} must exceed 1")]
    BadExponent(f64),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("density is not admissible: shortest weighted length {0}")]
    NotAdmissible(f64),
    #[error("not a unit flow: {0}")]
    NotUnitFlow(String),
    #[error("path family is empty")]
    EmptyFamily,
    #[error("path family has {0} members, above the limit")]
    TooManyPaths(usize),
    #[error("IGS is not doubling")]
    NotDoubling,
    #[error("IGS does not have the uniform scaling property")]
    NotUniformScaling,
    #[error("IGS is not conductively uniform at p = {0}")]
    NotUniform(f64),
    #[error("assumption failure: {0}")]
    AssumptionFailure(String),
    #[error("edge cannot be removed: {0}")]
    NotRemovableStructure(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    ParseError { line: usize, column: usize, message: String },
    #[error("validation error: {0}")]
    ValidationError(String),
}

impl Error {
    /// Stable variant name, used in machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::LoopEdge(_) => "LoopEdge",
            Error::DuplicateEdge(..) => "DuplicateEdge",
            Error::UnknownVertex(_) => "UnknownVertex",
            Error::UnknownEdge(..) => "UnknownEdge",
            Error::PathExplosion { .. } => "PathExplosion",
            Error::InvalidIgs(_) => "InvalidIgs",
            Error::DisconnectedBase => "DisconnectedBase",
            Error::NotOriented => "NotOriented",
            Error::LevelOutOfRange { .. } => "LevelOutOfRange",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::InvalidEndpoints(_) => "InvalidEndpoints",
            Error::Disconnected => "Disconnected",
            Error::BadExponent(_) => "BadExponent",
            Error::NonConvergence(_) => "NonConvergence",
            Error::NotAdmissible(_) => "NotAdmissible",
            Error::NotUnitFlow(_) => "NotUnitFlow",
            Error::EmptyFamily => "EmptyFamily",
            Error::TooManyPaths(_) => "TooManyPaths",
            Error::NotDoubling => "NotDoubling",
            Error::NotUniformScaling => "NotUniformScaling",
            Error::NotUniform(_) => "NotUniform",
            Error::AssumptionFailure(_) => "AssumptionFailure",
            Error::NotRemovableStructure(_) => "NotRemovableStructure",
            Error::ParseError { .. } => "ParseError",
            Error::ValidationError(_) => "ValidationError",
        }
    }
}
