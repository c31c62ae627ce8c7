//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by case construction, simulation and analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// Case file failed structural validation (bad dimensions, missing
    /// fields, non-positive parameters, duplicate ids, ...).
    #[error("malformed case: {0}")]
    MalformedCase(String),

    /// The bus-admittance submatrix was singular during Kron reduction.
    #[error("unreducible network: {0}")]
    UnreducibleNetwork(String),

    /// The supplied power-flow snapshot does not satisfy the network
    /// equations within tolerance.
    #[error("inconsistent snapshot: {0}")]
    InconsistentSnapshot(String),

    /// Newton iteration for the prefault operating point did not converge.
    #[error("no prefault equilibrium: {0}")]
    NoEquilibrium(String),

    /// A state variable became non-finite during integration.
    #[error("numerical blow-up at t={0}")]
    NumericalBlowUp(f64),

    /// `refine_crossing` was called with same-signed nonzero endpoints.
    #[error("no crossing: endpoints {0} and {1} have the same sign")]
    NoCrossing(f64, f64),

    /// Both bracket endpoints of a CCT search gave the same verdict.
    #[error("invalid CCT bracket: {0}")]
    InvalidCctBracket(String),

    /// A machine or bus identifier was not found in the case.
    #[error("unknown identifier: {0}")]
    UnknownId(String),

    /// Case file could not be read.
    #[error("case not found: {0}")]
    CaseNotFound(String),

    /// JSON syntax error in a case file.
    #[error("malformed case: {0}")]
    Json(#[from] serde_json::Error),

    /// Mismatched or invalid argument combination.
    #[error("{0}")]
    Invalid(String),
}
