use thiserror::Error;

use crate::sdp::InfeasibilityCertificate;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },

    #[error("expected numerical rank 1, found {rank}")]
    NotRankOne { rank: usize },

    #[error("expected numerical rank 2, found {rank}")]
    NotRankTwo { rank: usize },

    #[error("expected numerical rank 3, found {rank}")]
    NotRankThree { rank: usize },

    #[error("expected numerical rank at least 4, found {rank}")]
    NotHighRank { rank: usize },

    #[error("matrix is not in the moment cone (constraint residual {residual:e}, min eigenvalue {min_eigenvalue:e})")]
    NotInCone { residual: f64, min_eigenvalue: f64 },

    #[error("rotation hypothesis violated: inner products differ by {gap:e}")]
    HypothesisViolated { gap: f64 },

    #[error("degenerate rank-2 configuration: best reconstruction error {error:e}")]
    DegenerateConfiguration { error: f64 },

    #[error("no linear dependency found among the E-matrices (smallest Gram eigenvalue {eigenvalue:e})")]
    NoDependency { eigenvalue: f64 },

    #[error("decomposition failed in the {case} case: {detail}")]
    DecompositionFailed { case: &'static str, detail: String },

    #[error("negative atom weight {0}")]
    NegativeWeight(f64),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("polynomial has no sum-of-squares representation")]
    InfeasibleInput(Box<InfeasibilityCertificate>),

    #[error("no atom with a negative value was found (certificate violation {violation:e})")]
    WitnessNotFound { violation: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
