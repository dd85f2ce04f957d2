use thiserror::Error;

use crate::fibering::NehariRoots;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("unusable grid: {0}")]
    InvalidGrid(String),
    #[error("sample length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("density has a negative sample {value:e} at node {index}")]
    NegativeDensity { index: usize, value: f64 },
    #[error("operation needs a nontrivial pair")]
    TrivialPair,
    #[error("pair is off the Nehari manifold (defect {defect:e}, A = {a:e})")]
    OffManifold { defect: f64, a: f64 },
    #[error("requested Nehari branch is absent ({} roots)", .0.count)]
    NoBranch(NehariRoots),
    #[error("beta = 0 admits no strict energy drop")]
    NoStrictDrop,
    #[error("shooting failed: {0}")]
    Shooting(String),
    #[error("parameters outside the regime of this operation: {0}")]
    OutOfRegime(String),
    #[error("bumps overlap: spacing {spacing} must exceed 2*R0 = {}", 2.0 * .r0)]
    Overlap { spacing: f64, r0: f64 },
    #[error("input is not an approximate solution (residual {0:e})")]
    NotASolution(f64),
}
