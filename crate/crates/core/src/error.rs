use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: need 1 <= d < n, got n={n}, d={d}")]
    BadDims { n: usize, d: usize },
    #[error("grade {k} out of range for ambient dimension {dim}")]
    BadGrade { k: usize, dim: usize },
    #[error("projection index {i} outside legal band [{lo}, {hi}]")]
    BadProjection { i: usize, lo: usize, hi: usize },
    #[error("vector support is not contained in the expected subspace")]
    BadSupport,
    #[error("matrix shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
    #[error("matrix is not unimodular (det != 1)")]
    NotUnimodular,
    #[error("flow word is not reducible to canonical form (a diagonal factor is blocked right of a non-commuting matrix factor)")]
    WordShape,
    #[error("search budget exceeded ({limit} nodes)")]
    BudgetExceeded { limit: u64 },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
