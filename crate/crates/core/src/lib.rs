//! Lattice-dynamics toolkit for Diophantine approximation on affine
//! subspaces: exact exterior algebra, diagonal flows on the space of
//! unimodular lattices, Margulis-style height functions, exponent
//! estimators, and numerical experiments tying them together.

pub mod algebra;
pub mod dioph;
pub mod error;
pub mod height;
pub mod lattice;
pub mod scalar;
pub mod singlab;

pub use algebra::{Dims, ExtVector, ExtVectorF, ExtVectorL, ExtVectorQ, MultiIndex, QMat};
pub use error::{Error, Result};
pub use scalar::{Budget, Coeff, ExtendedReal, LogCoeff, Rat, Rat64};
