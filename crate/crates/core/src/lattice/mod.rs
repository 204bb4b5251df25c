//! Lattice presentations by flow words, short-vector enumeration, integral
//! decomposables, and Minkowski certificates.

pub mod decomposable;
pub mod enumerate;
pub mod minkowski;
pub mod word;

pub use decomposable::{enumerate_decomposables, IntegralDecomposable};
pub use enumerate::{
    enumerate_lattice_sup_ball, enumerate_short_vectors, enumerate_sup_ball, systole, ShortVector,
};
pub use minkowski::{minkowski_certificate, MinkowskiCertificate};
pub use word::{Evaluated, Factor, FlowWord, LatticePoint};
