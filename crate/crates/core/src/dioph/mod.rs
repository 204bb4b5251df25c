//! Diophantine exponents of affine subspaces: the classical exponent
//! omega(A), its geometric (hyperplane-distance) formulation, and the
//! exponent-relation and dimension-bound formulas.

pub mod approx;
pub mod bounds;
pub mod geometry;

pub use approx::{omega_estimate, AffineParam, BestApproxRecord, OmegaEstimate};
pub use bounds::{dim_bound, dim_bound_inf, dirichlet_floor, omega_lower_from_rho, rho_bound};
pub use geometry::{omega_geometric, proj_distance, GeomRecord, OmegaGeometric, RationalHyperplane};
