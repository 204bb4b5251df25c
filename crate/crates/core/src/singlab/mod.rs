//! Laboratory for singular vectors on affine subspaces: Dirichlet-decay
//! profiles of single points, divergence sampling over the parameter cube
//! with box-counting dimension estimates, excursion statistics of the
//! smoothed height along the diagonal flow, and Monte Carlo verification of
//! the contraction rates the dimension bounds rest on.

pub mod boxdim;
pub mod excursion;
pub mod profile;
pub mod verify;

pub use boxdim::{divergence_flag, sample_ea, EaSample};
pub use excursion::{excursion_stats, z_measure, ExcursionStats};
pub use profile::{
    dirichlet_profile, divergence_profile, spearman, DivergenceProfile, SingularityProfile,
    Verdict,
};
pub use verify::{
    contraction_report, dplus_measure, near_rational_param, ContractionReport, DplusEstimate,
    SampleSpec, SlopeCheck,
};
