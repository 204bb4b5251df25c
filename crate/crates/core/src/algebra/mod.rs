//! Exact exterior algebra over Q, the diagonal flows, and their induced
//! actions on exterior powers.

pub mod affine_rank;
pub mod dims;
pub mod ext_vector;
pub mod flows;
pub mod matrix;
pub mod multi_index;
pub mod plucker;

pub use affine_rank::{affine_map_rank, AffineRank};
pub use dims::Dims;
pub use ext_vector::{act_mat, wedge, ExtVector, ExtVectorF, ExtVectorL, ExtVectorQ, ProjNorms};
pub use flows::{
    act_flow, b_block_weight, coord_weight, index_weight, unipotent_a, unipotent_s, unipotent_x,
    unipotent_z, FlowKind, GroupElement,
};
pub use matrix::QMat;
pub use multi_index::MultiIndex;
pub use plucker::{is_decomposable, plucker_residuals};
