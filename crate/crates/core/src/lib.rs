//! Ergotropy, local ergotropy and their bounds for finite bipartite quantum systems.
//!
//! Operators on `S ⊗ E` use S-major ordering: row `i_S * d_E + i_E`.

pub mod assignment;
pub mod error;
pub mod ergotropy;
pub mod gpo;
pub mod local;
pub mod models;
pub mod qmat;
pub mod sdp;
pub mod system;

pub use error::{Error, Result};
pub use ergotropy::{
    classical_ergotropy, classical_local_ergotropy, delta_off, effective_local_ergotropy_product,
    global_ergotropy, hs_gap_bounds, switch_off_ergotropy, trace_norm_sum_bound, two_level_exact,
    two_level_lower_bound, ErgotropyReport,
};
pub use gpo::{decompose, gpo_basis, orthogonal_image, BlochDecomposition, GpoBasis};
pub use local::{
    build_m_matrix, optimize_local_unitary, polar_upper_bound, qubit_local_ergotropy, MMatrix,
    OptimizerConfig, StepRule,
};
pub use models::{JcParams, Sign, XxzParams};
pub use qmat::{ComplexMatrix, StateVector};
pub use sdp::{choi_cost, sdp_upper_bound, ChoiCost, SdpInstance, SdpSettings, SdpSolution};
pub use system::BipartiteSystem;
