//! Matrix groups, paths, singular 2-chains and the equivariant 2-form.

pub mod chain;
pub mod derivation;
pub mod form;
pub mod group;
pub mod path;
pub mod quadrature;

pub use chain::{check_closed, cube_boundary, open_edges, pi_chain, sigma_chain, Domain, Patch, Surface2Chain};
pub use derivation::{
    connection_curvature_check, derivation_d2, gamma_recovers_omega, DEFAULT_FD_STEP, DEFAULT_FD_TOL,
};
pub use form::{
    eval_equivariant, gamma_cocycle, holonomy, surface_integral, EquivariantForm, Holonomy, DEFAULT_QUAD_ORDER,
    DEFAULT_QUAD_TOL,
};
pub use group::{MatrixGroupDesc, DEFAULT_MEMBERSHIP_TOL};
pub use path::{pointwise_product, GroupPath, PathCheck, Reparam, DEFAULT_DERIV_TOL, H_GEO};
