//! Lie algebra cohomology, abelian extensions and the period test for
//! integrating algebra cocycles to group extensions of matrix Lie groups.
//!
//! The crate is organised bottom-up: [`algebra`] holds structure constants,
//! modules and lattices; [`cohomology`] builds the Chevalley-Eilenberg
//! complex and evaluates group coboundaries; [`extensions`] turns cocycles
//! into brackets and group laws; [`geometry`] integrates the equivariant
//! 2-form over singular chains; [`integrability`] decides whether the periods
//! lie in the lattice.

pub mod algebra;
pub mod cohomology;
pub mod error;
pub mod extensions;
pub mod geometry;
pub mod integrability;
pub mod linalg;
pub mod par;

pub use algebra::{
    bracket, lattice_member, validate_algebra, validate_module, AlgebraVector, GroupAction, LatticeDesc,
    LatticeVerdict, LieAlgebraDesc, Membership, ModuleActionDesc, ValidationReport, Violation,
};
pub use cohomology::{
    apply_d, apply_delta, betti, build_complex_slice, coboundary_fn, is_cocycle, Cochain, ComplexSlice, GroupCochainFn,
};
pub use error::{Error, Result};
pub use extensions::{
    are_equivalent, build_algebra_extension, group_multiply, Equivalence, ExtElement, ExtensionAlgebra,
    ExtensionGroupLaw,
};
pub use geometry::{EquivariantForm, GroupPath, MatrixGroupDesc, Surface2Chain};
pub use integrability::{
    check_integrability, period, pi1_cocycle, CycleSet, IntegrabilityReport, Pi1CocycleTable, Verdict,
};
