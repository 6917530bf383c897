//! Exact computational homological algebra over prime fields.
//!
//! The crate builds finite-dimensional local algebras and their tensor
//! powers, computes minimal free resolutions and Matlis-dual injective
//! resolutions, forms windows of tensor-power complexes with multi-index
//! bookkeeping, and certifies cycle / boundary / obstruction facts about
//! distinguished cocycles in them. Certificates are deterministic: fixed
//! pivoting, fixed basis orders, byte-stable serialization.

pub mod algebra;
pub mod certificate;
pub mod complex;
pub mod field;
pub mod linalg;
pub mod module;
pub mod resolution;
pub mod ringspec;
pub mod stage;
pub mod tensorcx;

pub use algebra::{AlgebraError, AlgebraMorphism, FiniteDimAlgebra, LocalCertificate};
pub use field::{FieldError, PrimeField};
pub use linalg::{
    intersect_affine_with_kernel, kernel, rref, rref_rank, solve_affine, AffineSolutionSet,
    Backend, Elimination, LinAlgError, Matrix,
};
pub use module::{
    annihilation_profile, baer_injectivity_test, enumerate_ideals, find_module_isomorphism,
    AnnihilationProfile, BaerBudget, BaerOutcome, FDModule, ModuleError, ModuleMap,
};
pub use complex::{Cochain, CochainComplex, ComplexError};
pub use resolution::{
    dualize_to_injective_resolution, minimal_free_resolution, FreeResolution,
    InjectiveResolution, ResolutionError,
};
pub use tensorcx::{tensor_complexes, MultiIndexedComplex, Summand};
