//! Pointwise curvature algebra of almost Hermitian structures.
//!
//! A [`HermitianContext`] fixes a metric `g` and an almost complex structure `J`
//! on a real vector space of dimension `2m`. Algebraic curvature tensors over it
//! live in [`CurvatureTensor`]. The [`lab`] module turns the holomorphic and
//! antiholomorphic plane conditions into linear constraint systems and checks
//! the resulting constancy, `RK` and model-form statements numerically.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod curvature;
pub mod error;
pub mod exchange;
pub mod generators;
pub mod hermitian;
pub mod lab;
pub mod linalg;
pub mod report;

pub use curvature::{
    constancy_report, evaluate, fit_model, holomorphic_sectional_curvature, model_tensor,
    project_to_curvature, r1_tensor, r2_tensor, rk_defect, sectional_curvature, Constancy,
    CurvatureKind, CurvatureTensor, ModelParameters, StructureResiduals,
};
pub use error::{Error, Result};
pub use generators::{generate, perturb, GeneratorKind, GeneratorSpec};
pub use hermitian::{
    classify_subspace, gram_schmidt, kahler_angle, plane_with_angle, sample_adapted_pair, seeded,
    HermitianContext, Plane, SubspaceKind, Vector,
};
pub use lab::{ConstraintSystem, Lab, VerifierVerdict};

/// Residual bound for structural invariants (J² = −I, orthonormality, tensor symmetries).
pub const TOL_STRUCTURE: f64 = 1e-10;
/// Relative singular-value threshold for rank and independence decisions.
pub const TOL_RANK: f64 = 1e-8;
/// Bound for verifier checks, relative to the tensor norm.
pub const TOL_VERIFY: f64 = 1e-8;
