//! Cocycle deformations of group-graded finite-dimensional *-algebras.
//!
//! Everything is realized with dense complex matrices: groups are Cayley
//! tables, a graded algebra is a span of matrices with a homogeneous basis,
//! and the deformation `A_ω` is the concrete span of `Σ_g λ^(ω)_g ⊗ a_g`
//! on `ℓ²(Γ) ⊗ ℂ^N`.
//!
//! Module map:
//! - [`group`]: finite groups, `ℤⁿ`, subgroups
//! - [`cocycle`]: U(1)- and ℝ-valued 2-cocycles
//! - [`twisted`]: twisted group algebras and their regular representation
//! - [`graded`]: Fell bundles as graded matrix algebras
//! - [`deform`]: the deformation itself and its structure constants
//! - [`crossed`]: crossed products by `C₀(Γ)`, untwisting, dual actions
//! - [`k0`]: block decomposition and K₀ signatures
//! - [`spectral`]: equivariant spectral triples and the index pairing

pub mod cocycle;
pub mod crossed;
pub mod deform;
pub mod graded;
pub mod group;
pub mod k0;
pub mod linalg;
pub mod spectral;
pub mod twisted;

pub use cocycle::{BilinearCocycle, CoboundaryWitness, TwoCocycleReal, TwoCocycleU1};
pub use graded::FellBundle;
pub use group::{FiniteGroup, FreeAbelianGroup, Subgroup};
pub use linalg::{CMat, C64};

/// Numerical tolerances. Every check in the crate compares against one of these.
pub mod tol {
    /// Cocycle identity, normalization and modulus.
    pub const COCYCLE: f64 = 1e-12;
    /// `check_cohomologous` and coboundary witnesses.
    pub const COHOMOLOGOUS: f64 = 1e-10;
    /// Relative reconstruction residual for span membership of inputs.
    pub const SPAN: f64 = 1e-8;
    /// Independence threshold for basis matrices.
    pub const INDEPENDENCE: f64 = 1e-8;
    /// Algebraic closure, homomorphism and intertwining identities.
    pub const CLOSURE: f64 = 1e-10;
    /// Unitarity of group-built operators.
    pub const UNITARY: f64 = 1e-12;
    /// Eigenvalue clustering in block decomposition.
    pub const CLUSTER: f64 = 1e-7;
    /// Minimal spectral gap for projection families.
    pub const GAP: f64 = 1e-6;
    /// Projection test `p* = p = p²`.
    pub const PROJECTION: f64 = 1e-8;
    /// Distance of a computed index from the nearest integer.
    pub const INTEGRALITY: f64 = 1e-6;
}

/// Seed used when a caller does not supply one.
pub const DEFAULT_SEED: u64 = 20_240_917;
