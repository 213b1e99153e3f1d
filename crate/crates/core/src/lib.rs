//! # cdforge
//!
//! Bakry–Émery Γ-calculus on weighted, locally finite graphs.
//!
//! The crate is organised around the objects the calculus needs:
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`graph`] | weighted graphs, vertex sets, scalar fields, balls, JSON I/O |
//! | [`generate`] | deterministic test-corpus generators |
//! | [`gamma`] | the μ-Laplacian, Γ, Γ₂, Γ̃₂ and their local quadratic forms |
//! | [`curvature`] | CD(n,κ) / CDE′(n,κ) checks and optimal per-vertex constants |
//! | [`heat`] | Dirichlet spectra, heat kernels, the heat semigroup, exhaustion limits |
//! | [`inequalities`] | semigroup gradient bounds, (reverse) Poincaré inequalities, derivative identities |
//!
//! Curvature is always passed as a lower bound `kappa`: the condition
//! `Γ₂(f) ≥ (1/n)(Δf)² + κΓ(f)`. Semigroup bounds therefore carry the
//! factor `e^{-2κt}`.
//!
//! ```
//! use cdforge::generate::{generate, Family, GenerateParams};
//! use cdforge::curvature::{cd_max_k, Dimension};
//!
//! let k3 = generate(Family::Complete, &GenerateParams::with_n(3)).unwrap();
//! let res = cd_max_k(&k3, "0", Dimension::Infinite).unwrap();
//! assert!((res.k_max - 2.5).abs() < 1e-9);
//! ```

pub mod curvature;
pub mod error;
pub mod expm;
pub mod format;
pub mod gamma;
pub mod generate;
pub mod graph;
pub mod heat;
pub mod heat_properties;
pub mod inequalities;
pub mod linalg;
pub mod optimize;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{ExhaustionPlan, ScalarField, VertexSet, WeightedGraph};
