//! Riemannian geometry of the positive cone of a finite tracial matrix algebra.
//!
//! The ambient algebra is a direct sum of complex matrix blocks carrying a
//! weighted normalized trace `τ`. Positive invertible elements form an open
//! cone `Σ` whose tangent spaces are the Hermitian elements, equipped with
//! the trace metric `⟨x, y⟩_a = τ(x a⁻¹ y a⁻¹)`.
//!
//! Modules:
//!
//! - [`algebra`]: the tracial algebra, elements, Hermitian spectral calculus
//!   and first divided differences.
//! - [`geometry`]: geodesics, `Exp`/`Log`, distance, `dexp` and the `T_x`
//!   operator, curvature, Jacobi fields, angles and triangles.
//! - [`convexity`]: self-adjoint subspaces `H`, the double-bracket closure
//!   test and the exponential sets `M = e^H`.
//! - [`projection`]: the nearest-point map onto a convex exponential set and
//!   the factorizations built on it.
//! - [`oracles`]: slow, independent reference computations used for
//!   cross-checking.
//! - [`verify`]: randomized property suites producing machine-readable
//!   reports.
//! - [`io`]: JSON formats for elements, subspaces and results.

pub mod algebra;
pub mod convexity;
pub mod error;
pub mod geometry;
pub mod io;
pub mod oracles;
pub mod projection;
pub mod random;
pub mod verify;

pub use algebra::{
    Algebra, AlgebraElement, BlockSpec, HermitianElement, PositiveElement, SpectralDecomposition, TracialAlgebra,
};
pub use error::{Error, Result};
