//! hp-version discontinuous Galerkin discretizations of the Poisson problem
//! on the unit square, solved with W-cycle multigrid.
//!
//! The crate is organised bottom-up:
//!
//! - [`mesh`]: structured quadrilateral/triangular meshes and nested hierarchies
//!   obtained by uniform (red) refinement.
//! - [`space`]: orthonormal modal bases, quadrature, and the discrete spaces
//!   `V_k` with their mesh-dependent inner product.
//! - [`assembly`]: the symmetric DG family (SIPG, SIPG(δ), LDG and the
//!   Bassi/Brezzi lifting-stabilized forms), lifting operators, load vectors
//!   and the DG norm.
//! - [`transfer`]: prolongation by natural embedding, restriction as its
//!   adjoint, and inherited (Galerkin) coarse operators.
//! - [`multigrid`]: Richardson smoothing, the W-cycle, the outer iteration
//!   with convergence-factor measurement, and a CG baseline.
//! - [`analysis`]: dense spectral tools that measure smoothing and
//!   approximation constants, explicit error-propagation operators and
//!   discretization orders.
//! - [`experiment`]: hierarchy recipes and the convergence-factor and
//!   iteration-count sweeps built on them.
//!
//! Operators are stored as `(M, h_k^2)` where `M_ij = A_k(φ_j, φ_i)`; the
//! operator acting on coefficient vectors is `h_k^{-2} M`.

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod mesh;
pub mod multigrid;
pub mod space;
pub mod transfer;

pub use error::{Error, Result};
