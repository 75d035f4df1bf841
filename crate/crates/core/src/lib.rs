//! hp virtual element method for the Poisson problem `-Δu = f` on polygonal
//! meshes of the unit square.
//!
//! The crate is organised bottom-up:
//!
//! - [`mesh`]: polygonal meshes, the four generator families, regularity
//!   checks and the `polymesh 1` text format.
//! - [`quadrature`]: Gauss / Gauss-Lobatto edge rules, polygon rules by fan
//!   sub-triangulation and a Green's theorem moment oracle.
//! - [`poly_basis`]: scaled monomial, L²-scaled monomial and Legendre-type
//!   polynomial bases on a cell.
//! - [`vem_local`]: degrees of freedom, the energy projector, the stabilized
//!   local stiffness and the load vector.
//! - [`gram_schmidt`]: orthonormalization of the internal dofs against the
//!   discrete bilinear form.
//! - [`assembly`]: global numbering, Dirichlet elimination, sparse Cholesky
//!   solve and condition numbers.
//! - [`harness`]: test problems, error norms and convergence studies.

pub mod assembly;
pub mod error;
pub mod gram_schmidt;
pub mod harness;
pub mod mesh;
pub mod poly_basis;
pub mod quadrature;
pub mod vem_local;

pub use error::{Error, Result};
pub use mesh::{PolygonMesh, Point};
pub use poly_basis::BasisKind;
