//! Principal eigenvalues of the fractional Laplacian on an interval with
//! mixed Dirichlet and nonlocal Neumann exterior data.
//!
//! The crate is organised bottom-up:
//!
//! - [`fracops`]: kernel constants, closed-form cell integrals, distance and
//!   tail estimates, the Dini classifier and the indicator identity.
//! - [`geometry`]: domains, exterior partitions and parametric families.
//! - [`assembly`]: meshing and assembly of the nonlocal stiffness matrix.
//! - [`eigensolver`]: exterior elimination and inverse iteration.
//! - [`nonlocal_ops`]: residuals and reconstructions on discrete solutions.
//! - [`experiments`]: config-driven sweeps, rate fits and file output.

pub mod assembly;
pub mod eigensolver;
pub mod error;
pub mod experiments;
pub mod fracops;
pub mod geometry;
pub mod nonlocal_ops;
pub mod quadrature;

pub use assembly::{assemble, build_mesh, Discretization, MeshParams, Scheme, StiffnessSystem};
pub use eigensolver::{schur_reduce, smallest_eigenpair, solve_mixed, EigenResult, MixedSolution, SolverParams};
pub use error::{Error, Result};
pub use fracops::FractionalOrder;
pub use geometry::{Domain1D, ExteriorPartition, ExteriorSet, Label, PartitionFamily};
