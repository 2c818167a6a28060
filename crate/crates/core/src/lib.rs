//! Weighted greedy (Leja-type) energy sequences on discretized conductors.
//!
//! The crate is organized bottom-up:
//!
//! - [`kernel`]: Riesz / logarithmic interactions and discrete energies,
//! - [`field`]: the catalog of external fields,
//! - [`conductor`]: finite candidate sets,
//! - [`selector`]: greedy, block-greedy and brute-force optimal configurations,
//! - [`equilibrium`]: closed-form and discrete equilibrium references,
//! - [`analysis`]: energy, Robin-constant and equidistribution diagnostics.

pub mod analysis;
pub mod conductor;
pub mod equilibrium;
pub mod error;
pub mod field;
pub mod kernel;
pub mod quadrature;
pub mod selector;

pub use conductor::CandidateSet;
pub use equilibrium::EquilibriumReference;
pub use error::{Error, Result};
pub use field::{FieldKind, FieldSpec};
pub use kernel::{Configuration, KernelSpec};
pub use selector::{BlockOptions, BlockStrategy, GreedyTrace, Start};
