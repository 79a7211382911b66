//! Sparse-dense subspace clustering.
//!
//! The pipeline has three stages:
//!
//! 1. [`imc`] learns a sparse self-expressive coefficient matrix by greedy
//!    Pearson-correlation pursuit and symmetrizes it into an affinity matrix.
//! 2. An optional dense stage revises the affinity: [`pce`] rewrites
//!    ternary-unstable triples, [`densify`] relaxes simulated distances through
//!    one intermediate point.
//! 3. [`spectral`] partitions the affinity graph by normalized-cut spectral
//!    clustering.
//!
//! [`metrics`] scores a partition against ground truth, [`datagen`] produces
//! synthetic union-of-subspaces data, and [`io`] / [`pipeline`] hold the file
//! formats and the end-to-end driver used by the command-line tool.

pub mod affinity;
pub mod datagen;
pub mod densify;
pub mod error;
pub mod imc;
pub mod io;
pub mod metrics;
pub mod numkernel;
pub mod pce;
pub mod pipeline;
pub mod spectral;

pub use affinity::AffinityMatrix;
pub use datagen::{generate, DataMatrix, SubspaceSpec};
pub use error::{Error, Result};
pub use imc::CoefficientMatrix;
pub use numkernel::SeededRng;
pub use spectral::ClusterAssignment;
