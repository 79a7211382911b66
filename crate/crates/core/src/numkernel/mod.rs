//! Numeric primitives shared by every pipeline stage.

mod dense;
mod eigen;
mod kmeans;
mod rng;
mod sparse;

pub use dense::DenseMatrix;
pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use kmeans::{kmeans, KMeansOptions, KMeansResult};
pub use rng::SeededRng;
pub use sparse::{SymmetricBuilder, SymmetricSparseMatrix};
