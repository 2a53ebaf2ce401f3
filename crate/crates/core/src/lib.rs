//! Phylogenetic, geographic and stability signals in cross-lingual word
//! representations.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar for common use.

pub mod distance;
pub mod embedding;
pub mod infer;
pub mod ingest;
pub mod matrix;
pub mod quartet;
pub mod regression;
pub mod scalar;
pub mod stability;
pub mod stats;
pub mod synth;
pub mod tree;

pub use distance::{distance_matrix, DistanceMeasure};
pub use embedding::{EmbeddingTable, Layer};
pub use infer::Method;
pub use matrix::DistanceMatrix;
pub use quartet::{gqd, GqdReport};
pub use regression::{mantel_permutation_test, mrm_fit, MantelOptions, PredictorSet, RegressionResult};
pub use scalar::Scalar;
pub use tree::PhyloTree;

pub type DistanceMatrixF64 = DistanceMatrix<f64>;
pub type DistanceMatrixF32 = DistanceMatrix<f32>;
pub type EmbeddingTableF64 = EmbeddingTable<f64>;
pub type EmbeddingTableF32 = EmbeddingTable<f32>;
pub type PhyloTreeF64 = PhyloTree<f64>;
pub type PhyloTreeF32 = PhyloTree<f32>;
pub type RegressionResultF64 = RegressionResult<f64>;
pub type RegressionResultF32 = RegressionResult<f32>;

/// Any error the library can return.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Matrix(#[from] matrix::MatrixError),
    #[error(transparent)]
    Embedding(#[from] embedding::EmbeddingError),
    #[error(transparent)]
    Tree(#[from] tree::TreeError),
    #[error(transparent)]
    Distance(#[from] distance::DistanceError),
    #[error(transparent)]
    Infer(#[from] infer::InferError),
    #[error(transparent)]
    TreeMetric(#[from] quartet::TreeMetricError),
    #[error(transparent)]
    Regression(#[from] regression::RegressionError),
    #[error(transparent)]
    Predictor(#[from] regression::PredictorError),
    #[error(transparent)]
    Stability(#[from] stability::StabilityError),
}
