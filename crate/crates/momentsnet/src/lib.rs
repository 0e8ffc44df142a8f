//! Learning-free convolutional feature networks built from classical image
//! moment kernels, with binary hashing, block-histogram pooling, a linear
//! classifier head and a PCA-filter baseline.

pub mod classifier;
pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod kernels;
pub mod pca;
pub mod pipeline;
pub mod selfcheck;

pub use grid::Grid;
