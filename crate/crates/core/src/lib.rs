//! Spectral community detection for sparse d-uniform hypergraphs.
//!
//! The toolkit generates two-community hypergraph stochastic block models in
//! the constant-expected-degree regime, builds the length-l self-avoiding-walk
//! matrix B^(l), and clusters by the sign of its second eigenvector. Alongside
//! the detection pipeline it carries the verification machinery the method
//! rests on: the centered-matrix expansion identity, BFS neighborhood growth
//! statistics, and the multi-type Poisson Galton-Watson hypertree with its
//! closed-form martingale moments.

pub mod combin;
pub mod gwtree;
pub mod hypergraph;
pub mod io;
pub mod localstats;
pub mod matrix;
pub mod model;
pub mod saw;
pub mod spectral;

pub use gwtree::{GWConfig, GenerationCounts, RootedSpinTree};
pub use hypergraph::{Hypergraph, SpinAssignment};

pub use matrix::SparseSymMatrix;
pub use model::{DerivedRates, ModelParams};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("size guard violated: {0}")]
    SizeGuard(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
