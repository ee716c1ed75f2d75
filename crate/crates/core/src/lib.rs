//! Hyperedge prediction on undirected hypergraphs.
//!
//! The crate scores whether an arbitrary node set forms a hyperedge. Each
//! candidate is described by its q-hop local environment: the incidence
//! structure of the nearby edges and an affinity matrix of hop distances
//! from every nearby node to every candidate member. A bipartite
//! message-passing network over that structure, together with the top
//! singular values of the affinity matrix, feeds a binary classifier.
//!
//! Modules, bottom-up:
//! - [`hypergraph`]: storage, loaders, distances and local extraction;
//! - [`spectrum`]: singular-value features of the affinity matrix;
//! - [`autodiff`]: the dense tensor tape and Adam;
//! - [`model`]: the network itself;
//! - [`pipeline`]: negative sampling, cross-validation, training, metrics.

pub mod autodiff;
pub mod hypergraph;
pub mod model;
pub mod pipeline;
pub mod spectrum;

use thiserror::Error;

pub use hypergraph::{Hypergraph, LocalEnvironment};
pub use model::{ModelConfig, NormScenario, SetPooling, SnalsModel};
pub use spectrum::SpectrumFeature;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Hypergraph(#[from] hypergraph::HypergraphError),
    #[error(transparent)]
    Spectrum(#[from] spectrum::SpectrumError),
    #[error(transparent)]
    Autodiff(#[from] autodiff::AutodiffError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Pipeline(#[from] pipeline::PipelineError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialisation error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the failure is numeric (non-finite values, loss blow-up) as
    /// opposed to bad input data.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Spectrum(spectrum::SpectrumError::NonFinite { .. }) => true,
            Error::Autodiff(autodiff::AutodiffError::NonFiniteLoss(_)) => true,
            Error::Model(model::ModelError::Autodiff(autodiff::AutodiffError::NonFiniteLoss(_))) => true,
            Error::Model(model::ModelError::Spectrum(_)) => true,
            Error::Pipeline(pipeline::PipelineError::NonFiniteLoss { .. }) => true,
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
