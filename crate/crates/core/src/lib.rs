//! Bayesian inference for the symmetrised Boltzmann k-nearest-neighbour
//! classifier.

pub mod data;
pub mod error;
pub mod graph;
pub mod model;
pub mod normalizer;
pub mod posterior;
pub mod prediction;
pub mod samplers;

pub use error::{Error, ErrorCategory, Result};
pub use graph::{CovariateMatrix, DistanceMetric, NeighborGraph, NewPointNeighbors};
pub use data::{Dataset, LoadOptions, SplitSpec, Standardizer};
pub use model::{Labels, Model, ModelParams, Prior};
pub use normalizer::{ExactNormalizer, GridSpec, LogNormalizer, ZGrid};
pub use posterior::{
    run_chain, ChainConfig, ChainTrace, InnerSampler, Method, MollerConfig, PluginEstimate,
    PosteriorContext, ProposalConfig, Target,
};
pub use prediction::{PredictiveSummary, Predictor};
