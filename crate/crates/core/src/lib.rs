//! Structural disparity toolkit for node classification.
//!
//! Graphs mixing homophilic and heterophilic nodes are synthesized with a
//! two-class contextual stochastic block model ([`csbm`]), perturbed with
//! targeted edge additions ([`perturb`]), classified with aggregation +
//! MLP models ([`models`]) and diagnosed with subgroup metrics
//! ([`metrics`]), closed-form posterior and separability results plus
//! generalization-bound terms ([`theory`]), and structural OOD splits
//! ([`ood`]).
//!
//! Everything operates on an immutable [`GraphBundle`].

pub mod aggregate;
pub mod csbm;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod homophily;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod models;
pub mod ood;
pub mod perturb;
pub mod rng;
pub mod stats;
pub mod theory;

pub use aggregate::{aggregate, AggregatedFeatures, AggregationMode};
pub use error::{Error, Result};
pub use graph::{GraphBundle, Masks};
pub use homophily::{node_homophily, HomophilyProfile};
pub use io::{load_bundle, save_bundle};
pub use matrix::Matrix;

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
