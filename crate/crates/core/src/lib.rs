//! Degree residues of random graphs modulo `q`.
//!
//! Sampling and exact search for vertex subsets whose induced degrees are all
//! congruent to a target residue, exact character-sum probabilities, and the
//! threshold calculus that predicts where such subsets stop existing.

pub mod char_sums;
pub mod combinat;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod partition;
pub mod rng;
pub mod subgraph;
pub mod thresholds;

pub use error::{Error, Result};
pub use graph::{degrees_mod, is_good, is_good_alpha, sample_gnp, Graph, ModParams, ResidueVector, VertexSet};
pub use thresholds::DistributionSpec;
