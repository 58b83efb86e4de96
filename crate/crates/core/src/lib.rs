//! Network creation games with homophilic agents.
//!
//! Agents of several types build a network; each pays for its edges (with a
//! discount or surcharge depending on neighbor types) plus its sum of
//! distances. The crate checks pairwise stability, builds known stable
//! networks, measures segregation and simulates improving-move dynamics.

pub mod constructions;
pub mod cost;
pub mod dynamics;
pub mod experiment;
pub mod graph;
pub mod init;
pub mod metrics;
pub mod stability;

pub use cost::{CostModel, CostParams, Model, Rational};
pub use graph::{DistanceMatrix, Edge, Graph, Population};
pub use stability::{is_approx_stable, is_pairwise_stable, Mode, Move, StabilityReport};
