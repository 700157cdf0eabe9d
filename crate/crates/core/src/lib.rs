//! Structure learning for large linear structural equation models.
//!
//! The solvers alternate one unconstrained optimization step on a
//! sparsity-regularized least-squares objective with a greedy
//! maximum-acyclic-subgraph projection, keeping the best acyclic iterate.

pub mod datagen;
pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod mas;
pub mod metrics;
pub mod objective;
pub mod solver;

pub use error::{Error, Result};
pub use graph::{AdjacencyMask, NodeOrder, WeightMatrix};
pub use objective::Dataset;
