//! Latent random step factorization of weighted undirected graphs.
//!
//! A graph `A` is approximated by a bipartite graph `V` onto `m` latent nodes and a
//! small latent graph `W`, such that one random step on `A` is close to a step
//! along `V`, a step inside `W`, and a step back along `V`. The fitted `V` gives a
//! soft clustering of the nodes; the implied graph `B` is a rank-`m` simplification
//! of `A`. Choosing `W` selects the structure being searched for: self-loops find
//! homophilous clusters, a single edge finds a (soft) max-cut, a triangle a 3-way cut.

pub mod cli;
pub mod error;
pub mod eval;
pub mod graph;
pub mod ingest;
pub mod model;
pub mod optimizer;

pub use error::{Error, Result};
pub use graph::{AdjacencyMatrix, Matrix, TransitionMatrix};
pub use model::{BipartiteGraph, LatentGraph, LatentStepModel, ParameterSet};
pub use optimizer::{fit, FitConfig, FitResult, LatentSpec};
