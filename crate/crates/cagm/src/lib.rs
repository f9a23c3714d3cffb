//! Community-preserving synthesis of attributed social graphs.
//!
//! This crate fits a generative model (C-AGM) to an undirected graph whose
//! vertices carry binary attributes, and samples synthetic graphs from the
//! fitted model. The model is a quintuple: a community partition, an edge
//! model driven by intra-/inter-community degrees and triangle counts, a
//! per-community Bernoulli attribute model, and per-community distributions
//! of an edge-level attribute-similarity feature. Fitting can be exact or
//! differentially private; in the private path every released quantity is
//! covered by an explicit budget ledger.
//!
//! The pieces:
//!
//! * [`graph`] — attributed graphs, community partitions, structural census.
//! * [`community`] — modularity, the attribute auxiliary graph, and a
//!   private divisive community search.
//! * [`dp`] — Laplace and exponential mechanisms, plus the ladder mechanism
//!   for triangle counts built on local sensitivity at distance `t`.
//! * [`params`] — model parameters, exact and private estimators, the
//!   privacy-budget split, and the on-disk parameter format.
//! * [`sampler`] — edge-set generation with triangle enforcement, attribute
//!   sampling, and the rejection sampler that couples edges to attributes.
//! * [`eval`] — fidelity metrics comparing an input graph with synthetic
//!   output, including a built-in Louvain detector.
//! * [`synth`] — planted-partition and Chung-Lu generators used by the
//!   examples and benchmarks as input material.
//! * [`cli`] — the command front end used by the `cagm` binary.
//!
//! Every sampling or private routine takes a caller-supplied RNG, so a fixed
//! seed reproduces a run bit for bit. The examples directory demonstrates
//! each capability end to end; start with `fit_and_sample`.

pub mod cli;
pub mod community;
pub mod dp;
pub mod eval;
pub mod graph;
pub mod io;
pub mod params;
pub mod sampler;
pub mod synth;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
