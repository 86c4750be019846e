//! Credibility inference for news items from the hashtags used to spread them.
//!
//! The pipeline builds a co-occurrence graph over hashtags, extends it with
//! indirect (multi-hop) relations through a truncated power series of the
//! normalized adjacency, seeds per-hashtag credibility from labeled news, and
//! propagates it with a graph-regularized quadratic cost. Unlabeled news are
//! then scored by summing the credibility of the hashtags in their posts.
//!
//! Modules:
//! - [`corpus`]: data model, JSONL ingest, time windows, splits, synthetic corpora.
//! - [`graph`]: direct graph, normalization, all-relations closure, export.
//! - [`credibility`]: initialization, propagation solvers, cost, prediction.
//! - [`harness`]: experiments, metrics, sweeps and descriptive analyses.

pub mod corpus;
pub mod credibility;
pub mod error;
pub mod graph;
pub mod harness;
pub mod sparse;
pub mod spectral;

pub use corpus::{Corpus, Label, NewsItem, Post, Vocabulary};
pub use credibility::{CredibilityVector, PropagationConfig, PropagationMode, Provenance};
pub use error::{Error, Result};
pub use graph::{HashtagGraph, RelationKind, RelationMatrix};

pub use harness::{ExperimentConfig, Method, MetricsReport};
pub use sparse::CsrMatrix;
