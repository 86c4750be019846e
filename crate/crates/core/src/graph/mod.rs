//! Hashtag co-occurrence graph and the relation matrices derived from it.

mod closure;
mod io;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Vocabulary};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

pub use closure::{
    all_relations, all_relations_exact, all_relations_truncated, ClosureOptions, ClosureStop,
    ClosureTrace, ExactOptions,
};
pub use io::{
    export_graph, read_relation_matrix, read_vocabulary, write_dot, write_relation_matrix,
    write_vocabulary, ColorClass,
};

/// Direct co-occurrence graph. Only the upper triangle (`k < l`) is stored;
/// there are no self-loops.
#[derive(Clone, Debug, PartialEq)]
pub struct HashtagGraph {
    vocab: Vocabulary,
    weighted: bool,
    edges: Vec<(usize, usize, u64)>,
}

impl HashtagGraph {
    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn node_count(&self) -> usize {
        self.vocab.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Upper-triangle edges `(k, l, w)` with `k < l`, sorted.
    pub fn edges(&self) -> &[(usize, usize, u64)] {
        &self.edges
    }

    pub fn weight(&self, k: usize, l: usize) -> u64 {
        let key = (k.min(l), k.max(l));
        self.edges
            .binary_search_by(|&(a, b, _)| (a, b).cmp(&key))
            .map(|p| self.edges[p].2)
            .unwrap_or(0)
    }

    pub fn weight_by_name(&self, a: &str, b: &str) -> u64 {
        match (self.vocab.get(a), self.vocab.get(b)) {
            (Some(k), Some(l)) if k != l => self.weight(k, l),
            _ => 0,
        }
    }

    /// Weighted degree of every node.
    pub fn degrees(&self) -> Vec<u64> {
        let mut d = vec![0u64; self.node_count()];
        for &(k, l, w) in &self.edges {
            d[k] += w;
            d[l] += w;
        }
        d
    }

    /// The raw weights as a full symmetric matrix.
    pub fn to_relation(&self) -> RelationMatrix {
        let upper: Vec<_> = self.edges.iter().map(|&(k, l, w)| (k, l, w as f64)).collect();
        let m = CsrMatrix::from_upper_triplets(self.node_count(), &upper).expect("edges in range");
        RelationMatrix {
            kind: RelationKind::DirectWeights,
            matrix: m,
        }
    }
}

/// Counts, for every unordered hashtag pair, the posts containing both.
/// With `weighted == false` every positive count becomes 1.
pub fn build_direct_graph(corpus: &Corpus, weighted: bool) -> HashtagGraph {
    let vocab = corpus.vocabulary().clone();
    let mut counts: HashMap<(usize, usize), u64> = HashMap::new();
    let mut ids = Vec::new();
    for item in corpus.news() {
        for post in &item.posts {
            ids.clear();
            ids.extend(post.hashtags().iter().map(|h| vocab.get(h).expect("vocabulary covers corpus")));
            for a in 0..ids.len() {
                for b in a + 1..ids.len() {
                    let key = (ids[a].min(ids[b]), ids[a].max(ids[b]));
                    *counts.entry(key).or_insert(0) += 1;
                }
            }
        }
    }
    let mut edges: Vec<(usize, usize, u64)> = counts
        .into_iter()
        .map(|((k, l), w)| (k, l, if weighted { w } else { 1 }))
        .collect();
    edges.sort_unstable();
    HashtagGraph {
        vocab,
        weighted,
        edges,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    /// Raw co-occurrence counts.
    DirectWeights,
    /// Counts divided by the largest weighted degree.
    NormalizedDirect,
    /// Partial power sum of the normalized matrix.
    AllRelationsTruncated { terms: usize },
    /// Limit of the power series, from a linear solve.
    AllRelationsExact,
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationKind::DirectWeights => write!(f, "direct_weights"),
            RelationKind::NormalizedDirect => write!(f, "normalized_direct"),
            RelationKind::AllRelationsTruncated { terms } => {
                write!(f, "all_relations_truncated terms={terms}")
            }
            RelationKind::AllRelationsExact => write!(f, "all_relations_exact"),
        }
    }
}

impl std::str::FromStr for RelationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let kind = parts.next().unwrap_or("");
        match kind {
            "direct_weights" => Ok(RelationKind::DirectWeights),
            "normalized_direct" => Ok(RelationKind::NormalizedDirect),
            "all_relations_exact" => Ok(RelationKind::AllRelationsExact),
            "all_relations_truncated" => {
                let terms = parts
                    .next()
                    .and_then(|p| p.strip_prefix("terms="))
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::Format(format!("missing terms in {s:?}")))?;
                Ok(RelationKind::AllRelationsTruncated { terms })
            }
            _ => Err(Error::Format(format!("unknown relation kind {s:?}"))),
        }
    }
}

/// Symmetric nonnegative relation matrix over a vocabulary's indices.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationMatrix {
    pub kind: RelationKind,
    matrix: CsrMatrix,
}

impl RelationMatrix {
    /// Wraps a matrix after checking that it is nonnegative and symmetric.
    pub fn new(kind: RelationKind, matrix: CsrMatrix) -> Result<Self> {
        if matrix.values().iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::param("relation matrix entries must be finite and nonnegative"));
        }
        let scale = matrix.values().iter().fold(1.0f64, |a, &v| a.max(v));
        if matrix.max_asymmetry() > 1e-12 * scale {
            return Err(Error::param("relation matrix must be symmetric"));
        }
        Ok(RelationMatrix { kind, matrix })
    }

    pub(crate) fn new_unchecked(kind: RelationKind, matrix: CsrMatrix) -> Self {
        RelationMatrix { kind, matrix }
    }

    /// An all-zero matrix, used when a corpus has no co-occurring hashtags.
    pub fn zeros(kind: RelationKind, dim: usize) -> Self {
        RelationMatrix {
            kind,
            matrix: CsrMatrix::zeros(dim),
        }
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.matrix.get(k, l)
    }

    pub fn max_row_sum(&self) -> f64 {
        self.matrix.row_sums().into_iter().fold(0.0, f64::max)
    }
}

/// Divides the direct weights by the largest weighted degree.
pub fn normalize(graph: &HashtagGraph) -> Result<RelationMatrix> {
    if graph.edge_count() == 0 {
        return Err(Error::EdgelessGraph);
    }
    let max_degree = graph.degrees().into_iter().max().unwrap_or(0) as f64;
    let upper: Vec<_> = graph
        .edges()
        .iter()
        .map(|&(k, l, w)| (k, l, w as f64 / max_degree))
        .collect();
    let m = CsrMatrix::from_upper_triplets(graph.node_count(), &upper)?;
    Ok(RelationMatrix::new_unchecked(RelationKind::NormalizedDirect, m))
}
