//! Text formats for relation matrices, vocabularies and graph exports.
//!
//! Relation matrix (sparse triplets, upper triangle only):
//!
//! ```text
//! # newstag relation matrix
//! # kind=all_relations_truncated terms=10
//! # dim=3
//! row	col	value
//! 0	1	5e-1
//! ```

use std::io::{BufRead, Write};

use serde::Serialize;

use super::{RelationKind, RelationMatrix};
use crate::corpus::Vocabulary;
use crate::credibility::CredibilityVector;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

const HEADER: &str = "# newstag relation matrix";

pub fn write_relation_matrix<W: Write>(m: &RelationMatrix, mut sink: W) -> Result<()> {
    writeln!(sink, "{HEADER}")?;
    writeln!(sink, "# kind={}", m.kind)?;
    writeln!(sink, "# dim={}", m.dim())?;
    writeln!(sink, "row\tcol\tvalue")?;
    for (i, j, v) in m.matrix().upper_triplets() {
        writeln!(sink, "{i}\t{j}\t{v:e}")?;
    }
    sink.flush()?;
    Ok(())
}

pub fn read_relation_matrix<R: BufRead>(source: R) -> Result<RelationMatrix> {
    let mut kind = None;
    let mut dim = None;
    let mut upper = Vec::new();
    let mut saw_columns = false;
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if let Some(meta) = line.strip_prefix("# ") {
            if let Some(k) = meta.strip_prefix("kind=") {
                kind = Some(k.parse::<RelationKind>()?);
            } else if let Some(d) = meta.strip_prefix("dim=") {
                dim = Some(
                    d.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Format(format!("line {lineno}: bad dim")))?,
                );
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if !saw_columns {
            if line.trim() != "row\tcol\tvalue" {
                return Err(Error::Format(format!("line {lineno}: expected column header")));
            }
            saw_columns = true;
            continue;
        }
        let mut f = line.split('\t');
        let bad = || Error::Format(format!("line {lineno}: expected row<TAB>col<TAB>value"));
        let i: usize = f.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let j: usize = f.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let v: f64 = f.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        upper.push((i, j, v));
    }
    let kind = kind.ok_or_else(|| Error::Format("missing kind header".into()))?;
    let dim = dim.ok_or_else(|| Error::Format("missing dim header".into()))?;
    RelationMatrix::new(kind, CsrMatrix::from_upper_triplets(dim, &upper)?)
}

pub fn write_vocabulary<W: Write>(vocab: &Vocabulary, mut sink: W) -> Result<()> {
    for t in vocab.terms() {
        writeln!(sink, "{t}")?;
    }
    sink.flush()?;
    Ok(())
}

pub fn read_vocabulary<R: BufRead>(source: R) -> Result<Vocabulary> {
    let terms = source
        .lines()
        .filter(|l| l.as_ref().map_or(true, |s| !s.is_empty()))
        .collect::<std::io::Result<Vec<_>>>()?;
    Vocabulary::from_terms(terms)
}

/// Node colouring used by graph visualizations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorClass {
    High,
    Low,
    Mid,
}

impl ColorClass {
    pub fn from_score(score: f64) -> Self {
        if score >= 0.9 {
            ColorClass::High
        } else if score <= -0.9 {
            ColorClass::Low
        } else {
            ColorClass::Mid
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ColorClass::High => "high",
            ColorClass::Low => "low",
            ColorClass::Mid => "mid",
        }
    }

    fn dot_color(self) -> &'static str {
        match self {
            ColorClass::High => "blue",
            ColorClass::Low => "red",
            ColorClass::Mid => "gray",
        }
    }
}

fn check_dims(m: &RelationMatrix, vocab: &Vocabulary, cred: Option<&CredibilityVector>) -> Result<()> {
    if m.dim() != vocab.len() {
        return Err(Error::DimensionMismatch {
            expected: vocab.len(),
            got: m.dim(),
        });
    }
    if let Some(c) = cred {
        if c.len() != vocab.len() {
            return Err(Error::DimensionMismatch {
                expected: vocab.len(),
                got: c.len(),
            });
        }
    }
    Ok(())
}

/// Writes the edge list (`hashtag_a, hashtag_b, weight`, one row per
/// unordered pair) and the node table (`hashtag, credibility, color_class`).
/// Without credibility the score column is empty and every node is `mid`.
pub fn export_graph<E: Write, N: Write>(
    m: &RelationMatrix,
    vocab: &Vocabulary,
    credibility: Option<&CredibilityVector>,
    mut edges: E,
    mut nodes: N,
) -> Result<()> {
    check_dims(m, vocab, credibility)?;
    writeln!(edges, "hashtag_a\thashtag_b\tweight")?;
    for (i, j, v) in m.matrix().upper_triplets() {
        if i != j {
            writeln!(edges, "{}\t{}\t{v:e}", vocab.term(i), vocab.term(j))?;
        }
    }
    edges.flush()?;
    writeln!(nodes, "hashtag\tcredibility\tcolor_class")?;
    for (k, term) in vocab.terms().iter().enumerate() {
        match credibility {
            Some(c) => {
                let s = c.values()[k];
                writeln!(nodes, "{term}\t{s}\t{}", ColorClass::from_score(s).as_str())?
            }
            None => writeln!(nodes, "{term}\t\t{}", ColorClass::Mid.as_str())?,
        }
    }
    nodes.flush()?;
    Ok(())
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn write_dot<W: Write>(
    m: &RelationMatrix,
    vocab: &Vocabulary,
    credibility: Option<&CredibilityVector>,
    mut sink: W,
) -> Result<()> {
    check_dims(m, vocab, credibility)?;
    writeln!(sink, "graph hashtags {{")?;
    writeln!(sink, "  node [style=filled];")?;
    for (k, term) in vocab.terms().iter().enumerate() {
        let class = credibility
            .map(|c| ColorClass::from_score(c.values()[k]))
            .unwrap_or(ColorClass::Mid);
        writeln!(sink, "  {} [fillcolor={}];", dot_id(term), class.dot_color())?;
    }
    for (i, j, v) in m.matrix().upper_triplets() {
        if i != j {
            writeln!(sink, "  {} -- {} [weight={v:e}];", dot_id(vocab.term(i)), dot_id(vocab.term(j)))?;
        }
    }
    writeln!(sink, "}}")?;
    sink.flush()?;
    Ok(())
}
