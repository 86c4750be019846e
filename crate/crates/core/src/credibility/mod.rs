//! Per-hashtag credibility: seeding from labeled news, propagation over the
//! relation graph, and news-level prediction.

mod cost;
mod propagate;

use std::io::Write;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label, NewsItem, Vocabulary};
use crate::error::{Error, Result};

pub use cost::cost_evaluate;
pub use propagate::{
    propagate, propagate_closed_form, propagate_iterative, symmetric_normalize, NormalizedOperator,
    PropagationConfig, PropagationMode, PropagationTrace,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Seeded from training labels.
    InitialC0,
    /// Output of the propagation solver.
    Propagated,
    /// Seeded from every labeled news item.
    AllDataCStar,
    /// Propagated scores divided by their largest magnitude.
    Rescaled,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::InitialC0 => "initial_c0",
            Provenance::Propagated => "propagated",
            Provenance::AllDataCStar => "all_data_c_star",
            Provenance::Rescaled => "rescaled",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CredibilityVector {
    values: Vec<f64>,
    pub provenance: Provenance,
    /// Regularization weight, for propagated vectors.
    pub mu: Option<f64>,
}

impl CredibilityVector {
    pub fn new(values: Vec<f64>, provenance: Provenance, mu: Option<f64>) -> Self {
        CredibilityVector {
            values,
            provenance,
            mu,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CredibilityVector {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    pub fn negated(&self) -> Self {
        CredibilityVector {
            values: self.values.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }

    /// Writes `hashtag, score, provenance` rows.
    pub fn write_tsv<W: Write>(&self, vocab: &Vocabulary, mut sink: W) -> Result<()> {
        if vocab.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: vocab.len(),
                got: self.len(),
            });
        }
        writeln!(sink, "hashtag\tscore\tprovenance")?;
        for (t, v) in vocab.terms().iter().zip(&self.values) {
            writeln!(sink, "{t}\t{v}\t{}", self.provenance.as_str())?;
        }
        sink.flush()?;
        Ok(())
    }

    /// Reads a TSV written by [`CredibilityVector::write_tsv`], ordering the
    /// scores by `vocab`. Hashtags missing from the file score 0.
    pub fn read_tsv<R: std::io::BufRead>(vocab: &Vocabulary, source: R) -> Result<Self> {
        let mut values = vec![0.0; vocab.len()];
        let mut provenance = Provenance::Propagated;
        for (idx, line) in source.lines().enumerate() {
            let line = line?;
            if idx == 0 || line.is_empty() {
                continue;
            }
            let mut f = line.split('\t');
            let bad = || Error::Format(format!("line {}: expected hashtag<TAB>score<TAB>provenance", idx + 1));
            let term = f.next().ok_or_else(bad)?;
            let score: f64 = f.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            provenance = match f.next().ok_or_else(bad)? {
                "initial_c0" => Provenance::InitialC0,
                "propagated" => Provenance::Propagated,
                "all_data_c_star" => Provenance::AllDataCStar,
                "rescaled" => Provenance::Rescaled,
                _ => return Err(bad()),
            };
            let k = vocab
                .get(term)
                .ok_or_else(|| Error::Format(format!("hashtag {term:?} not in vocabulary")))?;
            values[k] = score;
        }
        Ok(CredibilityVector::new(values, provenance, None))
    }
}

fn seed_scores<'a>(
    items: impl Iterator<Item = (&'a NewsItem, Label)>,
    vocab: &Vocabulary,
    per_post: bool,
) -> Vec<f64> {
    let mut sum = vec![0.0f64; vocab.len()];
    let mut count = vec![0u64; vocab.len()];
    let mut add = |h: &str, y: f64| {
        if let Some(k) = vocab.get(h) {
            sum[k] += y;
            count[k] += 1;
        }
    };
    for (item, label) in items {
        let y = label.value();
        if per_post {
            for post in &item.posts {
                for h in post.hashtags() {
                    add(h, y);
                }
            }
        } else {
            for h in item.distinct_hashtags() {
                add(h, y);
            }
        }
    }
    sum.iter()
        .zip(&count)
        .map(|(&s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect()
}

/// Label average of each hashtag over the posts (or, with `per_post ==
/// false`, the news items) of the training news; 0 for unseen hashtags.
pub fn init_credibility(
    corpus: &Corpus,
    train_ids: &[String],
    vocab: &Vocabulary,
    per_post: bool,
) -> Result<CredibilityVector> {
    let items = train_ids
        .iter()
        .map(|id| corpus.labeled_item(id))
        .collect::<Result<Vec<_>>>()?;
    Ok(CredibilityVector::new(
        seed_scores(items.into_iter(), vocab, per_post),
        Provenance::InitialC0,
        None,
    ))
}

/// The same average computed over every labeled news item.
pub fn all_data_credibility(corpus: &Corpus, vocab: &Vocabulary, per_post: bool) -> CredibilityVector {
    CredibilityVector::new(
        seed_scores(corpus.labeled(), vocab, per_post),
        Provenance::AllDataCStar,
        None,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub news_id: String,
    pub label: Label,
    pub score: f64,
}

/// Sum of hashtag credibility over a news item's posts. With `per_post ==
/// false` each distinct hashtag counts once.
pub fn news_score(item: &NewsItem, credibility: &[f64], vocab: &Vocabulary, per_post: bool) -> f64 {
    let value = |h: &str| vocab.get(h).map_or(0.0, |k| credibility[k]);
    if per_post {
        item.posts
            .iter()
            .map(|p| p.hashtags().iter().map(|h| value(h)).sum::<f64>())
            .sum()
    } else {
        item.distinct_hashtags().into_iter().map(value).sum()
    }
}

pub fn predict(
    corpus: &Corpus,
    target_ids: &[String],
    credibility: &CredibilityVector,
    vocab: &Vocabulary,
    per_post: bool,
) -> Result<Vec<Prediction>> {
    if credibility.len() != vocab.len() {
        return Err(Error::DimensionMismatch {
            expected: vocab.len(),
            got: credibility.len(),
        });
    }
    target_ids
        .iter()
        .map(|id| {
            let item = corpus.get(id).ok_or_else(|| Error::UnknownNews(id.clone()))?;
            let score = news_score(item, credibility.values(), vocab, per_post);
            Ok(Prediction {
                news_id: id.clone(),
                label: Label::from_score(score),
                score,
            })
        })
        .collect()
}

/// Divides by the largest magnitude so scores span `[-1, 1]`. An all-zero
/// vector is returned unchanged.
pub fn rescale_credibility(c: &CredibilityVector) -> CredibilityVector {
    let peak = c.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        warn!("rescaling an all-zero credibility vector; left unchanged");
        return CredibilityVector {
            provenance: Provenance::Rescaled,
            ..c.clone()
        };
    }
    CredibilityVector {
        values: c.values().iter().map(|v| v / peak).collect(),
        provenance: Provenance::Rescaled,
        mu: c.mu,
    }
}
