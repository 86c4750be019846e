use std::collections::HashMap;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::experiment::{draw_split, prepare, Model};
use super::ExperimentConfig;
use crate::corpus::{normalize_hashtag, Corpus, Label};
use crate::credibility::{all_data_credibility, propagate_iterative, rescale_credibility, PropagationMode};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PurityRow {
    pub news_id: String,
    pub label: Label,
    pub hashtags: usize,
    pub fake_only: f64,
    pub true_only: f64,
    pub mixed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PuritySummary {
    pub rows: Vec<PurityRow>,
    /// Labeled news without hashtags, left out of `rows`.
    pub hashtag_free_news: usize,
    pub fake_only_hashtags: usize,
    pub true_only_hashtags: usize,
    pub mixed_hashtags: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Usage {
    Fake,
    True,
    Mixed,
}

/// Classifies hashtags by the labels of the news spreading them, then reports
/// for each labeled news the share of its hashtags in each class.
pub fn purity_analysis(corpus: &Corpus) -> PuritySummary {
    let mut usage: HashMap<&str, Usage> = HashMap::new();
    for (item, label) in corpus.labeled() {
        let u = match label {
            Label::Fake => Usage::Fake,
            Label::True => Usage::True,
        };
        for h in item.distinct_hashtags() {
            usage
                .entry(h)
                .and_modify(|e| {
                    if *e != u {
                        *e = Usage::Mixed
                    }
                })
                .or_insert(u);
        }
    }
    let mut rows = Vec::new();
    let mut hashtag_free_news = 0;
    for (item, label) in corpus.labeled() {
        let tags = item.distinct_hashtags();
        if tags.is_empty() {
            hashtag_free_news += 1;
            continue;
        }
        let mut counts = [0usize; 3];
        for h in &tags {
            counts[match usage[h] {
                Usage::Fake => 0,
                Usage::True => 1,
                Usage::Mixed => 2,
            }] += 1;
        }
        let n = tags.len() as f64;
        rows.push(PurityRow {
            news_id: item.id.clone(),
            label,
            hashtags: tags.len(),
            fake_only: counts[0] as f64 / n,
            true_only: counts[1] as f64 / n,
            mixed: counts[2] as f64 / n,
        });
    }
    let count = |u: Usage| usage.values().filter(|&&v| v == u).count();
    PuritySummary {
        rows,
        hashtag_free_news,
        fake_only_hashtags: count(Usage::Fake),
        true_only_hashtags: count(Usage::True),
        mixed_hashtags: count(Usage::Mixed),
    }
}

impl PuritySummary {
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["news_id", "label", "hashtags", "fake_only", "true_only", "mixed"])?;
        for r in &self.rows {
            w.write_record([
                r.news_id.clone(),
                r.label.to_string(),
                r.hashtags.to_string(),
                r.fake_only.to_string(),
                r.true_only.to_string(),
                r.mixed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Five-number summary of one class at one checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PopularityRow {
    pub checkpoint_hours: f64,
    pub label: Label,
    pub news: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PopularityReport {
    pub checkpoints: Vec<f64>,
    /// Cumulative post counts per labeled, timed news, one per checkpoint.
    pub per_news: Vec<(String, Label, Vec<usize>)>,
    pub rows: Vec<PopularityRow>,
    /// Labeled news without a publish time.
    pub untimed_news: usize,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Counts, per labeled news, the posts created within each checkpoint of its
/// publish time, and summarizes the counts per class.
pub fn popularity_analysis(corpus: &Corpus, checkpoints: &[f64]) -> Result<PopularityReport> {
    if let Some(c) = checkpoints.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(Error::param(format!("checkpoint must be a nonnegative number of hours, got {c}")));
    }
    let mut per_news = Vec::new();
    let mut untimed_news = 0;
    for (item, label) in corpus.labeled() {
        let Some(published) = item.published_at else {
            untimed_news += 1;
            continue;
        };
        let delays: Vec<f64> = item
            .posts
            .iter()
            .filter_map(|p| p.created_at)
            .map(|t| (t - published).num_milliseconds() as f64)
            .collect();
        let counts: Vec<usize> = checkpoints
            .iter()
            .map(|h| {
                let limit = h * 3_600_000.0;
                delays.iter().filter(|&&d| d <= limit).count()
            })
            .collect();
        per_news.push((item.id.clone(), label, counts));
    }
    let mut rows = Vec::new();
    for (j, &h) in checkpoints.iter().enumerate() {
        for label in [Label::True, Label::Fake] {
            let mut v: Vec<f64> = per_news
                .iter()
                .filter(|(_, l, _)| *l == label)
                .map(|(_, _, c)| c[j] as f64)
                .collect();
            v.sort_by(f64::total_cmp);
            rows.push(PopularityRow {
                checkpoint_hours: h,
                label,
                news: v.len(),
                min: quantile(&v, 0.0),
                q1: quantile(&v, 0.25),
                median: quantile(&v, 0.5),
                q3: quantile(&v, 0.75),
                max: quantile(&v, 1.0),
            });
        }
    }
    Ok(PopularityReport {
        checkpoints: checkpoints.to_vec(),
        per_news,
        rows,
        untimed_news,
    })
}

impl PopularityReport {
    pub fn write_summary_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["checkpoint_hours", "label", "news", "min", "q1", "median", "q3", "max"])?;
        for r in &self.rows {
            w.write_record([
                r.checkpoint_hours.to_string(),
                r.label.to_string(),
                r.news.to_string(),
                r.min.to_string(),
                r.q1.to_string(),
                r.median.to_string(),
                r.q3.to_string(),
                r.max.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_counts_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["news_id", "label", "checkpoint_hours", "posts"])?;
        for (id, label, counts) in &self.per_news {
            for (h, c) in self.checkpoints.iter().zip(counts) {
                w.write_record([id.clone(), label.to_string(), h.to_string(), c.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Scores of one watched hashtag; `None` everywhere when it is not in the
/// vocabulary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseStudyRow {
    pub hashtag: String,
    pub c_star: Option<f64>,
    pub c0: Option<f64>,
    pub c_hat: Option<f64>,
    pub rescaled: Option<f64>,
}

/// Compares all-data seeds with the seeds and propagated scores of the first
/// repetition's training set.
pub fn case_study(corpus: &Corpus, config: &ExperimentConfig, watchlist: &[String]) -> Result<Vec<CaseStudyRow>> {
    let (corpus, _) = prepare(corpus, config)?;
    let model = Model::build(&corpus, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.repetition_seed(0));
    let split = draw_split(&corpus, config.train_fraction, &mut rng, &Default::default())?;
    let fit = model.fit(&corpus, &split.train, &config.propagation)?;
    let vocab = model.vocabulary();
    let c_star = all_data_credibility(&corpus, vocab, config.method.per_post());
    let rescaled = rescale_credibility(&fit.c_hat);
    Ok(watchlist
        .iter()
        .map(|raw| {
            let key = normalize_hashtag(raw);
            match key.as_deref().and_then(|k| vocab.get(k)) {
                Some(k) => CaseStudyRow {
                    hashtag: vocab.term(k).to_string(),
                    c_star: Some(c_star.values()[k]),
                    c0: Some(fit.c0.values()[k]),
                    c_hat: Some(fit.c_hat.values()[k]),
                    rescaled: Some(rescaled.values()[k]),
                },
                None => CaseStudyRow {
                    hashtag: key.unwrap_or_else(|| raw.clone()),
                    c_star: None,
                    c0: None,
                    c_hat: None,
                    rescaled: None,
                },
            }
        })
        .collect())
}

pub fn write_case_study_csv<W: Write>(rows: &[CaseStudyRow], sink: W) -> Result<()> {
    let cell = |v: Option<f64>| v.map_or("absent".to_string(), |x| x.to_string());
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["hashtag", "c_star", "c0", "c_hat", "rescaled"])?;
    for r in rows {
        w.write_record([r.hashtag.clone(), cell(r.c_star), cell(r.c0), cell(r.c_hat), cell(r.rescaled)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// Relative Frobenius change of the accumulated relation matrix per term.
    pub closure: Vec<f64>,
    /// Max-norm change of the credibility vector per iteration.
    pub max_norm: Vec<f64>,
    /// Euclidean change of the credibility vector per iteration.
    pub l2: Vec<f64>,
}

/// Residual series of both loops on the first repetition's split. The
/// propagation is run iteratively regardless of the configured mode.
pub fn convergence_trace(corpus: &Corpus, config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let (corpus, _) = prepare(corpus, config)?;
    let model = Model::build(&corpus, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.repetition_seed(0));
    let split = draw_split(&corpus, config.train_fraction, &mut rng, &Default::default())?;
    let c0 = model.seed(&corpus, &split.train)?;
    let prop = crate::credibility::PropagationConfig {
        mode: PropagationMode::Iterative,
        ..config.propagation
    };
    let (_, trace) = propagate_iterative(model.operator(), &c0, &prop)?;
    Ok(ConvergenceReport {
        closure: model.closure_trace().relative_changes.clone(),
        max_norm: trace.max_norm_changes,
        l2: trace.l2_changes,
    })
}

impl ConvergenceReport {
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["loop", "iteration", "residual", "l2_residual"])?;
        for (i, r) in self.closure.iter().enumerate() {
            w.write_record(["k1".to_string(), (i + 1).to_string(), r.to_string(), String::new()])?;
        }
        for (i, (r, l2)) in self.max_norm.iter().zip(&self.l2).enumerate() {
            w.write_record(["k2".to_string(), (i + 1).to_string(), r.to_string(), l2.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
