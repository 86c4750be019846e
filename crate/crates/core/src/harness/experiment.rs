use std::collections::HashSet;
use std::io::Write;

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::metrics::{compute_f1, Confusion, F1Scores, Summary};
use super::{ClosureMode, ExperimentConfig, Method, MAX_SPLIT_ATTEMPTS};
use crate::corpus::{filter_by_time, split_with_rng, Corpus, FilterReport, Label, Split, Vocabulary};
use crate::credibility::{
    init_credibility, predict, propagate, symmetric_normalize, CredibilityVector,
    NormalizedOperator, Prediction, PropagationConfig, PropagationTrace,
};
use crate::error::{Error, Result};
use crate::graph::{
    all_relations, all_relations_exact, build_direct_graph, normalize, ClosureTrace, ExactOptions,
    RelationKind, RelationMatrix,
};

/// Graph state shared by every repetition: built once over all news.
#[derive(Clone, Debug)]
pub struct Model {
    method: Method,
    vocab: Vocabulary,
    relation: RelationMatrix,
    operator: NormalizedOperator,
    closure_trace: ClosureTrace,
}

/// Seed and propagated credibility for one training set.
#[derive(Clone, Debug)]
pub struct Fit {
    pub c0: CredibilityVector,
    pub c_hat: CredibilityVector,
    pub trace: Option<PropagationTrace>,
}

impl Model {
    pub fn build(corpus: &Corpus, config: &ExperimentConfig) -> Result<Model> {
        let method = config.method;
        let graph = build_direct_graph(corpus, method.weighted());
        let vocab = graph.vocab().clone();
        let q = vocab.len();
        let (relation, closure_trace) = if graph.edge_count() == 0 {
            warn!("hashtag graph has no edges; credibility will not propagate");
            let kind = if method.indirect() {
                RelationKind::AllRelationsTruncated { terms: config.k1 }
            } else {
                RelationKind::NormalizedDirect
            };
            (RelationMatrix::zeros(kind, q), ClosureTrace::default())
        } else {
            let n = normalize(&graph)?;
            if !method.indirect() {
                (n, ClosureTrace::default())
            } else if config.closure == ClosureMode::Exact {
                (all_relations_exact(&n, &ExactOptions::default())?, ClosureTrace::default())
            } else {
                all_relations(&n, &config.closure_options())?
            }
        };
        debug!(
            "model {}: {} hashtags, {} edges, relation nnz {}",
            method,
            q,
            graph.edge_count(),
            relation.matrix().nnz()
        );
        let operator = symmetric_normalize(&relation);
        Ok(Model {
            method,
            vocab,
            relation,
            operator,
            closure_trace,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn relation(&self) -> &RelationMatrix {
        &self.relation
    }

    pub fn operator(&self) -> &NormalizedOperator {
        &self.operator
    }

    pub fn closure_trace(&self) -> &ClosureTrace {
        &self.closure_trace
    }

    pub fn seed(&self, corpus: &Corpus, train_ids: &[String]) -> Result<CredibilityVector> {
        init_credibility(corpus, train_ids, &self.vocab, self.method.per_post())
    }

    pub fn fit(&self, corpus: &Corpus, train_ids: &[String], propagation: &PropagationConfig) -> Result<Fit> {
        let c0 = self.seed(corpus, train_ids)?;
        let (c_hat, trace) = propagate(&self.operator, &c0, propagation)?;
        Ok(Fit { c0, c_hat, trace })
    }

    pub fn predict(&self, corpus: &Corpus, ids: &[String], c_hat: &CredibilityVector) -> Result<Vec<Prediction>> {
        predict(corpus, ids, c_hat, &self.vocab, self.method.per_post())
    }
}

fn has_both_classes(corpus: &Corpus, ids: &[String]) -> bool {
    let mut seen = (false, false);
    for id in ids {
        match corpus.get(id).and_then(|n| n.label) {
            Some(Label::Fake) => seen.0 = true,
            Some(Label::True) => seen.1 = true,
            None => {}
        }
    }
    seen.0 && seen.1
}

/// Draws a split whose test side holds labeled news of both classes.
pub fn draw_split<R: Rng + ?Sized>(
    corpus: &Corpus,
    fraction: f64,
    rng: &mut R,
    holdout: &HashSet<String>,
) -> Result<Split> {
    for _ in 0..MAX_SPLIT_ATTEMPTS {
        let split = split_with_rng(corpus, fraction, rng, holdout)?;
        if has_both_classes(corpus, &split.test) {
            return Ok(split);
        }
    }
    Err(Error::DegenerateSplit {
        attempts: MAX_SPLIT_ATTEMPTS,
    })
}

/// Scores the labeled predictions; unlabeled targets are ignored.
pub(crate) fn score(corpus: &Corpus, predictions: &[Prediction]) -> Result<F1Scores> {
    let mut predicted = Vec::new();
    let mut truths = Vec::new();
    for p in predictions {
        if let Some(label) = corpus.get(&p.news_id).and_then(|n| n.label) {
            predicted.push(p.label);
            truths.push(label);
        }
    }
    compute_f1(&predicted, &truths)
}

#[derive(Clone, Debug)]
pub struct RepetitionOutcome {
    pub index: usize,
    pub seed: u64,
    pub split: Split,
    pub fit: Fit,
    /// One prediction per test news, labeled or not.
    pub predictions: Vec<Prediction>,
    pub scores: F1Scores,
    pub hashtag_free_test: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RepetitionMetrics {
    pub index: usize,
    pub seed: u64,
    pub train_size: usize,
    pub evaluated: usize,
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub f1_true: f64,
    pub f1_fake: f64,
    pub confusion: Confusion,
    /// Test news without any hashtag, always predicted fake.
    pub hashtag_free_test: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub method: Method,
    pub config: ExperimentConfig,
    /// Spread statistic used for `std` fields.
    pub dispersion: &'static str,
    pub macro_f1: Summary,
    pub micro_f1: Summary,
    /// Counts pooled over repetitions.
    pub confusion: Confusion,
    pub repetitions: Vec<RepetitionMetrics>,
    pub time_filter: Option<FilterReport>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub report: MetricsReport,
    pub repetitions: Vec<RepetitionOutcome>,
}

pub(crate) fn prepare(corpus: &Corpus, config: &ExperimentConfig) -> Result<(Corpus, Option<FilterReport>)> {
    config.validate()?;
    match config.time_horizon_hours {
        Some(h) => {
            let (filtered, report) = filter_by_time(corpus, h)?;
            Ok((filtered, Some(report)))
        }
        None => Ok((corpus.clone(), None)),
    }
}

fn run_repetition(
    corpus: &Corpus,
    model: &Model,
    config: &ExperimentConfig,
    index: usize,
    holdout: &HashSet<String>,
) -> Result<RepetitionOutcome> {
    let seed = config.repetition_seed(index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let split = draw_split(corpus, config.train_fraction, &mut rng, holdout)?;
    let fit = model.fit(corpus, &split.train, &config.propagation)?;
    let predictions = model.predict(corpus, &split.test, &fit.c_hat)?;
    let scores = score(corpus, &predictions)?;
    let hashtag_free_test = split
        .test
        .iter()
        .filter_map(|id| corpus.get(id))
        .filter(|n| n.label.is_some() && n.is_hashtag_free())
        .count();
    Ok(RepetitionOutcome {
        index,
        seed,
        split,
        fit,
        predictions,
        scores,
        hashtag_free_test,
    })
}

/// Repeated split / fit / predict / score, with the graph built once over
/// every news item (after the optional time filter).
pub fn run_experiment(corpus: &Corpus, config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment_with_holdout(corpus, config, &HashSet::new())
}

/// As [`run_experiment`], with `holdout` news never placed in training.
pub fn run_experiment_with_holdout(
    corpus: &Corpus,
    config: &ExperimentConfig,
    holdout: &HashSet<String>,
) -> Result<ExperimentOutcome> {
    let (corpus, time_filter) = prepare(corpus, config)?;
    let model = Model::build(&corpus, config)?;
    let repetitions = (0..config.repetitions)
        .into_par_iter()
        .map(|i| run_repetition(&corpus, &model, config, i, holdout))
        .collect::<Result<Vec<_>>>()?;
    let report = summarize(config, &repetitions, time_filter);
    Ok(ExperimentOutcome { report, repetitions })
}

fn summarize(config: &ExperimentConfig, reps: &[RepetitionOutcome], time_filter: Option<FilterReport>) -> MetricsReport {
    let mut confusion = Confusion::default();
    let rows: Vec<RepetitionMetrics> = reps
        .iter()
        .map(|r| {
            confusion.merge(&r.scores.confusion);
            RepetitionMetrics {
                index: r.index,
                seed: r.seed,
                train_size: r.split.train.len(),
                evaluated: r.scores.confusion.total(),
                macro_f1: r.scores.macro_f1,
                micro_f1: r.scores.micro_f1,
                f1_true: r.scores.f1_true,
                f1_fake: r.scores.f1_fake,
                confusion: r.scores.confusion,
                hashtag_free_test: r.hashtag_free_test,
            }
        })
        .collect();
    let macros: Vec<f64> = rows.iter().map(|r| r.macro_f1).collect();
    let micros: Vec<f64> = rows.iter().map(|r| r.micro_f1).collect();
    MetricsReport {
        method: config.method,
        config: config.clone(),
        dispersion: "sample_std",
        macro_f1: Summary::of(&macros),
        micro_f1: Summary::of(&micros),
        confusion,
        repetitions: rows,
        time_filter,
    }
}

/// Runs every method with otherwise identical settings.
pub fn run_ablation(corpus: &Corpus, config: &ExperimentConfig) -> Result<Vec<MetricsReport>> {
    Method::ALL
        .iter()
        .map(|&method| {
            let cfg = ExperimentConfig {
                method,
                ..config.clone()
            };
            run_experiment(corpus, &cfg).map(|o| o.report)
        })
        .collect()
}

/// CSV of one repetition's test predictions.
pub fn write_predictions<W: Write>(corpus: &Corpus, outcome: &RepetitionOutcome, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["news_id", "predicted", "score", "truth"])?;
    for p in &outcome.predictions {
        let truth = corpus
            .get(&p.news_id)
            .and_then(|n| n.label)
            .map_or(String::new(), |l| l.to_string());
        w.write_record([
            p.news_id.clone(),
            p.label.to_string(),
            p.score.to_string(),
            truth,
        ])?;
    }
    w.flush()?;
    Ok(())
}
