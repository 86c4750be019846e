use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::experiment::{draw_split, prepare, run_experiment, score, MetricsReport, Model};
use super::metrics::{F1Scores, Summary};
use super::{ExperimentConfig, MAX_SPLIT_ATTEMPTS};
use crate::corpus::{split_ids, Corpus, Label};
use crate::credibility::{propagate, PropagationConfig};
use crate::error::{Error, Result};

/// Share of the outer training set used to score grid points.
const VALIDATION_SHARE: f64 = 0.1;

/// 0.0, 0.1, ..., 1.0.
pub fn default_mu_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridRow {
    pub mu: f64,
    pub micro_f1_mean: f64,
    pub micro_f1_std: f64,
    pub macro_f1_mean: f64,
    pub macro_f1_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridReport {
    pub best_mu: f64,
    pub rows: Vec<GridRow>,
    /// Requested values outside `(0, 1)`, skipped.
    pub excluded: Vec<f64>,
    pub config: ExperimentConfig,
}

fn has_both(corpus: &Corpus, ids: &[String]) -> bool {
    let labels: Vec<Label> = ids.iter().filter_map(|id| corpus.get(id)?.label).collect();
    labels.contains(&Label::Fake) && labels.contains(&Label::True)
}

/// Picks μ by mean micro F1 on a validation slice carved from each
/// repetition's training set; ties go to the smaller μ.
pub fn grid_search_mu(corpus: &Corpus, config: &ExperimentConfig, grid: &[f64]) -> Result<GridReport> {
    let mut values = Vec::new();
    let mut excluded = Vec::new();
    for &mu in grid {
        if mu > 0.0 && mu < 1.0 {
            values.push(mu);
        } else {
            excluded.push(mu);
        }
    }
    values.sort_by(f64::total_cmp);
    values.dedup();
    if values.is_empty() {
        return Err(Error::param("mu grid is empty after excluding values outside (0,1)"));
    }
    let (corpus, _) = prepare(corpus, config)?;
    let model = Model::build(&corpus, config)?;
    let per_rep: Vec<Vec<F1Scores>> = (0..config.repetitions)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.repetition_seed(i));
            let outer = draw_split(&corpus, config.train_fraction, &mut rng, &Default::default())?;
            let mut inner = None;
            for _ in 0..MAX_SPLIT_ATTEMPTS {
                let (train, validation) = split_ids(&outer.train, 1.0 - VALIDATION_SHARE, &mut rng)?;
                if has_both(&corpus, &validation) {
                    inner = Some((train, validation));
                    break;
                }
            }
            let (train, validation) = inner.ok_or(Error::DegenerateSplit {
                attempts: MAX_SPLIT_ATTEMPTS,
            })?;
            let c0 = model.seed(&corpus, &train)?;
            values
                .iter()
                .map(|&mu| {
                    let cfg = PropagationConfig {
                        mu,
                        ..config.propagation
                    };
                    let (c_hat, _) = propagate(model.operator(), &c0, &cfg)?;
                    score(&corpus, &model.predict(&corpus, &validation, &c_hat)?)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let rows: Vec<GridRow> = values
        .iter()
        .enumerate()
        .map(|(j, &mu)| {
            let micro: Vec<f64> = per_rep.iter().map(|r| r[j].micro_f1).collect();
            let macro_: Vec<f64> = per_rep.iter().map(|r| r[j].macro_f1).collect();
            let (mi, ma) = (Summary::of(&micro), Summary::of(&macro_));
            GridRow {
                mu,
                micro_f1_mean: mi.mean,
                micro_f1_std: mi.std,
                macro_f1_mean: ma.mean,
                macro_f1_std: ma.std,
            }
        })
        .collect();
    // rows are sorted by mu, so a strict comparison keeps the smallest on ties
    let mut best = &rows[0];
    for row in &rows[1..] {
        if row.micro_f1_mean > best.micro_f1_mean {
            best = row;
        }
    }
    Ok(GridReport {
        best_mu: best.mu,
        rows: rows.clone(),
        excluded,
        config: config.clone(),
    })
}

pub fn write_grid_csv<W: Write>(report: &GridReport, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["mu", "micro_f1_mean", "micro_f1_std", "macro_f1_mean", "macro_f1_std"])?;
    for r in &report.rows {
        w.write_record([
            r.mu.to_string(),
            r.micro_f1_mean.to_string(),
            r.micro_f1_std.to_string(),
            r.macro_f1_mean.to_string(),
            r.macro_f1_std.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One sweep point: the swept value and the full report at that value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub x: String,
    pub report: MetricsReport,
}

fn sweep(corpus: &Corpus, configs: Vec<(String, ExperimentConfig)>) -> Result<Vec<SweepPoint>> {
    configs
        .into_par_iter()
        .map(|(x, cfg)| {
            run_experiment(corpus, &cfg).map(|o| SweepPoint { x, report: o.report })
        })
        .collect()
}

pub fn sweep_training_fraction(
    corpus: &Corpus,
    config: &ExperimentConfig,
    fractions: &[f64],
) -> Result<Vec<SweepPoint>> {
    if fractions.is_empty() {
        return Err(Error::param("training fraction list is empty"));
    }
    let configs = fractions
        .iter()
        .map(|&f| {
            let cfg = ExperimentConfig {
                train_fraction: f,
                ..config.clone()
            };
            cfg.validate().map(|_| (f.to_string(), cfg))
        })
        .collect::<Result<_>>()?;
    sweep(corpus, configs)
}

/// One point per horizon plus a final unfiltered `all` point.
pub fn sweep_detection_time(
    corpus: &Corpus,
    config: &ExperimentConfig,
    horizons: &[f64],
) -> Result<Vec<SweepPoint>> {
    if horizons.is_empty() {
        return Err(Error::param("horizon list is empty"));
    }
    let mut configs = horizons
        .iter()
        .map(|&h| {
            let cfg = ExperimentConfig {
                time_horizon_hours: Some(h),
                ..config.clone()
            };
            cfg.validate().map(|_| (h.to_string(), cfg))
        })
        .collect::<Result<Vec<_>>>()?;
    configs.push((
        "all".to_string(),
        ExperimentConfig {
            time_horizon_hours: None,
            ..config.clone()
        },
    ));
    sweep(corpus, configs)
}

pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["x", "macro_f1_mean", "macro_f1_std", "micro_f1_mean", "micro_f1_std"])?;
    for p in points {
        let r = &p.report;
        w.write_record([
            p.x.clone(),
            r.macro_f1.mean.to_string(),
            r.macro_f1.std.to_string(),
            r.micro_f1.mean.to_string(),
            r.micro_f1.std.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
