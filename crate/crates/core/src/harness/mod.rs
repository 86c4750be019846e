//! Experiment orchestration: repeated splits, metrics, μ grid search,
//! training-volume and detection-time sweeps, and descriptive analyses.

mod analysis;
mod experiment;
mod metrics;
mod search;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::credibility::PropagationConfig;
use crate::error::{Error, Result};
use crate::graph::{ClosureOptions, ClosureStop};

pub use analysis::{
    case_study, convergence_trace, popularity_analysis, purity_analysis, CaseStudyRow,
    write_case_study_csv, ConvergenceReport, PopularityReport, PopularityRow, PurityRow,
    PuritySummary,
};
pub use experiment::{
    draw_split, run_ablation, run_experiment, run_experiment_with_holdout, write_predictions,
    ExperimentOutcome, Fit, MetricsReport, Model, RepetitionMetrics, RepetitionOutcome,
};
pub use metrics::{compute_f1, Confusion, F1Scores, Summary};
pub use search::{
    default_mu_grid, grid_search_mu, sweep_detection_time, sweep_training_fraction, write_grid_csv,
    write_sweep_csv, GridReport, GridRow, SweepPoint,
};

/// Number of resamples tried before a split is declared degenerate.
pub const MAX_SPLIT_ATTEMPTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Weighted graph, indirect relations, per-post scoring.
    #[serde(rename = "newstag")]
    NewsTag,
    /// Direct relations only.
    #[serde(rename = "newstag_no_indirect")]
    NoIndirect,
    /// Unweighted graph, per-news scoring.
    #[serde(rename = "newstag_unweighted")]
    Unweighted,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::NewsTag, Method::NoIndirect, Method::Unweighted];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::NewsTag => "newstag",
            Method::NoIndirect => "newstag_no_indirect",
            Method::Unweighted => "newstag_unweighted",
        }
    }

    pub fn weighted(self) -> bool {
        !matches!(self, Method::Unweighted)
    }

    pub fn per_post(self) -> bool {
        !matches!(self, Method::Unweighted)
    }

    pub fn indirect(self) -> bool {
        !matches!(self, Method::NoIndirect)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::param(format!("unknown method {s:?}")))
    }
}

/// How the indirect relations are accumulated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureMode {
    /// Exactly `k1` terms.
    Truncated,
    /// Stop on relative Frobenius change, at most `k1` terms.
    Tolerance(f64),
    /// Closed-form series limit.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub method: Method,
    pub k1: usize,
    pub closure: ClosureMode,
    pub drop_tolerance: f64,
    pub propagation: PropagationConfig,
    pub train_fraction: f64,
    pub time_horizon_hours: Option<f64>,
    pub seed: u64,
    pub repetitions: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            method: Method::NewsTag,
            k1: 10,
            closure: ClosureMode::Truncated,
            drop_tolerance: 0.0,
            propagation: PropagationConfig::default(),
            train_fraction: 0.8,
            time_horizon_hours: None,
            seed: 0,
            repetitions: 10,
        }
    }
}

impl ExperimentConfig {
    pub fn closure_options(&self) -> ClosureOptions {
        let stop = match self.closure {
            ClosureMode::Tolerance(tolerance) => ClosureStop::RelativeChange {
                tolerance,
                max_terms: self.k1,
            },
            _ => ClosureStop::Terms(self.k1),
        };
        ClosureOptions {
            stop,
            drop_tolerance: self.drop_tolerance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.propagation.validate()?;
        self.closure_options().validate()?;
        if self.repetitions == 0 {
            return Err(Error::param("repetitions must be >= 1"));
        }
        crate::corpus::check_fraction(self.train_fraction)?;
        if let Some(h) = self.time_horizon_hours {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::param(format!(
                    "time horizon must be a positive number of hours, got {h}"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn repetition_seed(&self, index: usize) -> u64 {
        self.seed ^ index as u64
    }
}
