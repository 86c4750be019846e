use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{CredibilityVector, Provenance};
use crate::error::{Error, Result};
use crate::graph::RelationMatrix;
use crate::sparse::CsrMatrix;

/// `X = D^{-1/2} W D^{-1/2}` with `D` the row sums of `W`. Rows and columns
/// of zero-degree nodes are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedOperator {
    x: CsrMatrix,
    degrees: Vec<f64>,
}

impl NormalizedOperator {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.x
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }
}

pub fn symmetric_normalize(w: &RelationMatrix) -> NormalizedOperator {
    let degrees = w.matrix().row_sums();
    let x = w.matrix().map_entries(|k, l, v| {
        let (dk, dl) = (degrees[k], degrees[l]);
        if dk > 0.0 && dl > 0.0 {
            v / (dk * dl).sqrt()
        } else {
            0.0
        }
    });
    NormalizedOperator { x, degrees }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagationMode {
    Iterative,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub mu: f64,
    pub max_iterations: usize,
    /// Iteration stops once the max-norm change drops below this.
    pub tolerance: f64,
    pub mode: PropagationMode,
    /// Largest dimension accepted by the closed-form solve.
    pub closed_form_cap: usize,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            mu: 0.4,
            max_iterations: 100,
            tolerance: 1e-9,
            mode: PropagationMode::Iterative,
            closed_form_cap: 2000,
        }
    }
}

impl PropagationConfig {
    /// A fixed number of update steps with no early stop.
    pub fn fixed_steps(mu: f64, steps: usize) -> Self {
        PropagationConfig {
            mu,
            max_iterations: steps,
            tolerance: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_mu(self.mu)?;
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations must be positive"));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::param("tolerance must be >= 0"));
        }
        Ok(())
    }
}

pub(crate) fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu < 1.0 {
        Ok(())
    } else {
        Err(Error::param("mu must be in (0,1)"))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PropagationTrace {
    /// `||c(t) - c(t-1)||_inf` for every iteration.
    pub max_norm_changes: Vec<f64>,
    /// `||c(t) - c(t-1)||_2` for every iteration.
    pub l2_changes: Vec<f64>,
    pub converged: bool,
}

fn check_len(op: &NormalizedOperator, c0: &CredibilityVector) -> Result<()> {
    if op.dim() != c0.len() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: c0.len(),
        });
    }
    Ok(())
}

/// Runs `c(t) = mu X c(t-1) + (1 - mu) c0` from `c(0) = c0`.
pub fn propagate_iterative(
    op: &NormalizedOperator,
    c0: &CredibilityVector,
    config: &PropagationConfig,
) -> Result<(CredibilityVector, PropagationTrace)> {
    config.validate()?;
    check_len(op, c0)?;
    let mu = config.mu;
    let anchor: Vec<f64> = c0.values().iter().map(|v| (1.0 - mu) * v).collect();
    let mut c = c0.values().to_vec();
    let mut trace = PropagationTrace::default();
    for _ in 0..config.max_iterations {
        let xc = op.x.matvec(&c)?;
        let mut max_change = 0.0f64;
        let mut sq = 0.0;
        for k in 0..c.len() {
            let next = mu * xc[k] + anchor[k];
            let d = next - c[k];
            max_change = max_change.max(d.abs());
            sq += d * d;
            c[k] = next;
        }
        trace.max_norm_changes.push(max_change);
        trace.l2_changes.push(sq.sqrt());
        if max_change < config.tolerance {
            trace.converged = true;
            break;
        }
    }
    Ok((
        CredibilityVector::new(c, Provenance::Propagated, Some(mu)),
        trace,
    ))
}

/// Solves `(I - mu X) c = (1 - mu) c0` directly.
pub fn propagate_closed_form(
    op: &NormalizedOperator,
    c0: &CredibilityVector,
    mu: f64,
    cap: usize,
) -> Result<CredibilityVector> {
    check_mu(mu)?;
    check_len(op, c0)?;
    let q = op.dim();
    if q > cap {
        return Err(Error::param(format!(
            "closed-form solve is limited to {cap} hashtags, got {q}"
        )));
    }
    let a = DMatrix::identity(q, q) - op.x.to_dense() * mu;
    let rhs = DVector::from_iterator(q, c0.values().iter().map(|v| (1.0 - mu) * v));
    let sol = match a.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Solver("I - mu X is singular".into()))?,
    };
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver("non-finite closed-form solution".into()));
    }
    Ok(CredibilityVector::new(
        sol.iter().copied().collect(),
        Provenance::Propagated,
        Some(mu),
    ))
}

/// Dispatches on `config.mode`; only the iterative mode yields a trace.
pub fn propagate(
    op: &NormalizedOperator,
    c0: &CredibilityVector,
    config: &PropagationConfig,
) -> Result<(CredibilityVector, Option<PropagationTrace>)> {
    match config.mode {
        PropagationMode::Iterative => propagate_iterative(op, c0, config).map(|(c, t)| (c, Some(t))),
        PropagationMode::ClosedForm => {
            config.validate()?;
            propagate_closed_form(op, c0, config.mu, config.closed_form_cap).map(|c| (c, None))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::RelationKind;

    fn relation(n: usize, rows: &[f64]) -> RelationMatrix {
        RelationMatrix::new(
            RelationKind::AllRelationsTruncated { terms: 1 },
            CsrMatrix::from_dense(&DMatrix::from_row_slice(n, n, rows)).unwrap(),
        )
        .unwrap()
    }

    fn c0(v: &[f64]) -> CredibilityVector {
        CredibilityVector::new(v.to_vec(), Provenance::InitialC0, None)
    }

    #[test]
    fn normalize_pair_any_weight() {
        for w in [0.1, 1.0, 3.7, 1e-8, 12345.0] {
            let op = symmetric_normalize(&relation(2, &[0.0, w, w, 0.0]));
            assert_eq!(op.matrix().get(0, 1), 1.0, "w = {w}");
            assert_eq!(op.matrix().get(1, 0), 1.0);
        }
    }

    #[test]
    fn normalize_path() {
        let op = symmetric_normalize(&relation(3, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]));
        assert_eq!(op.degrees(), &[1.0, 2.0, 1.0]);
        let s = 1.0 / 2f64.sqrt();
        let x = op.matrix().to_dense();
        assert!((x[(0, 1)] - s).abs() < 1e-15 && (x[(1, 2)] - s).abs() < 1e-15);
        assert_eq!(x[(0, 2)], 0.0);
    }

    #[test]
    fn isolated_node_anchors() {
        let op = symmetric_normalize(&relation(3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!(op.matrix().row(2).0.len(), 0);
        let mu = 0.4;
        let c = propagate_closed_form(&op, &c0(&[0.0, 0.0, 0.8]), mu, 100).unwrap();
        assert!((c.values()[2] - (1.0 - mu) * 0.8).abs() < 1e-15);
        let (ci, _) = propagate_iterative(&op, &c0(&[0.0, 0.0, 0.8]), &PropagationConfig { mu, ..Default::default() }).unwrap();
        assert!((ci.values()[2] - (1.0 - mu) * 0.8).abs() < 1e-9);
    }

    #[test]
    fn two_node_fixed_point() {
        let op = symmetric_normalize(&relation(2, &[0.0, 1.0, 1.0, 0.0]));
        let cfg = PropagationConfig {
            mu: 0.4,
            tolerance: 1e-14,
            max_iterations: 1000,
            ..Default::default()
        };
        let (c, trace) = propagate_iterative(&op, &c0(&[1.0, -1.0]), &cfg).unwrap();
        assert!(trace.converged);
        assert!((c.values()[0] - 3.0 / 7.0).abs() < 1e-12);
        assert!((c.values()[1] + 3.0 / 7.0).abs() < 1e-12);
        let cf = propagate_closed_form(&op, &c0(&[1.0, -1.0]), 0.4, 10).unwrap();
        assert!((cf.values()[0] - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn tiny_mu_returns_seed() {
        let op = symmetric_normalize(&relation(2, &[0.0, 1.0, 1.0, 0.0]));
        let (c, _) = propagate_iterative(&op, &c0(&[0.5, -0.25]), &PropagationConfig { mu: 1e-9, ..Default::default() }).unwrap();
        assert!((c.values()[0] - 0.5).abs() < 1e-8);
        assert!((c.values()[1] + 0.25).abs() < 1e-8);
    }

    #[test]
    fn fixed_steps_run_exactly() {
        let op = symmetric_normalize(&relation(2, &[0.0, 1.0, 1.0, 0.0]));
        let (_, trace) = propagate_iterative(&op, &c0(&[1.0, -1.0]), &PropagationConfig::fixed_steps(0.4, 5)).unwrap();
        assert_eq!(trace.max_norm_changes.len(), 5);
        assert!(!trace.converged);
    }

    #[test]
    fn zero_seed_and_negation() {
        let op = symmetric_normalize(&relation(3, &[0.0, 2.0, 1.0, 2.0, 0.0, 0.5, 1.0, 0.5, 0.0]));
        let z = propagate_closed_form(&op, &c0(&[0.0; 3]), 0.4, 10).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        let a = propagate_closed_form(&op, &c0(&[0.3, -1.0, 0.5]), 0.7, 10).unwrap();
        let b = propagate_closed_form(&op, &c0(&[-0.3, 1.0, -0.5]), 0.7, 10).unwrap();
        for k in 0..3 {
            assert!((a.values()[k] + b.values()[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn mu_validation() {
        let op = symmetric_normalize(&relation(2, &[0.0, 1.0, 1.0, 0.0]));
        for mu in [0.0, 1.0, 1.5, -0.1, f64::NAN] {
            let err = propagate_iterative(&op, &c0(&[1.0, -1.0]), &PropagationConfig { mu, ..Default::default() }).unwrap_err();
            assert_eq!(err.to_string(), "mu must be in (0,1)");
        }
    }

    #[test]
    fn closed_form_cap() {
        let op = symmetric_normalize(&relation(2, &[0.0, 1.0, 1.0, 0.0]));
        assert!(propagate_closed_form(&op, &c0(&[1.0, -1.0]), 0.4, 1).is_err());
    }
}
