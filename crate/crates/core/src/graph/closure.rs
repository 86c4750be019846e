//! All-relations closure `N + N^2 + ... `, truncated or in closed form.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{RelationKind, RelationMatrix};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::spectral::certify_radius_below;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureStop {
    /// Sum exactly this many powers.
    Terms(usize),
    /// Stop once `||N^t||_F / ||W_t||_F` falls below `tolerance`.
    RelativeChange { tolerance: f64, max_terms: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureOptions {
    pub stop: ClosureStop,
    /// Entries smaller than this are pruned after every term; 0 keeps all.
    pub drop_tolerance: f64,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        ClosureOptions {
            stop: ClosureStop::Terms(10),
            drop_tolerance: 0.0,
        }
    }
}

impl ClosureOptions {
    pub fn terms(k1: usize) -> Self {
        ClosureOptions {
            stop: ClosureStop::Terms(k1),
            drop_tolerance: 0.0,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let max = match self.stop {
            ClosureStop::Terms(k) => k,
            ClosureStop::RelativeChange { tolerance, max_terms } => {
                if !(tolerance >= 0.0) {
                    return Err(Error::param("closure tolerance must be >= 0"));
                }
                max_terms
            }
        };
        if max == 0 {
            return Err(Error::param("k1 must be a positive integer"));
        }
        if !(self.drop_tolerance >= 0.0) {
            return Err(Error::param("drop tolerance must be >= 0"));
        }
        Ok(())
    }
}

/// Relative Frobenius change contributed by each accumulated term.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ClosureTrace {
    pub relative_changes: Vec<f64>,
}

fn require_normalized(n: &RelationMatrix) -> Result<()> {
    match n.kind {
        RelationKind::NormalizedDirect => Ok(()),
        other => Err(Error::param(format!(
            "closure needs a normalized direct matrix, got {other}"
        ))),
    }
}

/// Accumulates `W = N + N^2 + ...` by repeated sparse multiply-accumulate.
pub fn all_relations(n: &RelationMatrix, opts: &ClosureOptions) -> Result<(RelationMatrix, ClosureTrace)> {
    require_normalized(n)?;
    opts.validate()?;
    let (max_terms, tolerance) = match opts.stop {
        ClosureStop::Terms(k) => (k, None),
        ClosureStop::RelativeChange { tolerance, max_terms } => (max_terms, Some(tolerance)),
    };
    let base = n.matrix();
    let mut power = base.prune(opts.drop_tolerance);
    let mut acc = power.clone();
    let mut trace = ClosureTrace::default();
    trace.relative_changes.push(relative(&power, &acc));
    let mut terms = 1;
    while terms < max_terms {
        if let Some(tol) = tolerance {
            if trace.relative_changes.last().is_some_and(|&r| r < tol) {
                break;
            }
        }
        power = power.matmul(base)?.mirror_upper().prune(opts.drop_tolerance);
        acc = acc.add(&power)?.prune(opts.drop_tolerance);
        terms += 1;
        trace.relative_changes.push(relative(&power, &acc));
    }
    let kind = RelationKind::AllRelationsTruncated { terms };
    Ok((RelationMatrix::new_unchecked(kind, acc), trace))
}

fn relative(delta: &CsrMatrix, total: &CsrMatrix) -> f64 {
    let t = total.frobenius_norm();
    if t == 0.0 {
        0.0
    } else {
        delta.frobenius_norm() / t
    }
}

/// `N + N^2 + ... + N^k1`.
pub fn all_relations_truncated(n: &RelationMatrix, k1: usize, drop_tolerance: f64) -> Result<RelationMatrix> {
    let opts = ClosureOptions {
        stop: ClosureStop::Terms(k1),
        drop_tolerance,
    };
    all_relations(n, &opts).map(|(m, _)| m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactOptions {
    /// Largest dimension solved with a dense factorization; above it each
    /// column is solved by conjugate gradients.
    pub dense_cap: usize,
    /// The spectral radius must be certified below `1 - radius_margin`.
    pub radius_margin: f64,
    pub max_power_iterations: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            dense_cap: 2000,
            radius_margin: 1e-6,
            max_power_iterations: 100_000,
        }
    }
}

/// `N (I - N)^{-1}`, after proving the series converges.
pub fn all_relations_exact(n: &RelationMatrix, opts: &ExactOptions) -> Result<RelationMatrix> {
    require_normalized(n)?;
    certify_radius_below(n.matrix(), 1.0 - opts.radius_margin, opts.max_power_iterations)?;
    let q = n.dim();
    let solved = if q <= opts.dense_cap {
        dense_solve(n.matrix())?
    } else {
        cg_columns(n.matrix())?
    };
    // N (I-N)^{-1} is entrywise nonnegative; negative values are roundoff.
    let cleaned = solved.map_entries(|_, _, v| v.max(0.0)).prune(f64::MIN_POSITIVE);
    Ok(RelationMatrix::new_unchecked(
        RelationKind::AllRelationsExact,
        cleaned.mirror_upper(),
    ))
}

fn dense_solve(n: &CsrMatrix) -> Result<CsrMatrix> {
    let nd = n.to_dense();
    let a = DMatrix::identity(n.dim(), n.dim()) - &nd;
    let z = match a.clone().cholesky() {
        Some(ch) => ch.solve(&nd),
        None => a
            .lu()
            .solve(&nd)
            .ok_or_else(|| Error::Solver("I - N is singular".into()))?,
    };
    CsrMatrix::from_dense(&z)
}

fn cg_columns(n: &CsrMatrix) -> Result<CsrMatrix> {
    let q = n.dim();
    let columns: Vec<Result<Vec<(usize, f64)>>> = (0..q)
        .into_par_iter()
        .map(|j| {
            // column j of N equals row j by symmetry
            let mut b = vec![0.0; q];
            let (cols, vals) = n.row(j);
            for (&i, &v) in cols.iter().zip(vals) {
                b[i] = v;
            }
            let x = conjugate_gradient(n, &b, 1e-14, 20 * q + 100)?;
            Ok(x.into_iter().enumerate().filter(|&(_, v)| v != 0.0).collect())
        })
        .collect();
    let mut triplets = Vec::new();
    for (j, col) in columns.into_iter().enumerate() {
        for (i, v) in col? {
            triplets.push((i, j, v));
        }
    }
    CsrMatrix::from_triplets(q, &triplets)
}

/// Solves `(I - N) x = b`.
fn conjugate_gradient(n: &CsrMatrix, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let apply = |v: &[f64]| -> Vec<f64> {
        let nv = serial_matvec(n, v);
        v.iter().zip(nv).map(|(a, b)| a - b).collect()
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; b.len()];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for _ in 0..max_iter {
        if rr.sqrt() <= rel_tol * bnorm {
            return Ok(x);
        }
        let ap = apply(&p);
        let alpha = rr / dot(&p, &ap);
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        for i in 0..p.len() {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_next;
    }
    if rr.sqrt() <= 1e-10 * bnorm {
        Ok(x)
    } else {
        Err(Error::Solver(format!(
            "conjugate gradients did not converge (residual {:.3e})",
            rr.sqrt() / bnorm
        )))
    }
}

fn serial_matvec(m: &CsrMatrix, x: &[f64]) -> Vec<f64> {
    (0..m.dim())
        .map(|i| {
            let (cols, vals) = m.row(i);
            cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
        })
        .collect()
}
