//! Spectral-radius bounds for symmetric nonnegative matrices.
//!
//! The lower bound is a Rayleigh quotient; the upper bound is the
//! Collatz–Wielandt ratio `max_i (Ax)_i / x_i` of the shifted matrix
//! `A = I + M`, whose Perron root is `1 + rho(M)`. The shift makes every
//! power-iteration vector strictly positive and removes the `-rho` eigenvalue
//! that stalls plain power iteration on bipartite graphs.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

const FLOOR: f64 = 1e-250;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusBounds {
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Largest common row sum over connected components whose rows all have the
/// same sum. For such a component that sum is its exact spectral radius.
fn regular_component_radius(m: &CsrMatrix) -> f64 {
    let n = m.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for &j in m.row(i).0 {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let sums = m.row_sums();
    let mut range: std::collections::HashMap<usize, (f64, f64)> = Default::default();
    for (i, &s) in sums.iter().enumerate() {
        let root = find(&mut parent, i);
        let e = range.entry(root).or_insert((s, s));
        e.0 = e.0.min(s);
        e.1 = e.1.max(s);
    }
    range
        .values()
        .filter(|(lo, hi)| hi - lo <= 1e-12 * hi.abs().max(1.0))
        .map(|&(_, hi)| hi)
        .fold(0.0, f64::max)
}

/// Runs shifted power iteration until the bracket is narrower than `gap`, or
/// `stop` says the current bracket is conclusive, or `max_iter` is reached.
pub fn radius_bounds_with(
    m: &CsrMatrix,
    max_iter: usize,
    gap: f64,
    mut stop: impl FnMut(&RadiusBounds) -> bool,
) -> Result<RadiusBounds> {
    let n = m.dim();
    if n == 0 {
        return Ok(RadiusBounds {
            lower: 0.0,
            upper: 0.0,
            iterations: 0,
        });
    }
    let regular = regular_component_radius(m);
    let mut x = vec![1.0; n];
    let mut best = RadiusBounds {
        lower: regular,
        upper: f64::INFINITY,
        iterations: 0,
    };
    for it in 1..=max_iter {
        let mx = m.matvec(&x)?;
        let mut upper = 0.0f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            upper = upper.max(mx[i] / x[i]);
            num += x[i] * mx[i];
            den += x[i] * x[i];
        }
        best.upper = best.upper.min(upper);
        best.lower = best.lower.max(num / den);
        best.iterations = it;
        if best.upper - best.lower <= gap || stop(&best) {
            break;
        }
        let scale = x
            .iter()
            .zip(&mx)
            .map(|(a, b)| a + b)
            .fold(0.0f64, f64::max);
        for i in 0..n {
            x[i] = ((x[i] + mx[i]) / scale).max(FLOOR);
        }
    }
    Ok(best)
}

pub fn radius_bounds(m: &CsrMatrix, max_iter: usize, gap: f64) -> Result<RadiusBounds> {
    radius_bounds_with(m, max_iter, gap, |_| false)
}

/// Proves `rho(m) < threshold` or fails with [`Error::SeriesDivergent`].
pub fn certify_radius_below(m: &CsrMatrix, threshold: f64, max_iter: usize) -> Result<RadiusBounds> {
    let b = radius_bounds_with(m, max_iter, 0.0, |b| b.upper < threshold || b.lower >= threshold)?;
    if b.upper < threshold {
        Ok(b)
    } else {
        Err(Error::SeriesDivergent {
            bound: b.upper,
            threshold,
        })
    }
}
