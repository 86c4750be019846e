use super::CredibilityVector;
use crate::error::{Error, Result};
use crate::graph::RelationMatrix;

/// Graph-regularized cost of a credibility assignment:
///
/// `mu * (sum_{k<l} W_kl (c_k/sqrt(D_kk) - c_l/sqrt(D_ll))^2 + sum_{D_kk=0} c_k^2)
///  + (1 - mu) * sum_k (c_k - c0_k)^2`
///
/// The smoothness part equals `c^T (I - X) c` with `X` from
/// [`symmetric_normalize`](super::symmetric_normalize), so the propagation
/// fixed point is its exact minimizer. Each unordered pair is counted once;
/// zero-degree nodes contribute through the identity term only.
pub fn cost_evaluate(
    w: &RelationMatrix,
    degrees: &[f64],
    c: &CredibilityVector,
    c0: &CredibilityVector,
    mu: f64,
) -> Result<f64> {
    let q = w.dim();
    for len in [degrees.len(), c.len(), c0.len()] {
        if len != q {
            return Err(Error::DimensionMismatch { expected: q, got: len });
        }
    }
    let scaled: Vec<f64> = c
        .values()
        .iter()
        .zip(degrees)
        .map(|(&v, &d)| if d > 0.0 { v / d.sqrt() } else { 0.0 })
        .collect();
    let mut smooth = 0.0;
    for (k, l, v) in w.matrix().upper_triplets() {
        if k != l {
            let diff = scaled[k] - scaled[l];
            smooth += v * diff * diff;
        }
    }
    // Diagonal entries of W cancel in the pairwise differences but are part
    // of D, which keeps the identity above exact.
    for (k, &d) in degrees.iter().enumerate() {
        if d <= 0.0 {
            smooth += c.values()[k] * c.values()[k];
        }
    }
    let fit: f64 = c
        .values()
        .iter()
        .zip(c0.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(mu * smooth + (1.0 - mu) * fit)
}
