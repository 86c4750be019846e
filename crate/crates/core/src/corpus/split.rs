use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Corpus;
use crate::error::{Error, Result};

/// Train/test partition of news ids. Both sides keep corpus order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Split {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

pub(crate) fn check_fraction(fraction: f64) -> Result<()> {
    if fraction > 0.0 && fraction < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!(
            "train fraction must be in (0,1), got {fraction}"
        )))
    }
}

/// Number of training items for `n` items: `floor(fraction * n)`, kept within
/// `1..=n-1` so neither side is empty.
pub(crate) fn train_size(n: usize, fraction: f64) -> usize {
    let k = (fraction * n as f64 + 1e-9).floor() as usize;
    k.clamp(1, n.saturating_sub(1).max(1))
}

/// Uniformly partitions `ids`; each side preserves the input order.
pub fn split_ids<R: Rng + ?Sized>(
    ids: &[String],
    fraction: f64,
    rng: &mut R,
) -> Result<(Vec<String>, Vec<String>)> {
    check_fraction(fraction)?;
    if ids.len() < 2 {
        return Err(Error::param(format!(
            "need at least 2 items to split, got {}",
            ids.len()
        )));
    }
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.shuffle(rng);
    let k = train_size(ids.len(), fraction);
    let mut in_train = vec![false; ids.len()];
    for &i in &order[..k] {
        in_train[i] = true;
    }
    let mut train = Vec::with_capacity(k);
    let mut test = Vec::with_capacity(ids.len() - k);
    for (id, t) in ids.iter().zip(in_train) {
        if t {
            train.push(id.clone());
        } else {
            test.push(id.clone());
        }
    }
    Ok((train, test))
}

/// Splits labeled news outside `holdout`; unlabeled and held-out news always
/// land on the test side.
pub(crate) fn split_with_rng<R: Rng + ?Sized>(
    corpus: &Corpus,
    fraction: f64,
    rng: &mut R,
    holdout: &HashSet<String>,
) -> Result<Split> {
    let candidates: Vec<String> = corpus
        .labeled()
        .filter(|(n, _)| !holdout.contains(&n.id))
        .map(|(n, _)| n.id.clone())
        .collect();
    let (train, _) = split_ids(&candidates, fraction, rng)?;
    let train_set: HashSet<&str> = train.iter().map(String::as_str).collect();
    let test = corpus
        .news()
        .iter()
        .filter(|n| !train_set.contains(n.id.as_str()))
        .map(|n| n.id.clone())
        .collect();
    Ok(Split { train, test })
}

/// Seeded uniform partition of the labeled news.
pub fn split_corpus(corpus: &Corpus, train_fraction: f64, seed: u64) -> Result<Split> {
    check_fraction(train_fraction)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    split_with_rng(corpus, train_fraction, &mut rng, &HashSet::new())
}
