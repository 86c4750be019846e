use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

/// Counts indexed by (truth, prediction).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_as_true: usize,
    pub true_as_fake: usize,
    pub fake_as_true: usize,
    pub fake_as_fake: usize,
}

impl Confusion {
    pub fn add(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::True, Label::True) => self.true_as_true += 1,
            (Label::True, Label::Fake) => self.true_as_fake += 1,
            (Label::Fake, Label::True) => self.fake_as_true += 1,
            (Label::Fake, Label::Fake) => self.fake_as_fake += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_as_true + self.true_as_fake + self.fake_as_true + self.fake_as_fake
    }

    pub fn correct(&self) -> usize {
        self.true_as_true + self.fake_as_fake
    }

    /// F1 of one class; 0 when it has no true positives.
    pub fn class_f1(&self, class: Label) -> f64 {
        let (num, denom) = self.class_ratio(class);
        if denom == 0 {
            0.0
        } else {
            num as f64 / denom as f64
        }
    }

    fn class_ratio(&self, class: Label) -> (u128, u128) {
        let (tp, fp, fn_) = match class {
            Label::True => (self.true_as_true, self.fake_as_true, self.true_as_fake),
            Label::Fake => (self.fake_as_fake, self.true_as_fake, self.fake_as_true),
        };
        ((2 * tp) as u128, (2 * tp + fp + fn_) as u128)
    }

    /// Mean of the two class F1 scores, rounded once from the exact fraction.
    pub fn macro_f1(&self) -> f64 {
        let (na, da) = self.class_ratio(Label::True);
        let (nb, db) = self.class_ratio(Label::Fake);
        match (da, db) {
            (0, 0) => 0.0,
            (0, _) => nb as f64 / (2 * db) as f64,
            (_, 0) => na as f64 / (2 * da) as f64,
            _ => (na * db + nb * da) as f64 / (2 * da * db) as f64,
        }
    }

    pub fn merge(&mut self, other: &Confusion) {
        self.true_as_true += other.true_as_true;
        self.true_as_fake += other.true_as_fake;
        self.fake_as_true += other.fake_as_true;
        self.fake_as_fake += other.fake_as_fake;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct F1Scores {
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub f1_true: f64,
    pub f1_fake: f64,
    pub confusion: Confusion,
}

/// Macro F1 averages the two class F1 scores (a class absent from both
/// inputs scores 0). Micro F1 pools the counts, which for single-label
/// binary data is accuracy.
pub fn compute_f1(predictions: &[Label], truths: &[Label]) -> Result<F1Scores> {
    if predictions.len() != truths.len() {
        return Err(Error::DimensionMismatch {
            expected: truths.len(),
            got: predictions.len(),
        });
    }
    if truths.is_empty() {
        return Err(Error::param("cannot score an empty prediction set"));
    }
    let mut confusion = Confusion::default();
    for (&p, &t) in predictions.iter().zip(truths) {
        confusion.add(t, p);
    }
    let f1_true = confusion.class_f1(Label::True);
    let f1_fake = confusion.class_f1(Label::Fake);
    // pooled: tp = correct, fp = fn = wrong
    let n = confusion.total();
    let micro_f1 = confusion.correct() as f64 / n as f64;
    Ok(F1Scores {
        macro_f1: confusion.macro_f1(),
        micro_f1,
        f1_true,
        f1_fake,
        confusion,
    })
}

/// Mean and sample standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        if values.is_empty() {
            return Summary { mean: f64::NAN, std: f64::NAN };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Summary { mean, std }
    }
}
