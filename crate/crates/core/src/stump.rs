//! Weighted decision stumps.

use ndarray::Array2;

use crate::contingency::ContingencyTable;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::linear::argmax;
use crate::metrics;

/// One-feature, two-leaf classifier: `x[feature] <= threshold` predicts
/// `below_class`, anything else `above_class`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub below_class: usize,
    pub above_class: usize,
}

impl Stump {
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        match x.get(self.feature) {
            Some(&v) => Ok(self.decide(v)),
            None => Err(Error::DimensionMismatch {
                expected: self.feature + 1,
                found: x.len(),
            }),
        }
    }

    #[inline]
    pub fn decide(&self, value: f64) -> usize {
        if value <= self.threshold {
            self.below_class
        } else {
            self.above_class
        }
    }

    /// Predictions for every row of `dataset`.
    pub fn predict_all(&self, dataset: &LabeledDataset) -> Vec<usize> {
        dataset.x().column(self.feature).iter().map(|&v| self.decide(v)).collect()
    }
}

/// What a stump search maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitCriterion {
    #[default]
    WeightedAccuracy,
    /// Informedness of the stump's weighted contingency table. Leaves are
    /// still labeled by weighted majority; splits whose informedness is
    /// undefined are skipped.
    Informedness,
}

/// Per-feature instance orderings, computed once and reused across
/// reweightings of the same data.
#[derive(Debug, Clone)]
pub struct Presorted {
    order: Vec<Vec<usize>>,
}

impl Presorted {
    pub fn new(dataset: &LabeledDataset) -> Self {
        let order = dataset
            .x()
            .columns()
            .into_iter()
            .map(|column| {
                let mut idx: Vec<usize> = (0..column.len()).collect();
                idx.sort_by(|&a, &b| column[a].total_cmp(&column[b]));
                idx
            })
            .collect();
        Self { order }
    }
}

/// Best stump under `weights` with the default criterion.
pub fn train_stump(dataset: &LabeledDataset, weights: &[f64]) -> Result<Stump> {
    let presorted = Presorted::new(dataset);
    search(dataset, weights, &presorted, SplitCriterion::WeightedAccuracy).map(|(s, _)| s)
}

pub fn predict_stump(stump: &Stump, x: &[f64]) -> Result<usize> {
    stump.predict(x)
}

/// Weighted accuracy of `stump`, summed over instances in order.
pub fn weighted_accuracy(stump: &Stump, dataset: &LabeledDataset, weights: &[f64]) -> f64 {
    let column = dataset.x().column(stump.feature);
    let mut total = 0.0;
    for ((&v, &y), &w) in column.iter().zip(dataset.y()).zip(weights) {
        if stump.decide(v) == y {
            total += w;
        }
    }
    total
}

pub(crate) fn check_weights(weights: &[f64], n: usize) -> Result<()> {
    if weights.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: weights.len(),
        });
    }
    if let Some((index, &value)) = weights.iter().enumerate().find(|(_, &w)| !(w >= 0.0 && w.is_finite())) {
        return Err(Error::InvalidWeight { index, value });
    }
    if !weights.iter().any(|&w| w > 0.0) {
        return Err(Error::ZeroTotalWeight);
    }
    Ok(())
}

/// Exhaustive search over features and thresholds. Candidates are the
/// midpoints between consecutive distinct values plus ±∞. Returns the best
/// stump and its criterion value; ties go to the lower feature, then the
/// lower threshold, then the lower class.
pub fn search(
    dataset: &LabeledDataset,
    weights: &[f64],
    presorted: &Presorted,
    criterion: SplitCriterion,
) -> Result<(Stump, f64)> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_weights(weights, dataset.n())?;
    let k = dataset.k();
    let y = dataset.y();
    let mut totals = vec![0.0; k];
    for (&c, &w) in y.iter().zip(weights) {
        totals[c] += w;
    }

    let mut best: Option<(Stump, f64)> = None;
    let mut consider = |candidate: Stump, score: f64| {
        if best.as_ref().is_none_or(|(_, s)| score > *s) {
            best = Some((candidate, score));
        }
    };

    let mut left = vec![0.0; k];
    let mut right = vec![0.0; k];
    for (feature, order) in presorted.order.iter().enumerate() {
        let column = dataset.x().column(feature);
        left.iter_mut().for_each(|v| *v = 0.0);
        let mut evaluate = |left: &[f64], threshold: f64| -> Option<(Stump, f64)> {
            for ((r, &t), &l) in right.iter_mut().zip(&totals).zip(left) {
                *r = t - l;
            }
            let below_class = argmax(left);
            let above_class = argmax(&right);
            let stump = Stump {
                feature,
                threshold,
                below_class,
                above_class,
            };
            let score = match criterion {
                SplitCriterion::WeightedAccuracy => left[below_class] + right[above_class],
                SplitCriterion::Informedness => leaf_informedness(left, &right, below_class, above_class)?,
            };
            Some((stump, score))
        };

        if let Some((s, v)) = evaluate(&left, f64::NEG_INFINITY) {
            consider(s, v);
        }
        for pos in 0..order.len() {
            let i = order[pos];
            left[y[i]] += weights[i];
            let Some(&next) = order.get(pos + 1) else { break };
            let (a, b) = (column[i], column[next]);
            if a == b {
                continue;
            }
            let mut threshold = a + (b - a) / 2.0;
            if threshold >= b {
                threshold = a;
            }
            if let Some((s, v)) = evaluate(&left, threshold) {
                consider(s, v);
            }
        }
        if let Some((s, v)) = evaluate(&left, f64::INFINITY) {
            consider(s, v);
        }
    }
    best.ok_or_else(|| Error::InvalidConfig("no split has a defined informedness".into()))
}

fn leaf_informedness(left: &[f64], right: &[f64], below: usize, above: usize) -> Option<f64> {
    let k = left.len();
    let mut counts = Array2::zeros((k, k));
    for r in 0..k {
        counts[[below, r]] += left[r];
        counts[[above, r]] += right[r];
    }
    let table = ContingencyTable::from_counts(counts).ok()?;
    metrics::informedness(&table).ok()
}
