use std::io::{BufRead, Write};
use std::str::FromStr;

use ndarray::Array2;

use super::model::argmax;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::fmt::{g17, parse_field, read_matrix};

/// Which conditional an association score is normalized by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Conditioned on the feature: `P(class | f) − P(class | ¬f)`, the ΔP
    /// of the feature read as a prediction.
    Forward,
    /// Conditioned on the class: `P(f | class) − P(f | ¬class)`, the ΔP′
    /// (informedness) of the feature as a predictor of the class.
    Backward,
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(Direction::Forward),
            "backward" => Ok(Direction::Backward),
            _ => Err(Error::InvalidConfig(format!("unknown direction {s:?}"))),
        }
    }
}

/// Hebbian co-occurrence counters whose scores are normalized on demand by
/// the accumulated marginals.
///
/// With `epsilon = 0` (strict) a score whose denominator is zero is an
/// error. With `epsilon > 0` every cell of the induced 2×2 table is
/// smoothed by `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct Informatron {
    joint: Array2<u64>,
    class_counts: Vec<u64>,
    feature_counts: Vec<u64>,
    n: u64,
    epsilon: f64,
}

impl Informatron {
    pub fn new(features: usize, classes: usize) -> Self {
        Self {
            joint: Array2::zeros((features, classes)),
            class_counts: vec![0; classes],
            feature_counts: vec![0; features],
            n: 0,
            epsilon: 0.0,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::OutOfRange { name: "epsilon", value: epsilon });
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn features(&self) -> usize {
        self.feature_counts.len()
    }

    pub fn classes(&self) -> usize {
        self.class_counts.len()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `c[j][k]`: events with feature `j` active and class `k`.
    pub fn joint(&self) -> &Array2<u64> {
        &self.joint
    }

    pub fn class_counts(&self) -> &[u64] {
        &self.class_counts
    }

    pub fn feature_counts(&self) -> &[u64] {
        &self.feature_counts
    }

    /// Records one event. Repeated indices in `active` count once.
    pub fn observe(&mut self, active: &[usize], class: usize) -> Result<()> {
        if class >= self.classes() {
            return Err(Error::ClassOutOfRange {
                index: class,
                k: self.classes(),
            });
        }
        let d = self.features();
        if let Some(&j) = active.iter().find(|&&j| j >= d) {
            return Err(Error::FeatureOutOfRange { index: j, d });
        }
        let mut set = active.to_vec();
        set.sort_unstable();
        set.dedup();
        self.n += 1;
        self.class_counts[class] += 1;
        for j in set {
            self.feature_counts[j] += 1;
            self.joint[[j, class]] += 1;
        }
        Ok(())
    }

    /// Association of `feature` with `class`, in [−1, 1].
    pub fn score(&self, feature: usize, class: usize, direction: Direction) -> Result<f64> {
        if class >= self.classes() {
            return Err(Error::ClassOutOfRange {
                index: class,
                k: self.classes(),
            });
        }
        if feature >= self.features() {
            return Err(Error::FeatureOutOfRange {
                index: feature,
                d: self.features(),
            });
        }
        let c = self.joint[[feature, class]] as f64;
        let p = self.class_counts[class] as f64;
        let f = self.feature_counts[feature] as f64;
        let n = self.n as f64;
        // the conditioning marginal and its complement
        let (given, other) = match direction {
            Direction::Backward => (p, f),
            Direction::Forward => (f, p),
        };
        let eps = self.epsilon;
        if eps == 0.0 {
            if given == 0.0 || given == n {
                return Err(Error::UndefinedAssociation {
                    feature,
                    class,
                    reason: match direction {
                        Direction::Backward => "class prevalence is 0 or 1",
                        Direction::Forward => "feature frequency is 0 or 1",
                    },
                });
            }
            return Ok(c / given - (other - c) / (n - given));
        }
        Ok((c + eps) / (given + 2.0 * eps) - (other - c + eps) / (n - given + 2.0 * eps))
    }

    /// Class with the largest summed backward score over `active`.
    pub fn predict(&self, active: &[usize]) -> Result<usize> {
        let mut totals = vec![0.0; self.classes()];
        for &j in active {
            for (k, total) in totals.iter_mut().enumerate() {
                *total += self.score(j, k, Direction::Backward)?;
            }
        }
        Ok(argmax(&totals))
    }

    /// Active (nonzero) feature indices of a row.
    pub fn active_features(row: &[f64]) -> Vec<usize> {
        row.iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    /// Observes every row of a binary dataset.
    pub fn fit(dataset: &LabeledDataset, epsilon: f64) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::EmptyInput);
        }
        dataset.require_binary()?;
        let mut model = Self::new(dataset.d(), dataset.k()).with_epsilon(epsilon)?;
        for (row, class) in dataset.rows() {
            model.observe(&Self::active_features(&row.to_vec()), class)?;
        }
        Ok(model)
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<usize> {
        self.predict(&Self::active_features(row))
    }

    /// Header `informatron,k,d,n,epsilon`, then `d` rows of `k` joint
    /// counts, a row of class counts and a row of feature counts.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        writeln!(
            w,
            "informatron,{},{},{},{}",
            self.classes(),
            self.features(),
            self.n,
            g17(self.epsilon)
        )?;
        for row in self.joint.outer_iter() {
            writeln!(w, "{}", join(row.iter()))?;
        }
        writeln!(w, "{}", join(self.class_counts.iter()))?;
        writeln!(w, "{}", join(self.feature_counts.iter()))?;
        Ok(())
    }

    pub fn read_from(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::EmptyInput)?;
        let header = header?;
        let fields: Vec<&str> = header.trim().split(',').collect();
        if fields.len() != 5 || fields[0] != "informatron" {
            return Err(Error::Parse {
                row: 1,
                message: format!("not an informatron header: {header:?}"),
            });
        }
        let k: usize = parse_field(fields[1], 1)?;
        let d: usize = parse_field(fields[2], 1)?;
        let n: u64 = parse_field(fields[3], 1)?;
        let epsilon: f64 = parse_field(fields[4], 1)?;
        let counts = |v: Vec<f64>| v.into_iter().map(|x| x as u64).collect::<Vec<u64>>();
        let joint = counts(read_matrix(&mut lines, d, k)?);
        let class_counts = counts(read_matrix(&mut lines, 1, k)?);
        let feature_counts = counts(read_matrix(&mut lines, 1, d)?);
        let model = Self {
            joint: Array2::from_shape_vec((d, k), joint).expect("checked row widths"),
            class_counts,
            feature_counts,
            n,
            epsilon: 0.0,
        }
        .with_epsilon(epsilon)?;
        model.check_counts()?;
        Ok(model)
    }

    fn check_counts(&self) -> Result<()> {
        let consistent = self.class_counts.iter().sum::<u64>() == self.n
            && self.joint.indexed_iter().all(|((j, k), &c)| {
                c <= self.feature_counts[j] && c <= self.class_counts[k]
            });
        if consistent {
            Ok(())
        } else {
            Err(Error::Parse {
                row: 0,
                message: "informatron counters are inconsistent".into(),
            })
        }
    }
}

fn join<T: ToString>(values: impl Iterator<Item = T>) -> String {
    values.map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}
