//! AdaBoost.M1 over decision stumps with a pluggable goodness measure.
//!
//! Each round fits a stump to the current instance weights and scores it
//! with `g`: weighted accuracy for [`Measure::Accuracy`] (AdaBoost), or the
//! gini map `(K + 1) / 2` of a chance-corrected measure `K` computed on the
//! weighted contingency table (AdaBook, when `K` is informedness). Rounds
//! with `g` at or below ½ + δ, or at or above 1 − δ, stop the run without
//! joining the ensemble. Accepted members vote with `α = ln(g / (1 − g))`
//! and misclassified instances have their weight multiplied by
//! `g / (1 − g)` before renormalisation.
//!
//! ```
//! use bookmaker::boost::{boost_train, BoostConfig};
//! use bookmaker::dataset::LabeledDataset;
//! use bookmaker::metrics::Measure;
//! use ndarray::array;
//!
//! let x = array![[0.0], [1.0], [2.0], [3.0], [4.0], [5.0]];
//! let data = LabeledDataset::new(x, vec![0, 0, 1, 0, 1, 1], LabeledDataset::numbered_classes(2))?;
//! let config = BoostConfig::new(Measure::Informedness).rounds(10);
//! let (ensemble, trace) = boost_train(&data, &config, None)?;
//! assert!(!trace.rounds.is_empty());
//! assert_eq!(ensemble.predict(&[5.0])?, 1);
//! # Ok::<(), bookmaker::Error>(())
//! ```

use std::io::{BufRead, Write};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contingency::ContingencyTable;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::fmt::{g17, parse_field, read_matrix};
use crate::linear::argmax;
use crate::metrics::Measure;
use crate::stump::{check_weights, search, Presorted, SplitCriterion, Stump};

/// What to do when a chance-corrected measure is undefined on a round's
/// table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UndefinedPolicy {
    /// Fail with [`Error::UndefinedMeasure`].
    #[default]
    Abort,
    /// End the run as if the round had been rejected.
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostConfig {
    pub rounds: usize,
    pub measure: Measure,
    pub delta: f64,
    pub resample: bool,
    pub seed: u64,
    pub on_undefined: UndefinedPolicy,
    pub criterion: SplitCriterion,
}

impl BoostConfig {
    pub fn new(measure: Measure) -> Self {
        Self {
            rounds: 100,
            measure,
            delta: 1e-9,
            resample: false,
            seed: 0,
            on_undefined: UndefinedPolicy::Abort,
            criterion: SplitCriterion::WeightedAccuracy,
        }
    }

    pub fn rounds(mut self, rounds: usize) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn resample(mut self, on: bool) -> Self {
        self.resample = on;
        self
    }

    pub fn on_undefined(mut self, policy: UndefinedPolicy) -> Self {
        self.on_undefined = policy;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::InvalidConfig("rounds must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::InvalidConfig(format!("delta {} outside (0, 0.5)", self.delta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Member {
    pub stump: Stump,
    pub alpha: f64,
}

/// Weighted vote of stumps.
///
/// When the very first round is rejected no member is accepted; the
/// ensemble then predicts with that round's stump on its own, which is what
/// a booster that "fails to boost" leaves behind.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<Member>,
    fallback: Option<Stump>,
    measure: Measure,
    k: usize,
}

impl Ensemble {
    pub fn new(members: Vec<Member>, measure: Measure, k: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if let Some(m) = members.iter().find(|m| !(m.alpha > 0.0 && m.alpha.is_finite())) {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: m.alpha,
            });
        }
        Ok(Self {
            members,
            fallback: None,
            measure,
            k,
        })
    }

    fn single(stump: Stump, measure: Measure, k: usize) -> Self {
        Self {
            members: Vec::new(),
            fallback: Some(stump),
            measure,
            k,
        }
    }

    /// Accepted members; empty for a fallback ensemble.
    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn fallback(&self) -> Option<&Stump> {
        self.fallback.as_ref()
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        if let Some(stump) = &self.fallback {
            return stump.predict(x);
        }
        let mut votes = vec![0.0; self.k];
        for m in &self.members {
            votes[m.stump.predict(x)?] += m.alpha;
        }
        Ok(argmax(&votes))
    }

    pub fn predict_all(&self, dataset: &LabeledDataset) -> Result<Vec<usize>> {
        dataset.rows().map(|(row, _)| self.predict(&row.to_vec())).collect()
    }

    /// Header `measure,k,rounds`, then `feature,threshold,below_class,
    /// above_class,alpha` per member. A fallback ensemble is written as its
    /// single stump with alpha 0.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let lines: Vec<(Stump, f64)> = match &self.fallback {
            Some(s) => vec![(*s, 0.0)],
            None => self.members.iter().map(|m| (m.stump, m.alpha)).collect(),
        };
        writeln!(w, "{},{},{}", self.measure, self.k, lines.len())?;
        for (s, alpha) in lines {
            writeln!(
                w,
                "{},{},{},{},{}",
                s.feature,
                g17(s.threshold),
                s.below_class,
                s.above_class,
                g17(alpha)
            )?;
        }
        Ok(())
    }

    pub fn read_from(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::EmptyInput)?;
        let header = header?;
        let fields: Vec<&str> = header.trim().split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                row: 1,
                message: format!("expected measure,k,rounds, found {header:?}"),
            });
        }
        let measure: Measure = fields[0].parse()?;
        let k: usize = parse_field(fields[1], 1)?;
        let rounds: usize = parse_field(fields[2], 1)?;
        let values = read_matrix(&mut lines, rounds, 5)?;
        let mut members = Vec::with_capacity(rounds);
        for (i, v) in values.chunks(5).enumerate() {
            let class = |x: f64| -> Result<usize> {
                if x >= 0.0 && x.fract() == 0.0 && (x as usize) < k {
                    Ok(x as usize)
                } else {
                    Err(Error::Parse {
                        row: i + 2,
                        message: format!("bad class {x}"),
                    })
                }
            };
            let stump = Stump {
                feature: v[0] as usize,
                threshold: v[1],
                below_class: class(v[2])?,
                above_class: class(v[3])?,
            };
            members.push(Member { stump, alpha: v[4] });
        }
        if let [only] = members.as_slice() {
            if only.alpha == 0.0 {
                return Ok(Self::single(only.stump, measure, k));
            }
        }
        Self::new(members, measure, k)
    }
}

pub fn ensemble_predict(ensemble: &Ensemble, x: &[f64]) -> Result<usize> {
    ensemble.predict(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based.
    pub round: usize,
    pub g: f64,
    /// 0 for a rejected round.
    pub alpha: f64,
    /// Weighted accuracy of this round's stump.
    pub weighted_acc: f64,
    /// Training accuracy of the ensemble after this round.
    pub train_acc: f64,
    pub test_acc: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    RoundLimit,
    /// `g ≤ ½ + δ`.
    Chance,
    /// `g ≥ 1 − δ`.
    Perfect,
    /// The measure was undefined and the policy was [`UndefinedPolicy::Stop`].
    Undefined,
}

/// One record per round run, including a final rejected round if the run
/// stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostTrace {
    pub rounds: Vec<RoundRecord>,
    pub stop: StopReason,
}

impl BoostTrace {
    /// Records whose stump joined the ensemble.
    pub fn accepted(&self) -> impl Iterator<Item = &RoundRecord> {
        self.rounds.iter().filter(|r| r.alpha > 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Json,
}

/// Columns `round,g,alpha,weighted_acc,train_acc,test_acc`. CSV leaves a
/// missing test accuracy empty; JSON writes `null`.
pub fn emit_trace(trace: &BoostTrace, format: TraceFormat) -> String {
    match format {
        TraceFormat::Csv => {
            let mut out = String::from("round,g,alpha,weighted_acc,train_acc,test_acc\n");
            for r in &trace.rounds {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.round,
                    g17(r.g),
                    g17(r.alpha),
                    g17(r.weighted_acc),
                    g17(r.train_acc),
                    r.test_acc.map(g17).unwrap_or_default()
                ));
            }
            out
        }
        TraceFormat::Json => serde_json::to_string_pretty(&trace.rounds).expect("records serialize") + "\n",
    }
}

pub fn parse_trace_json(text: &str) -> Result<Vec<RoundRecord>> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        row: e.line(),
        message: e.to_string(),
    })
}

/// Online view of a boosting run: one [`step`](Booster::step) per round.
pub struct Booster<'a> {
    train: &'a LabeledDataset,
    test: Option<&'a LabeledDataset>,
    config: BoostConfig,
    presorted: Presorted,
    weights: Vec<f64>,
    rng: ChaCha8Rng,
    members: Vec<Member>,
    first_stump: Option<Stump>,
    train_votes: Vec<f64>,
    test_votes: Vec<f64>,
    round: usize,
    stop: Option<StopReason>,
}

impl<'a> Booster<'a> {
    pub fn new(train: &'a LabeledDataset, config: &BoostConfig, test: Option<&'a LabeledDataset>) -> Result<Self> {
        config.validate()?;
        if train.is_empty() {
            return Err(Error::EmptyInput);
        }
        let present = train.class_counts().iter().filter(|&&c| c > 0).count();
        if present < 2 {
            return Err(Error::TooFewClasses(present));
        }
        if let Some(t) = test {
            if t.d() != train.d() || t.k() != train.k() {
                return Err(Error::DimensionMismatch {
                    expected: train.d(),
                    found: t.d(),
                });
            }
        }
        let n = train.n();
        let k = train.k();
        Ok(Self {
            train,
            test,
            config: *config,
            presorted: Presorted::new(train),
            weights: vec![1.0 / n as f64; n],
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            members: Vec::new(),
            first_stump: None,
            train_votes: vec![0.0; n * k],
            test_votes: vec![0.0; test.map_or(0, |t| t.n()) * k],
            round: 0,
            stop: None,
        })
    }

    /// Current instance weights; they sum to 1.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn stopped(&self) -> Option<StopReason> {
        self.stop
    }

    fn fit(&mut self) -> Result<Stump> {
        if !self.config.resample {
            return search(self.train, &self.weights, &self.presorted, self.config.criterion).map(|(s, _)| s);
        }
        let sampler = WeightedIndex::new(&self.weights).map_err(|_| Error::ZeroTotalWeight)?;
        let picks: Vec<usize> = (0..self.train.n()).map(|_| sampler.sample(&mut self.rng)).collect();
        let sample = self.train.subset(&picks);
        let uniform = vec![1.0; sample.n()];
        search(&sample, &uniform, &Presorted::new(&sample), self.config.criterion).map(|(s, _)| s)
    }

    fn accuracy_from_votes(&self, votes: &[f64], data: &LabeledDataset, first: &Stump) -> f64 {
        let k = self.train.k();
        let correct = if self.members.is_empty() {
            first.predict_all(data).iter().zip(data.y()).filter(|(p, y)| p == y).count()
        } else {
            votes
                .chunks(k)
                .zip(data.y())
                .filter(|(v, &y)| argmax(v) == y)
                .count()
        };
        correct as f64 / data.n() as f64
    }

    /// Runs one round. Returns `None` once the run has stopped.
    pub fn step(&mut self) -> Result<Option<RoundRecord>> {
        if self.stop.is_some() {
            return Ok(None);
        }
        if self.round == self.config.rounds {
            self.stop = Some(StopReason::RoundLimit);
            return Ok(None);
        }
        self.round += 1;
        let round = self.round;
        let stump = self.fit()?;
        let first = *self.first_stump.get_or_insert(stump);
        let predictions = stump.predict_all(self.train);
        let y = self.train.y();
        let table = ContingencyTable::from_weighted(y, &predictions, &self.weights, self.train.k())?;
        let weighted_acc = table.accuracy();

        let g = match self.config.measure.goodness(&table) {
            Ok(g) => g,
            Err(source) => match self.config.on_undefined {
                UndefinedPolicy::Abort => {
                    self.stop = Some(StopReason::Undefined);
                    return Err(Error::UndefinedMeasure {
                        measure: self.config.measure.name().to_string(),
                        round,
                        source: Box::new(source),
                    });
                }
                UndefinedPolicy::Stop => {
                    self.stop = Some(StopReason::Undefined);
                    return Ok(Some(self.record(round, f64::NAN, 0.0, weighted_acc, &first)));
                }
            },
        };
        let delta = self.config.delta;
        let verdict = if g <= 0.5 + delta {
            Some(StopReason::Chance)
        } else if g >= 1.0 - delta {
            Some(StopReason::Perfect)
        } else {
            None
        };
        if let Some(reason) = verdict {
            self.stop = Some(reason);
            return Ok(Some(self.record(round, g, 0.0, weighted_acc, &first)));
        }

        let alpha = (g / (1.0 - g)).ln();
        let odds = g / (1.0 - g);
        for ((w, &p), &c) in self.weights.iter_mut().zip(&predictions).zip(y) {
            if p != c {
                *w *= odds;
            }
        }
        let total: f64 = self.weights.iter().sum();
        self.weights.iter_mut().for_each(|w| *w /= total);
        check_weights(&self.weights, self.train.n())?;

        let k = self.train.k();
        for (i, &p) in predictions.iter().enumerate() {
            self.train_votes[i * k + p] += alpha;
        }
        if let Some(test) = self.test {
            for (i, p) in stump.predict_all(test).into_iter().enumerate() {
                self.test_votes[i * k + p] += alpha;
            }
        }
        self.members.push(Member { stump, alpha });
        Ok(Some(self.record(round, g, alpha, weighted_acc, &first)))
    }

    fn record(&self, round: usize, g: f64, alpha: f64, weighted_acc: f64, first: &Stump) -> RoundRecord {
        RoundRecord {
            round,
            g,
            alpha,
            weighted_acc,
            train_acc: self.accuracy_from_votes(&self.train_votes, self.train, first),
            test_acc: self
                .test
                .map(|t| self.accuracy_from_votes(&self.test_votes, t, first)),
        }
    }

    /// The ensemble built so far. Before any round has run it is empty and
    /// this fails.
    pub fn ensemble(&self) -> Result<Ensemble> {
        if self.members.is_empty() {
            return match self.first_stump {
                Some(s) => Ok(Ensemble::single(s, self.config.measure, self.train.k())),
                None => Err(Error::EmptyEnsemble),
            };
        }
        Ensemble::new(self.members.clone(), self.config.measure, self.train.k())
    }
}

/// Runs boosting to completion.
pub fn boost_train(
    train: &LabeledDataset,
    config: &BoostConfig,
    test: Option<&LabeledDataset>,
) -> Result<(Ensemble, BoostTrace)> {
    let mut booster = Booster::new(train, config, test)?;
    let mut rounds = Vec::new();
    while let Some(record) = booster.step()? {
        rounds.push(record);
    }
    let stop = booster.stopped().unwrap_or(StopReason::RoundLimit);
    Ok((booster.ensemble()?, BoostTrace { rounds, stop }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn noisy_line() -> LabeledDataset {
        let x = array![[0.0], [1.0], [2.0], [3.0], [4.0], [5.0], [6.0], [7.0]];
        LabeledDataset::new(x, vec![0, 0, 1, 0, 1, 1, 0, 1], LabeledDataset::numbered_classes(2)).unwrap()
    }

    #[test]
    fn alpha_is_log_odds() {
        // four points, the best stump gets three right: g = 0.75
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let ds = LabeledDataset::new(x, vec![0, 1, 0, 1], LabeledDataset::numbered_classes(2)).unwrap();
        let (_, trace) = boost_train(&ds, &BoostConfig::new(Measure::Accuracy).rounds(1), None).unwrap();
        assert_eq!(trace.rounds[0].g, 0.75);
        assert!((trace.rounds[0].alpha - 3.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn chance_round_is_rejected() {
        let x = array![[0.0], [0.0], [1.0], [1.0]];
        let ds = LabeledDataset::new(x, vec![0, 1, 0, 1], LabeledDataset::numbered_classes(2)).unwrap();
        let (ens, trace) = boost_train(&ds, &BoostConfig::new(Measure::Accuracy), None).unwrap();
        assert_eq!(trace.rounds.len(), 1);
        assert_eq!(trace.rounds[0].g, 0.5);
        assert_eq!(trace.stop, StopReason::Chance);
        assert!(ens.members().is_empty());
        assert!(ens.fallback().is_some());
    }

    #[test]
    fn weights_stay_normalized() {
        let ds = noisy_line();
        let config = BoostConfig::new(Measure::Informedness).rounds(20);
        let mut b = Booster::new(&ds, &config, None).unwrap();
        while let Some(r) = b.step().unwrap() {
            let sum: f64 = b.weights().iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            if r.alpha > 0.0 {
                assert!((r.alpha - (r.g / (1.0 - r.g)).ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn voting() {
        let s = |c| Stump {
            feature: 0,
            threshold: f64::INFINITY,
            below_class: c,
            above_class: c,
        };
        let ens = Ensemble::new(
            vec![
                Member { stump: s(1), alpha: 3.0_f64.ln() },
                Member { stump: s(0), alpha: 2.0_f64.ln() },
            ],
            Measure::Accuracy,
            2,
        )
        .unwrap();
        assert_eq!(ens.predict(&[0.0]).unwrap(), 1);
        assert!(Ensemble::new(vec![], Measure::Accuracy, 2).is_err());
    }

    #[test]
    fn undefined_measure_policies() {
        // three classes: a two-leaf stump never predicts one of them, so
        // markedness has a zero-bias class
        let x = array![[0.0], [1.0], [2.0], [3.0], [4.0], [5.0]];
        let ds = LabeledDataset::new(x, vec![0, 0, 1, 1, 2, 2], LabeledDataset::numbered_classes(3)).unwrap();
        let abort = boost_train(&ds, &BoostConfig::new(Measure::Markedness), None).unwrap_err();
        assert!(matches!(abort, Error::UndefinedMeasure { round: 1, .. }), "{abort:?}");
        let config = BoostConfig::new(Measure::Markedness).on_undefined(UndefinedPolicy::Stop);
        let (ens, trace) = boost_train(&ds, &config, None).unwrap();
        assert_eq!(trace.stop, StopReason::Undefined);
        assert!(ens.fallback().is_some());
    }

    #[test]
    fn serialization_round_trip() {
        let ds = noisy_line();
        let (ens, _) = boost_train(&ds, &BoostConfig::new(Measure::Kappa).rounds(5), None).unwrap();
        let mut buf = Vec::new();
        ens.write_to(&mut buf).unwrap();
        assert_eq!(Ensemble::read_from(buf.as_slice()).unwrap(), ens);

        let fallback = Ensemble::single(
            Stump {
                feature: 0,
                threshold: f64::NEG_INFINITY,
                below_class: 0,
                above_class: 1,
            },
            Measure::Accuracy,
            2,
        );
        let mut buf = Vec::new();
        fallback.write_to(&mut buf).unwrap();
        assert_eq!(String::from_utf8_lossy(&buf), "accuracy,2,1\n0,-inf,0,1,0\n");
        assert_eq!(Ensemble::read_from(buf.as_slice()).unwrap(), fallback);
    }

    #[test]
    fn trace_formats() {
        let ds = noisy_line();
        let (_, trace) = boost_train(&ds, &BoostConfig::new(Measure::Informedness).rounds(3), Some(&ds)).unwrap();
        let csv = emit_trace(&trace, TraceFormat::Csv);
        assert_eq!(csv.lines().count(), trace.rounds.len() + 1);
        let back = parse_trace_json(&emit_trace(&trace, TraceFormat::Json)).unwrap();
        assert_eq!(back, trace.rounds);
    }

    #[test]
    fn resampling_is_seeded() {
        let ds = noisy_line();
        let config = BoostConfig::new(Measure::Informedness).rounds(5).resample(true).seed(4);
        assert_eq!(boost_train(&ds, &config, None).unwrap(), boost_train(&ds, &config, None).unwrap());
    }
}
