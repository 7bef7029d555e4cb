//! Chance-corrected measures over contingency tables.
//!
//! The dichotomous pair is ΔP′ (informedness, recall-like, normalized by
//! prevalence) and ΔP (markedness, precision-like, normalized by bias). The
//! multiclass forms weight the one-vs-rest values by bias and prevalence
//! respectively. Correlation is their geometric mean, and Cohen's kappa
//! corrects accuracy by the expected chance accuracy `Σ bias·prev`.
//!
//! Degenerate marginals (a prevalence or bias of 0 or 1) make the
//! corresponding measure undefined and produce [`Error::Degenerate`]. Callers
//! that always need a number can evaluate a [`ContingencyTable::smoothed`]
//! table instead; [`MetricReport::new`] accepts the smoothing epsilon
//! directly.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::contingency::{ContingencyTable, DichotomousCounts};
use crate::error::{Error, Marginal, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.5772156649015329;

/// Default epsilon for the optional cell smoothing mode.
pub const DEFAULT_SMOOTHING: f64 = 1e-9;

/// Slack allowed when mapping a measure through [`gini`]; values within it
/// of ±1 are clamped.
const RANGE_SLACK: f64 = 1e-9;

fn degenerate(class: usize, marginal: Marginal, value: f64) -> Error {
    Error::Degenerate {
        class,
        marginal,
        value,
    }
}

/// ΔP′ = tpr − fpr = sensitivity + specificity − 1.
///
/// Fails with a prevalence [`Error::Degenerate`] (class 0 denoting the
/// positive class) when either real class is empty.
pub fn delta_p_prime(d: &DichotomousCounts) -> Result<f64> {
    let rp = d.tp + d.fn_;
    let rn = d.fp + d.tn;
    if rp <= 0.0 || rn <= 0.0 {
        return Err(degenerate(0, Marginal::Prevalence, rp / d.total()));
    }
    Ok(d.tp / rp - d.fp / rn)
}

/// ΔP = precision + inverse precision − 1.
pub fn delta_p(d: &DichotomousCounts) -> Result<f64> {
    let pp = d.tp + d.fp;
    let pn = d.fn_ + d.tn;
    if pp <= 0.0 || pn <= 0.0 {
        return Err(degenerate(0, Marginal::Bias, pp / d.total()));
    }
    Ok(d.tp / pp - d.fn_ / pn)
}

fn check_interior(values: &[f64], marginal: Marginal) -> Result<()> {
    for (class, &v) in values.iter().enumerate() {
        if v <= 0.0 || v >= 1.0 {
            return Err(degenerate(class, marginal, v));
        }
    }
    Ok(())
}

/// Multiclass informedness, `Σ_k bias_k · ΔP′_k`.
///
/// Requires every prevalence strictly inside (0, 1). Classes that are never
/// predicted contribute nothing.
pub fn informedness(t: &ContingencyTable) -> Result<f64> {
    let n = t.n();
    let prevalence: Vec<f64> = (0..t.k()).map(|c| t.col_sum(c) / n).collect();
    check_interior(&prevalence, Marginal::Prevalence)?;
    let mut total = 0.0;
    for class in 0..t.k() {
        let bias = t.row_sum(class) / n;
        if bias > 0.0 {
            total += bias * delta_p_prime(&t.dichotomize(class)?)?;
        }
    }
    Ok(total)
}

/// Multiclass markedness, `Σ_k prev_k · ΔP_k`.
///
/// Requires every bias strictly inside (0, 1).
pub fn markedness(t: &ContingencyTable) -> Result<f64> {
    let n = t.n();
    let bias: Vec<f64> = (0..t.k()).map(|c| t.row_sum(c) / n).collect();
    check_interior(&bias, Marginal::Bias)?;
    let mut total = 0.0;
    for class in 0..t.k() {
        let prevalence = t.col_sum(class) / n;
        if prevalence > 0.0 {
            total += prevalence * delta_p(&t.dichotomize(class)?)?;
        }
    }
    Ok(total)
}

/// Bookmaker payoffs: `g[p][r] = 1 / (prev[p] − [p ≠ r])`.
///
/// Betting on horse `p` pays `1/prev[p]` when it wins and costs
/// `1/(1 − prev[p])` when it loses, so blind betting has zero expected gain.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    gains: Array2<f64>,
    prevalences: Vec<f64>,
}

impl GainMatrix {
    pub fn gains(&self) -> &Array2<f64> {
        &self.gains
    }

    pub fn gain(&self, predicted: usize, real: usize) -> f64 {
        self.gains[[predicted, real]]
    }

    pub fn prevalences(&self) -> &[f64] {
        &self.prevalences
    }

    /// Expected gain of the bet on `predicted` given the joint probabilities
    /// of its row, `Σ_r c_pr · g_pr`.
    pub fn row_gain(&self, predicted: usize, joint_row: impl IntoIterator<Item = f64>) -> f64 {
        joint_row
            .into_iter()
            .enumerate()
            .fold(0.0, |acc, (r, c)| acc + c * self.gains[[predicted, r]])
    }
}

pub fn gain_matrix(prevalences: &[f64]) -> Result<GainMatrix> {
    if prevalences.len() < 2 {
        return Err(Error::TooFewClasses(prevalences.len()));
    }
    check_interior(prevalences, Marginal::Prevalence)?;
    let sum: f64 = prevalences.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::OutOfRange {
            name: "prevalence sum",
            value: sum,
        });
    }
    let k = prevalences.len();
    let gains = Array2::from_shape_fn((k, k), |(p, r)| {
        let miss = if p != r { 1.0 } else { 0.0 };
        1.0 / (prevalences[p] - miss)
    });
    Ok(GainMatrix {
        gains,
        prevalences: prevalences.to_vec(),
    })
}

/// Informedness as the bias-weighted expected bookmaker gain,
/// `Σ_p bias_p [Σ_r c_pr G_pr]`, with the gain matrix built from the
/// table's own real-class marginals.
///
/// Agrees with [`informedness`] to rounding; the two share no code beyond
/// the marginals.
pub fn informedness_bookmaker(t: &ContingencyTable) -> Result<f64> {
    let prevalence = t.prevalence().to_vec();
    let gains = gain_matrix(&prevalence)?;
    let joint = t.probabilities();
    let bias = t.bias();
    Ok((0..t.k())
        .map(|p| bias[p] * gains.row_gain(p, joint.row(p).iter().copied()))
        .sum())
}

/// Cohen's kappa, `(Acc − E(Acc)) / (1 − E(Acc))` with
/// `E(Acc) = Σ_k bias_k · prev_k`.
pub fn kappa_cohen(t: &ContingencyTable) -> Result<f64> {
    let bias = t.bias();
    let prevalence = t.prevalence();
    let expected: f64 = bias.iter().zip(prevalence.iter()).map(|(b, p)| b * p).sum();
    let room = 1.0 - expected;
    if room <= f64::EPSILON {
        return Err(Error::ChanceAccuracyIsOne);
    }
    Ok((t.accuracy() - expected) / room)
}

/// Geometric mean of informedness and markedness, carrying their common
/// sign. For a 2×2 table this is the Matthews correlation coefficient.
pub fn matthews_correlation(t: &ContingencyTable) -> Result<f64> {
    correlation_from(informedness(t)?, markedness(t)?)
}

fn correlation_from(informedness: f64, markedness: f64) -> Result<f64> {
    let product = informedness * markedness;
    if product < 0.0 {
        return Err(Error::MixedSign {
            informedness,
            markedness,
        });
    }
    let magnitude = product.sqrt();
    if informedness < 0.0 || markedness < 0.0 {
        Ok(-magnitude)
    } else {
        Ok(magnitude)
    }
}

/// Maps a chance-corrected value from [−1, 1] onto the accuracy scale
/// [0, 1], sending chance (0) to ½.
pub fn gini(value: f64) -> Result<f64> {
    if !(-1.0 - RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&value) {
        return Err(Error::OutOfRange {
            name: "chance-corrected measure",
            value,
        });
    }
    Ok((value.clamp(-1.0, 1.0) + 1.0) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicEstimate {
    /// `Σ_{i=1..p} 1/i`.
    pub harmonic: f64,
    /// `ln p + γ`.
    pub approx: f64,
}

impl HarmonicEstimate {
    pub fn error(&self) -> f64 {
        self.harmonic - self.approx
    }
}

/// The harmonic number of `p` next to its logarithmic approximation.
pub fn harmonic_information(p: u64) -> Result<HarmonicEstimate> {
    if p < 1 {
        return Err(Error::OutOfRange {
            name: "p",
            value: p as f64,
        });
    }
    // smallest terms first
    let harmonic = (1..=p).rev().fold(0.0, |acc, i| acc + 1.0 / i as f64);
    Ok(HarmonicEstimate {
        harmonic,
        approx: (p as f64).ln() + EULER_GAMMA,
    })
}

/// A goodness measure over a (possibly weighted) contingency table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Accuracy,
    Kappa,
    Informedness,
    Markedness,
    Correlation,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::Accuracy,
        Measure::Kappa,
        Measure::Informedness,
        Measure::Markedness,
        Measure::Correlation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Accuracy => "accuracy",
            Measure::Kappa => "kappa",
            Measure::Informedness => "informedness",
            Measure::Markedness => "markedness",
            Measure::Correlation => "correlation",
        }
    }

    /// Raw value: accuracy in [0, 1], everything else in [−1, 1].
    pub fn evaluate(self, t: &ContingencyTable) -> Result<f64> {
        match self {
            Measure::Accuracy => Ok(t.accuracy()),
            Measure::Kappa => kappa_cohen(t),
            Measure::Informedness => informedness(t),
            Measure::Markedness => markedness(t),
            Measure::Correlation => matthews_correlation(t),
        }
    }

    /// Value on the accuracy scale: accuracy itself, or the gini map of a
    /// chance-corrected measure.
    pub fn goodness(self, t: &ContingencyTable) -> Result<f64> {
        let value = self.evaluate(t)?;
        match self {
            Measure::Accuracy => Ok(value),
            _ => gini(value),
        }
    }

    pub fn is_chance_corrected(self) -> bool {
        self != Measure::Accuracy
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown measure {s:?}")))
    }
}

/// One-vs-rest statistics of a single class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub class: usize,
    pub prevalence: f64,
    pub bias: f64,
    pub delta_p: Option<f64>,
    pub delta_p_prime: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

/// Every measure of a table, each either a value or the reason it is
/// undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub n: f64,
    pub k: usize,
    pub accuracy: f64,
    pub informedness: Result<f64>,
    pub markedness: Result<f64>,
    pub kappa: Result<f64>,
    pub correlation: Result<f64>,
    pub per_class: Vec<ClassMetrics>,
}

impl MetricReport {
    /// Evaluates `t`, or `t.smoothed(eps)` when `smoothing` is given.
    pub fn new(t: &ContingencyTable, smoothing: Option<f64>) -> Self {
        let smoothed;
        let t = match smoothing {
            Some(eps) => {
                smoothed = t.smoothed(eps);
                &smoothed
            }
            None => t,
        };
        let informedness = informedness(t);
        let markedness = markedness(t);
        let correlation = match (&informedness, &markedness) {
            (Ok(i), Ok(m)) => correlation_from(*i, *m),
            (Err(e), _) | (_, Err(e)) => Err(e.clone()),
        };
        let bias = t.bias();
        let prevalence = t.prevalence();
        let per_class = (0..t.k())
            .map(|class| {
                let d = t.dichotomize(class).expect("class index in range");
                let rates = d.rates();
                ClassMetrics {
                    class,
                    prevalence: prevalence[class],
                    bias: bias[class],
                    delta_p: delta_p(&d).ok(),
                    delta_p_prime: delta_p_prime(&d).ok(),
                    precision: rates.prec,
                    recall: rates.tpr,
                }
            })
            .collect();
        Self {
            n: t.n(),
            k: t.k(),
            accuracy: t.accuracy(),
            informedness,
            markedness,
            kappa: kappa_cohen(t),
            correlation,
            per_class,
        }
    }

    /// True when every measure is defined.
    pub fn is_complete(&self) -> bool {
        self.informedness.is_ok() && self.markedness.is_ok() && self.kappa.is_ok() && self.correlation.is_ok()
    }
}
