//! Weighted multiclass contingency tables and their one-vs-rest reductions.
//!
//! A [`ContingencyTable`] is always stored as `counts[[predicted, real]]`:
//! rows are predictions, columns are real classes. Row sums are the
//! *bias* of each class and column sums its *prevalence*. Every operation in
//! this crate relies on that orientation, so construct tables through the
//! provided constructors rather than by hand.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Relative tolerance used when validating that cell sums match the total.
const SUM_TOLERANCE: f64 = 1e-9;

/// K×K weighted prediction-vs-real matrix, indexed `[predicted][real]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    counts: Array2<f64>,
    total: f64,
}

impl ContingencyTable {
    /// Builds a table from an explicit `[predicted][real]` matrix.
    pub fn from_counts(counts: Array2<f64>) -> Result<Self> {
        let (rows, cols) = counts.dim();
        if rows != cols {
            return Err(Error::LengthMismatch {
                expected: rows,
                found: cols,
            });
        }
        if rows < 2 {
            return Err(Error::TooFewClasses(rows));
        }
        for (index, &value) in counts.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidWeight { index, value });
            }
        }
        let total = counts.sum();
        if total <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        Ok(Self { counts, total })
    }

    /// Counts instances: `cell[p][r]` is the number of instances with
    /// prediction `p` and gold label `r`.
    pub fn from_labels(gold: &[usize], pred: &[usize], k: usize) -> Result<Self> {
        let weights = vec![1.0; gold.len()];
        Self::from_weighted(gold, pred, &weights, k)
    }

    /// Like [`from_labels`](Self::from_labels) but each instance contributes
    /// its weight instead of 1.
    pub fn from_weighted(gold: &[usize], pred: &[usize], weights: &[f64], k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::TooFewClasses(k));
        }
        if gold.is_empty() {
            return Err(Error::EmptyInput);
        }
        if pred.len() != gold.len() {
            return Err(Error::LengthMismatch {
                expected: gold.len(),
                found: pred.len(),
            });
        }
        if weights.len() != gold.len() {
            return Err(Error::LengthMismatch {
                expected: gold.len(),
                found: weights.len(),
            });
        }
        let mut counts = Array2::zeros((k, k));
        for (index, ((&g, &p), &w)) in gold.iter().zip(pred).zip(weights).enumerate() {
            if g >= k {
                return Err(Error::ClassOutOfRange { index: g, k });
            }
            if p >= k {
                return Err(Error::ClassOutOfRange { index: p, k });
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidWeight { index, value: w });
            }
            counts[[p, g]] += w;
        }
        let total = counts.sum();
        if total <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        Ok(Self { counts, total })
    }

    /// The independence table `n · bias ⊗ prevalence`, i.e. what a predictor
    /// guessing with the given bias against the given prevalence produces in
    /// expectation.
    pub fn independent(bias: &[f64], prevalence: &[f64], n: f64) -> Result<Self> {
        if bias.len() != prevalence.len() {
            return Err(Error::LengthMismatch {
                expected: bias.len(),
                found: prevalence.len(),
            });
        }
        let k = bias.len();
        let counts = Array2::from_shape_fn((k, k), |(p, r)| n * bias[p] * prevalence[r]);
        Self::from_counts(counts)
    }

    pub fn k(&self) -> usize {
        self.counts.nrows()
    }

    /// Total weight.
    pub fn n(&self) -> f64 {
        self.total
    }

    pub fn counts(&self) -> &Array2<f64> {
        &self.counts
    }

    pub fn cell(&self, predicted: usize, real: usize) -> f64 {
        self.counts[[predicted, real]]
    }

    /// Joint probabilities `c_pr = cell / n`.
    pub fn probabilities(&self) -> Array2<f64> {
        &self.counts / self.total
    }

    /// Total weight predicted as `class`.
    ///
    /// Marginals are summed in index order so that `t.row_sum(c)` and
    /// `t.transpose().col_sum(c)` are bit-identical.
    pub fn row_sum(&self, class: usize) -> f64 {
        self.counts.row(class).iter().fold(0.0, |acc, &c| acc + c)
    }

    /// Total weight whose real class is `class`.
    pub fn col_sum(&self, class: usize) -> f64 {
        self.counts.column(class).iter().fold(0.0, |acc, &c| acc + c)
    }

    /// Per-class predicted proportion (row sums over n).
    pub fn bias(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.k(), |p| self.row_sum(p) / self.total)
    }

    /// Per-class real proportion (column sums over n).
    pub fn prevalence(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.k(), |r| self.col_sum(r) / self.total)
    }

    pub fn trace(&self) -> f64 {
        self.counts.diag().sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.trace() / self.total
    }

    /// Swaps the roles of prediction and reality.
    pub fn transpose(&self) -> Self {
        Self {
            counts: self.counts.t().to_owned(),
            total: self.total,
        }
    }

    /// Returns the probability table with `epsilon` added to every cell and
    /// renormalized to sum to 1. Keeps every marginal strictly inside (0, 1).
    pub fn smoothed(&self, epsilon: f64) -> Self {
        let mut counts = self.probabilities();
        counts.mapv_inplace(|c| c + epsilon);
        let total = counts.sum();
        counts /= total;
        Self { counts, total: 1.0 }
    }

    /// Checks the stored invariants. Tables built through the constructors
    /// always pass; exposed for property tests.
    pub fn check_invariants(&self) -> bool {
        let sum = self.counts.sum();
        self.k() >= 2
            && self.counts.iter().all(|&c| c >= 0.0)
            && (sum - self.total).abs() <= SUM_TOLERANCE * self.total.max(1.0)
    }

    /// One-vs-rest reduction of `class` against every other class.
    pub fn dichotomize(&self, class: usize) -> Result<DichotomousCounts> {
        let k = self.k();
        if class >= k {
            return Err(Error::ClassOutOfRange { index: class, k });
        }
        let tp = self.counts[[class, class]];
        let fp = (self.row_sum(class) - tp).max(0.0);
        let fn_ = (self.col_sum(class) - tp).max(0.0);
        // fp + fn_ is grouped so that transposing the table (which swaps fp
        // and fn) reproduces tn exactly.
        let tn = (self.total - tp - (fp + fn_)).max(0.0);
        Ok(DichotomousCounts::new(tp, fp, fn_, tn))
    }
}

/// The four cells of a dichotomous table: predicted (+P/−P) against real
/// (+R/−R).
///
/// ```text
///        +R   -R
///   +P   tp   fp   pp
///   -P   fn   tn   pn
///        rp   rn   1
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DichotomousCounts {
    pub tp: f64,
    pub fp: f64,
    pub fn_: f64,
    pub tn: f64,
}

impl DichotomousCounts {
    pub fn new(tp: f64, fp: f64, fn_: f64, tn: f64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    /// Validating constructor.
    pub fn try_new(tp: f64, fp: f64, fn_: f64, tn: f64) -> Result<Self> {
        for (index, value) in [tp, fp, fn_, tn].into_iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidWeight { index, value });
            }
        }
        if tp + fp + fn_ + tn <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        Ok(Self::new(tp, fp, fn_, tn))
    }

    pub fn total(&self) -> f64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// As a 2×2 table with the positive class at index 0.
    pub fn to_table(&self) -> Result<ContingencyTable> {
        ContingencyTable::from_counts(ndarray::array![[self.tp, self.fp], [self.fn_, self.tn]])
    }

    pub fn rates(&self) -> RateSet {
        rates(self)
    }
}

/// Probabilities derived from a [`DichotomousCounts`].
///
/// Marginals and accuracy are always defined. Conditional rates are `None`
/// when their denominator is zero: `tpr`/`fnr` need `rp > 0`, `tnr`/`fpr`
/// need `rn > 0`, `prec` needs `pp > 0` and `iprec` needs `pn > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet {
    /// Prevalence.
    pub rp: f64,
    /// Inverse prevalence.
    pub rn: f64,
    /// Bias.
    pub pp: f64,
    /// Inverse bias.
    pub pn: f64,
    /// Recall, sensitivity.
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    /// Specificity, inverse recall.
    pub tnr: Option<f64>,
    pub fnr: Option<f64>,
    /// Precision.
    pub prec: Option<f64>,
    /// Inverse precision.
    pub iprec: Option<f64>,
    pub acc: f64,
}

/// Which rate families a [`RateSet`] could not define.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UndefinedRates {
    /// `rp = 0`: tpr and fnr missing.
    pub positive_recall: bool,
    /// `rn = 0`: tnr and fpr missing.
    pub negative_recall: bool,
    /// `pp = 0`: precision missing.
    pub positive_precision: bool,
    /// `pn = 0`: inverse precision missing.
    pub negative_precision: bool,
}

impl UndefinedRates {
    pub fn any(&self) -> bool {
        self.positive_recall || self.negative_recall || self.positive_precision || self.negative_precision
    }
}

impl RateSet {
    pub fn err(&self) -> f64 {
        1.0 - self.acc
    }

    pub fn undefined(&self) -> UndefinedRates {
        UndefinedRates {
            positive_recall: self.tpr.is_none(),
            negative_recall: self.tnr.is_none(),
            positive_precision: self.prec.is_none(),
            negative_precision: self.iprec.is_none(),
        }
    }
}

fn ratio(numerator: f64, denominator: f64) -> Option<f64> {
    (denominator > 0.0).then(|| numerator / denominator)
}

/// Derives every rate of the dichotomous table. The counts need not be
/// normalized.
pub fn rates(d: &DichotomousCounts) -> RateSet {
    let n = d.total();
    let (tp, fp, fn_, tn) = (d.tp / n, d.fp / n, d.fn_ / n, d.tn / n);
    let rp = tp + fn_;
    let pp = tp + fp;
    // Derive the complements from the raw cells so rp + rn == 1 holds to
    // rounding rather than drifting via 1 - rp.
    let rn = fp + tn;
    let pn = fn_ + tn;
    RateSet {
        rp,
        rn,
        pp,
        pn,
        tpr: ratio(tp, rp),
        fnr: ratio(fn_, rp),
        tnr: ratio(tn, rn),
        fpr: ratio(fp, rn),
        prec: ratio(tp, pp),
        iprec: ratio(tn, pn),
        acc: tp + tn,
    }
}
