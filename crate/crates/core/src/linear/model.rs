use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::fmt::{g17, parse_field, read_matrix};

/// Weight update rule of a [`LinearModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Always update: `Δw_jk = λ x_j y_k`.
    Hebb,
    /// Hebbian update only on output units that were wrong.
    Perceptron,
    /// Hebbian update whenever `y·score < γ`.
    Margin,
    /// Hebbian update scaled by the hinge ramp `1 − y·clip(score)`.
    SoftMargin,
    /// Multiplicative: promote active weights by α on false negatives, zero
    /// them on false positives.
    Winnow,
    /// Multiplicative: promote by α, demote by 1/α.
    Winnow2,
}

impl Rule {
    pub const ALL: [Rule; 6] = [
        Rule::Hebb,
        Rule::Perceptron,
        Rule::Margin,
        Rule::SoftMargin,
        Rule::Winnow,
        Rule::Winnow2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Hebb => "hebb",
            Rule::Perceptron => "perceptron",
            Rule::Margin => "margin",
            Rule::SoftMargin => "soft_margin",
            Rule::Winnow => "winnow",
            Rule::Winnow2 => "winnow2",
        }
    }

    pub fn is_multiplicative(self) -> bool {
        matches!(self, Rule::Winnow | Rule::Winnow2)
    }

    /// ±1 for the perceptron family, 0/1 for Hebb and Winnow.
    pub fn default_coding(self) -> TargetCoding {
        match self {
            Rule::Perceptron | Rule::Margin | Rule::SoftMargin => TargetCoding::Bipolar,
            Rule::Hebb | Rule::Winnow | Rule::Winnow2 => TargetCoding::Binary,
        }
    }

    /// Multiplicative rules start from 1, additive rules from 0.
    pub fn initial_weight(self) -> f64 {
        if self.is_multiplicative() {
            1.0
        } else {
            0.0
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "softmargin" | "soft-margin" => Ok(Rule::SoftMargin),
            other => Rule::ALL
                .into_iter()
                .find(|r| r.name() == other)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown rule {s:?}"))),
        }
    }
}

/// How boolean targets and outputs are represented numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetCoding {
    /// true = 1, false = 0
    Binary,
    /// true = +1, false = −1
    Bipolar,
}

impl TargetCoding {
    pub fn encode(self, value: bool) -> f64 {
        match (self, value) {
            (_, true) => 1.0,
            (TargetCoding::Binary, false) => 0.0,
            (TargetCoding::Bipolar, false) => -1.0,
        }
    }
}

/// Index of the largest score; the lowest index wins ties.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Linear threshold units over identity features.
///
/// `weights` has one row per input (plus a trailing bias row when the
/// constant-1 bias input is enabled) and one column per output unit. A
/// model has either one unit per class, predicting by argmax, or for two
/// classes a single detector unit predicting class 1 when its score exceeds
/// the threshold.
///
/// The firing threshold is 0 for additive rules and the number of inputs
/// for Winnow, the usual choice for mistake-bounded learning of
/// disjunctions.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Array2<f64>,
    classes: usize,
    rule: Rule,
    lr: f64,
    margin: f64,
    promotion: f64,
    bias_feature: bool,
    coding: TargetCoding,
}

/// Hyper-parameters of a [`LinearModel`], shared with the trainer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearParams {
    /// λ. Scales additive updates; 0 freezes every rule, multiplicative
    /// ones included.
    pub lr: f64,
    /// γ
    pub margin: f64,
    /// α
    pub promotion: f64,
    pub bias_feature: bool,
    pub coding: TargetCoding,
}

impl LinearParams {
    pub fn for_rule(rule: Rule) -> Self {
        Self {
            lr: 1.0,
            margin: 1.0,
            promotion: 2.0,
            bias_feature: matches!(rule, Rule::Perceptron | Rule::Margin | Rule::SoftMargin),
            coding: rule.default_coding(),
        }
    }

    pub fn validate(&self, rule: Rule) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lr) {
            return Err(Error::InvalidConfig(format!("learning rate {} outside [0, 1]", self.lr)));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(Error::InvalidConfig(format!("margin {} must be >= 0", self.margin)));
        }
        if !(self.promotion > 1.0 && self.promotion.is_finite()) {
            return Err(Error::InvalidConfig(format!("promotion {} must be > 1", self.promotion)));
        }
        match (rule, self.coding) {
            (Rule::Margin | Rule::SoftMargin, TargetCoding::Binary) => {
                Err(Error::InvalidConfig(format!("{rule} requires ±1 target coding")))
            }
            (Rule::Winnow | Rule::Winnow2, TargetCoding::Bipolar) => {
                Err(Error::InvalidConfig(format!("{rule} requires 0/1 target coding")))
            }
            _ => Ok(()),
        }
    }
}

impl LinearModel {
    /// A fresh model with `inputs` features and `classes` classes. Winnow
    /// rules on two classes get a single detector unit.
    pub fn new(rule: Rule, inputs: usize, classes: usize, params: LinearParams) -> Result<Self> {
        let units = if classes == 2 && rule.is_multiplicative() { 1 } else { classes };
        Self::with_units(rule, inputs, classes, units, params)
    }

    /// Like [`new`](Self::new) with an explicit number of output units
    /// (`classes`, or 1 for a two-class detector).
    pub fn with_units(rule: Rule, inputs: usize, classes: usize, units: usize, params: LinearParams) -> Result<Self> {
        if classes < 2 {
            return Err(Error::TooFewClasses(classes));
        }
        if !(units == classes || (units == 1 && classes == 2)) {
            return Err(Error::InvalidConfig(format!("{units} output units for {classes} classes")));
        }
        params.validate(rule)?;
        let rows = inputs + usize::from(params.bias_feature);
        Ok(Self {
            weights: Array2::from_elem((rows, units), rule.initial_weight()),
            classes,
            rule,
            lr: params.lr,
            margin: params.margin,
            promotion: params.promotion,
            bias_feature: params.bias_feature,
            coding: params.coding,
        })
    }

    /// A model with explicit weights (`inputs [+ bias] × units`).
    pub fn from_weights(rule: Rule, weights: Array2<f64>, classes: usize, params: LinearParams) -> Result<Self> {
        let mut model = Self::with_units(
            rule,
            weights.nrows().saturating_sub(usize::from(params.bias_feature)),
            classes,
            weights.ncols(),
            params,
        )?;
        if weights.nrows() < usize::from(params.bias_feature) + 1 {
            return Err(Error::InvalidConfig("weight matrix has no input rows".into()));
        }
        model.weights = weights;
        Ok(model)
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn units(&self) -> usize {
        self.weights.ncols()
    }

    /// Number of real inputs, excluding the bias input.
    pub fn inputs(&self) -> usize {
        self.weights.nrows() - usize::from(self.bias_feature)
    }

    pub fn params(&self) -> LinearParams {
        LinearParams {
            lr: self.lr,
            margin: self.margin,
            promotion: self.promotion,
            bias_feature: self.bias_feature,
            coding: self.coding,
        }
    }

    pub fn coding(&self) -> TargetCoding {
        self.coding
    }

    pub fn threshold(&self) -> f64 {
        if self.rule.is_multiplicative() {
            self.inputs() as f64
        } else {
            0.0
        }
    }

    fn expand(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.inputs() {
            return Err(Error::DimensionMismatch {
                expected: self.inputs(),
                found: x.len(),
            });
        }
        let mut full = x.to_vec();
        if self.bias_feature {
            full.push(1.0);
        }
        Ok(full)
    }

    fn check_units(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.units() {
            return Err(Error::DimensionMismatch {
                expected: self.units(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Raw per-unit scores `Σ_j x_j w_jk`, no threshold applied.
    pub fn activate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x = self.expand(x)?;
        Ok(self.scores_of(&x))
    }

    fn scores_of(&self, full: &[f64]) -> Vec<f64> {
        let mut scores = vec![0.0; self.units()];
        for (row, &xj) in self.weights.outer_iter().zip(full) {
            if xj != 0.0 {
                for (s, &w) in scores.iter_mut().zip(row) {
                    *s += xj * w;
                }
            }
        }
        scores
    }

    /// Class for the given raw scores.
    pub fn decide(&self, scores: &[f64]) -> usize {
        if self.units() == 1 {
            usize::from(scores[0] > self.threshold())
        } else {
            argmax(scores)
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(self.decide(&self.activate(x)?))
    }

    /// Thresholded per-unit outputs in the model's target coding.
    pub fn outputs(&self, scores: &[f64]) -> Vec<f64> {
        let theta = self.threshold();
        scores.iter().map(|&s| self.coding.encode(s > theta)).collect()
    }

    /// Per-unit targets for `class` in the model's target coding.
    pub fn targets(&self, class: usize) -> Vec<f64> {
        if self.units() == 1 {
            vec![self.coding.encode(class == 1)]
        } else {
            (0..self.units()).map(|k| self.coding.encode(k == class)).collect()
        }
    }

    /// Adds `λ x_j y_k · gate_k` to every weight and returns the delta.
    fn additive(&mut self, x: &[f64], y: &[f64], gate: impl Fn(usize) -> f64) -> Result<Array2<f64>> {
        let x = self.expand(x)?;
        self.check_units(y)?;
        let gates: Vec<f64> = (0..self.units()).map(gate).collect();
        let delta = Array2::from_shape_fn(self.weights.dim(), |(j, k)| self.lr * x[j] * y[k] * gates[k]);
        self.weights += &delta;
        Ok(delta)
    }

    /// Unconditional Hebbian update.
    pub fn update_hebb(&mut self, x: &[f64], y: &[f64]) -> Result<Array2<f64>> {
        self.additive(x, y, |_| 1.0)
    }

    /// Hebbian update on the units whose output `z_k` differs from `y_k`.
    pub fn update_perceptron(&mut self, x: &[f64], y: &[f64], z: &[f64]) -> Result<Array2<f64>> {
        self.check_units(z)?;
        let wrong: Vec<bool> = y.iter().zip(z).map(|(a, b)| a != b).collect();
        self.additive(x, y, |k| f64::from(u8::from(wrong.get(k).copied().unwrap_or(false))))
    }

    /// Hebbian update on units with `y_k · score_k < γ`; `y` is ±1.
    pub fn update_margin(&mut self, x: &[f64], y: &[f64], scores: &[f64]) -> Result<Array2<f64>> {
        self.check_units(scores)?;
        let gamma = self.margin;
        let violated: Vec<bool> = y.iter().zip(scores).map(|(t, s)| t * s < gamma).collect();
        self.additive(x, y, |k| f64::from(u8::from(violated.get(k).copied().unwrap_or(false))))
    }

    /// Hebbian update scaled per unit by `min(1, max(0, 1 − y_k·clip(score_k)))`
    /// with scores clipped to [−1, 1]; `y` is ±1.
    pub fn update_soft_margin(&mut self, x: &[f64], y: &[f64], scores: &[f64]) -> Result<Array2<f64>> {
        self.check_units(scores)?;
        let factors: Vec<f64> = y.iter().zip(scores).map(|(t, s)| soft_margin_factor(*t, *s)).collect();
        self.additive(x, y, |k| factors.get(k).copied().unwrap_or(0.0))
    }

    fn binary_input(&self, x: &[f64]) -> Result<Vec<f64>> {
        if let Some((feature, &value)) = x.iter().enumerate().find(|(_, &v)| v != 0.0 && v != 1.0) {
            return Err(Error::NonBinaryFeature {
                instance: 0,
                feature,
                value,
            });
        }
        self.expand(x)
    }

    fn multiplicative(&mut self, x: &[f64], y: &[f64], z: &[f64], demote: Demotion) -> Result<Array2<f64>> {
        let x = self.binary_input(x)?;
        self.check_units(y)?;
        self.check_units(z)?;
        let alpha = self.promotion;
        let mut factors = Array2::ones(self.weights.dim());
        if self.lr == 0.0 {
            return Ok(factors);
        }
        for k in 0..self.units() {
            let positive = y[k] > 0.0;
            let fired = z[k] > 0.0;
            if positive == fired {
                continue;
            }
            for (j, &xj) in x.iter().enumerate() {
                if xj == 0.0 {
                    continue;
                }
                let w = &mut self.weights[[j, k]];
                if positive {
                    *w *= alpha;
                    factors[[j, k]] = alpha;
                } else {
                    match demote {
                        Demotion::Eliminate => {
                            *w = 0.0;
                            factors[[j, k]] = 0.0;
                        }
                        Demotion::Divide => {
                            *w /= alpha;
                            factors[[j, k]] = 1.0 / alpha;
                        }
                    }
                }
            }
        }
        Ok(factors)
    }

    /// Winnow: on a false negative multiply active weights by α, on a false
    /// positive zero them. Returns the factors applied.
    pub fn update_winnow(&mut self, x: &[f64], y: &[f64], z: &[f64]) -> Result<Array2<f64>> {
        self.multiplicative(x, y, z, Demotion::Eliminate)
    }

    /// Winnow2: promotion by α, demotion by 1/α.
    pub fn update_winnow2(&mut self, x: &[f64], y: &[f64], z: &[f64]) -> Result<Array2<f64>> {
        self.multiplicative(x, y, z, Demotion::Divide)
    }

    /// One online step on `(x, class)` with this model's own rule. Returns
    /// the class predicted before the update.
    pub fn step(&mut self, x: &[f64], class: usize) -> Result<usize> {
        if class >= self.classes {
            return Err(Error::ClassOutOfRange {
                index: class,
                k: self.classes,
            });
        }
        let scores = self.activate(x)?;
        let predicted = self.decide(&scores);
        let y = self.targets(class);
        match self.rule {
            Rule::Hebb => {
                self.update_hebb(x, &y)?;
            }
            Rule::Perceptron => {
                let z = self.outputs(&scores);
                self.update_perceptron(x, &y, &z)?;
            }
            Rule::Margin => {
                self.update_margin(x, &y, &scores)?;
            }
            Rule::SoftMargin => {
                self.update_soft_margin(x, &y, &scores)?;
            }
            Rule::Winnow => {
                let z = self.outputs(&scores);
                self.update_winnow(x, &y, &z)?;
            }
            Rule::Winnow2 => {
                let z = self.outputs(&scores);
                self.update_winnow2(x, &y, &z)?;
            }
        }
        Ok(predicted)
    }

    /// Writes the header `rule,k,d,lr,gamma,alpha,bias` followed by `d` rows
    /// of `k` weights, where `k` counts output units and `d` weight rows
    /// (including the bias row).
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            self.rule,
            self.units(),
            self.weights.nrows(),
            g17(self.lr),
            g17(self.margin),
            g17(self.promotion),
            u8::from(self.bias_feature)
        )?;
        for row in self.weights.outer_iter() {
            let line: Vec<String> = row.iter().map(|&v| g17(v)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_from(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::EmptyInput)?;
        let header = header?;
        let fields: Vec<&str> = header.trim().split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse {
                row: 1,
                message: format!("expected 7 header fields, found {}", fields.len()),
            });
        }
        let rule: Rule = fields[0].parse()?;
        let units: usize = parse_field(fields[1], 1)?;
        let rows: usize = parse_field(fields[2], 1)?;
        let bias_feature = match fields[6] {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Parse {
                    row: 1,
                    message: format!("bias flag must be 0 or 1, found {other:?}"),
                })
            }
        };
        let params = LinearParams {
            lr: parse_field(fields[3], 1)?,
            margin: parse_field(fields[4], 1)?,
            promotion: parse_field(fields[5], 1)?,
            bias_feature,
            coding: rule.default_coding(),
        };
        let values = read_matrix(&mut lines, rows, units)?;
        let weights = Array2::from_shape_vec((rows, units), values).expect("checked row widths");
        let classes = if units == 1 { 2 } else { units };
        Self::from_weights(rule, weights, classes, params)
    }
}

#[derive(Clone, Copy)]
enum Demotion {
    Eliminate,
    Divide,
}

fn soft_margin_factor(target: f64, score: f64) -> f64 {
    (1.0 - target * score.clamp(-1.0, 1.0)).clamp(0.0, 1.0)
}
