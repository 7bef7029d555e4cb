use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::{LinearModel, LinearParams, Rule};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleConfig {
    pub rule: Rule,
    pub epochs: usize,
    pub seed: u64,
    pub params: LinearParams,
}

impl RuleConfig {
    pub fn new(rule: Rule) -> Self {
        Self {
            rule,
            epochs: 10,
            seed: 0,
            params: LinearParams::for_rule(rule),
        }
    }

    pub fn epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn lr(mut self, lr: f64) -> Self {
        self.params.lr = lr;
        self
    }

    pub fn margin(mut self, margin: f64) -> Self {
        self.params.margin = margin;
        self
    }

    pub fn promotion(mut self, alpha: f64) -> Self {
        self.params.promotion = alpha;
        self
    }

    pub fn bias_feature(mut self, on: bool) -> Self {
        self.params.bias_feature = on;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: LinearModel,
    /// Mistakes per epoch, counted before each instance's update.
    pub epoch_errors: Vec<usize>,
}

impl TrainOutcome {
    pub fn total_errors(&self) -> usize {
        self.epoch_errors.iter().sum()
    }
}

/// Runs `epochs` online passes over `dataset`, reshuffling each pass with a
/// generator seeded from `config.seed`.
pub fn train(dataset: &LabeledDataset, config: &RuleConfig) -> Result<TrainOutcome> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput);
    }
    if config.epochs == 0 {
        return Err(Error::InvalidConfig("epochs must be at least 1".into()));
    }
    if config.rule.is_multiplicative() {
        dataset.require_binary()?;
    }
    let mut model = LinearModel::new(config.rule, dataset.d(), dataset.k(), config.params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..dataset.n()).collect();
    let mut epoch_errors = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut errors = 0;
        for &i in &order {
            let x = dataset.row(i).to_vec();
            let class = dataset.y()[i];
            if model.step(&x, class)? != class {
                errors += 1;
            }
        }
        epoch_errors.push(errors);
    }
    Ok(TrainOutcome { model, epoch_errors })
}
