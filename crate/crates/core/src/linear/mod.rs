//! Online linear threshold learners and the Informatron.

mod informatron;
mod model;
mod train;

pub use informatron::{Direction, Informatron};
pub use model::{argmax, LinearModel, LinearParams, Rule, TargetCoding};
pub use train::{train, RuleConfig, TrainOutcome};
