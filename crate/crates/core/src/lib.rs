//! Chance-corrected evaluation and learning.
//!
//! The crate is organised bottom-up:
//!
//! * [`contingency`] builds weighted `[predicted][real]` tables and their
//!   one-vs-rest dichotomous reductions.
//! * [`metrics`] computes informedness, markedness, Cohen's kappa and the
//!   correlation from those tables, including the bookmaker gain-matrix form
//!   of informedness.
//! * [`linear`] holds online linear threshold learners (Hebb, perceptron,
//!   margin and soft-margin perceptrons, Winnow, Winnow2) and the
//!   [`Informatron`](linear::Informatron), an association learner whose
//!   scores are ΔP′ / ΔP of the accumulated counts.
//! * [`stump`] is the weighted decision-stump weak learner and [`boost`] runs
//!   AdaBoost.M1 with a pluggable goodness measure. Using a chance-corrected
//!   measure instead of accuracy gives AdaBook.
//! * [`dataset`] loads CSV data, generates synthetic oracle datasets and
//!   splits them.
//!
//! ```
//! use bookmaker::contingency::ContingencyTable;
//! use bookmaker::metrics::{informedness, informedness_bookmaker};
//!
//! let gold = [0, 0, 1, 1, 2, 2];
//! let pred = [0, 1, 1, 1, 2, 0];
//! let table = ContingencyTable::from_labels(&gold, &pred, 3)?;
//! let direct = informedness(&table)?;
//! let bookmaker = informedness_bookmaker(&table)?;
//! assert!((direct - bookmaker).abs() < 1e-12);
//! # Ok::<(), bookmaker::Error>(())
//! ```
//!
//! The guide in `book/` walks through each concept; its Rust snippets are
//! compiled and run as doctests of this crate.

pub mod boost;
pub mod contingency;
pub mod dataset;
mod error;
pub mod fmt;
pub mod linear;
pub mod metrics;
pub mod stump;

pub use error::{Error, Marginal, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    pub mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/contingency.md")]
    pub mod contingency {}
    #[doc = include_str!("../../../book/src/chance-metrics.md")]
    pub mod chance_metrics {}
    #[doc = include_str!("../../../book/src/linear-learners.md")]
    pub mod linear_learners {}
    #[doc = include_str!("../../../book/src/informatron.md")]
    pub mod informatron {}
    #[doc = include_str!("../../../book/src/boosting.md")]
    pub mod boosting {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    pub mod datasets {}
}
