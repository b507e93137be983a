//! Edge crossings of linearly arranged trees.
//!
//! A tree on `n` labeled vertices is placed on a line by a bijection from
//! vertices to positions `1..=n`. Two edges cross when their endpoints
//! interleave. This crate computes crossing counts and dependency lengths of
//! concrete arrangements, the closed-form expectations of both quantities
//! under a uniformly random arrangement, Monte Carlo estimators of those
//! expectations, and brute-force enumeration oracles that check every closed
//! form exactly on small trees. A CoNLL reader turns dependency treebanks into
//! the same `(tree, arrangement)` pairs.
//!
//! Every closed form is an exact [`Rational`]; floating point only appears in
//! Monte Carlo summaries.

pub mod arrangement;
pub mod oracle;
pub mod random_lab;
pub mod theory;
pub mod tree;
pub mod treebank;

mod rational;

pub use arrangement::{ArrangementError, CrossingReport, LinearArrangement};
pub use oracle::{Caps, ExactStats, OracleError};
pub use random_lab::{McEstimate, SwapTrajectory, SwapWalk};
pub use theory::{TheoryError, TheoryReport};
pub use tree::{PrueferSequence, Shape, Tree, TreeError};
pub use treebank::{SentenceRecord, SentenceStats, SkipReason};

/// Exact rational used for every closed-form quantity.
pub type Rational = num_rational::Ratio<i64>;

pub use rational::{format_pq, parse_pq};
