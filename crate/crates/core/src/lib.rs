//! Weighted-entropy Mastermind solver.
//!
//! The library is generic over the floating-point type used for weights and
//! scores ([`Scalar`]); the aliases below fix it to `f64`, which is what the
//! command line tools and the assistant service use.

pub mod error;
pub mod heuristics;
pub mod optimizer;
pub mod rules;
pub mod scalar;
pub mod strategy;
mod symmetry;
pub mod weights;

pub use error::{Error, Result};
pub use heuristics::{
    baseline_score, filter_remaining, select_guess, weighted_entropy_score, BaselineKind,
    PolicyKind, FEEDBACK_TYPES, SCORE_TIE_TOLERANCE, STAGES,
};
pub use rules::{Code, Feedback, FeedbackTable, GameParams, PartitionCounts};
pub use scalar::Scalar;
pub use strategy::{
    build_tree, evaluate_all, parse_tree, play_game, serialize_tree, solve_turns, GameStats,
    Move, StrategyTree, Transcript, DEFAULT_MAX_TURNS,
};
pub use weights::{bundled_weights, emit_weights, named_policy, parse_weights};

pub type Policy = heuristics::Policy<f64>;
pub type WeightVector = heuristics::WeightVector<f64>;
pub type StageWeights = heuristics::StageWeights<f64>;
pub type ScoredGuess = heuristics::ScoredGuess<f64>;
pub type WeightFile = weights::WeightFile<f64>;
