//! Quantitative scoring of output-data explanations.

mod aggregate;
mod scoring;
mod stats;

use thiserror::Error;

pub use aggregate::{aggregate, format_decimal, ExperimentMatrix, ExperimentResult, Marginal, ScoredTrial};
pub use scoring::{
    numbers_match, score_annotation, score_explanation, score_prefix, split_items, CheckField, CheckStatus,
    Evaluation, Rated, ValueCheck,
};
pub use stats::{pearson, q_e};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("at least one annotation rating is required")]
    EmptyAnnotationList,
    #[error("rating {0} is outside 1..=3")]
    InvalidRating(u8),
    #[error("vectors of length {left} and {right} cannot be correlated")]
    LengthMismatch { left: usize, right: usize },
    #[error("a constant vector has no correlation")]
    ConstantVector,
    #[error("{0}")]
    Model(String),
}
