//! Experiment matrices: sample recorded outputs, prompt a model, score, aggregate.

pub mod corpus;
pub mod dataset;
pub mod examples;
pub mod plan;
pub mod runner;

use thiserror::Error;

pub use corpus::{load_corpus, read_entry, synthesize_corpus, write_corpus, CorpusEntry};
pub use dataset::{load_dataset, parse_dataset, Question, QuestionDataset};
pub use examples::{builtin_output_examples, example_from_entry, input_examples, load_output_examples, prompt_data};
pub use plan::ExperimentPlan;
pub use runner::{matrix_csv, run, run_to_directory, trials_csv, write_reports, RunOptions, RunReport, TrialRecord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExperimentError {
    #[error("could not parse dataset: {0}")]
    Parse(String),
    #[error("dataset contains no questions")]
    EmptyDataset,
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("plan cannot be run: {0}")]
    PlanInfeasible(String),
    #[error("only {available} instance(s) of {kind} available, {needed} needed")]
    DatasetTooSmall { kind: String, available: usize, needed: usize },
    #[error("corpus: {0}")]
    Corpus(String),
    #[error("{0}")]
    Io(String),
}
