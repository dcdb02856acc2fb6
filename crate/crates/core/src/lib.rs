//! Explanations for the input and output data flows of Qanary-style question
//! answering components, and a scorer for generated output explanations.

pub mod digest;
pub mod eval;
pub mod experiment;
pub mod gateway;
pub mod model;
pub mod prompt;
pub mod rdf;
pub mod sparql;
pub mod template;
pub mod triplestore;

pub use model::*;
