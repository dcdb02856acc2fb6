//! Reading, writing and grouping the grounded triples a component emits.

mod grouping;
mod parser;
mod serializer;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Iri, ModelError};

pub use grouping::{classify_kind, group_annotations, group_triples, Grouping};
pub use parser::{parse_ntriples, parse_with_prefixes};
pub use serializer::{deskolemize, skolem_iri, skolemize, to_compact, to_ntriples, SKOLEM_BASE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RdfError {
    #[error("syntax error on line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("variable {name} on line {line}: triples must be grounded")]
    VariableNotAllowed { line: usize, name: String },
    #[error("no subject is typed with a registered annotation class")]
    MissingType,
    #[error("{0} is not a registered annotation class")]
    UnknownAnnotationClass(Iri),
    #[error("annotation {id} has no oa:hasBody")]
    MissingBody { id: String },
    #[error("annotation {id} has no oa:annotatedBy")]
    MissingAttribution { id: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub message: String,
    pub severity: Severity,
}

impl ParseDiagnostic {
    pub fn warning(line: usize, message: impl Into<String>) -> Self {
        Self { line: line.max(1), message: message.into(), severity: Severity::Warning }
    }
}
