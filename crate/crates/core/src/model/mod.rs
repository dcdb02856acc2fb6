//! Domain vocabulary shared by every other module: RDF terms, the annotation
//! taxonomy, explanations and quality scores. All types are immutable values.

mod annotation;
mod explanation;
mod iri;
mod score;
mod term;

use thiserror::Error;

pub use annotation::{Annotation, AnnotationKind, Decimal, InputQueryKey, Selector};
pub use explanation::{Explanation, Method, Provenance, SubjectKind};
pub use iri::{is_absolute_iri, resolve_curie, Iri, PrefixTable, OA, QA, RDF, XSD};
pub use score::{
    Depreciation, DepreciationReason, DepreciationTarget, QualityScore, RATING_BASE, RATING_FLOOR,
};
pub use term::{BlankNode, Literal, Term, Triple, TripleSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid IRI {0:?}")]
    InvalidIri(String),
    #[error("unknown prefix {0:?}")]
    UnknownPrefix(String),
    #[error("invalid blank node label {0:?}")]
    InvalidBlankLabel(String),
    #[error("a literal cannot be the subject of a triple")]
    LiteralSubject,
    #[error("triple attributed to {found} inside a set owned by {expected}")]
    AttributionMismatch { expected: String, found: String },
    #[error("unknown kind {0:?}")]
    UnknownKind(String),
    #[error("selector start {start} is after end {end}")]
    InvalidSelector { start: u64, end: u64 },
    #[error("annotation {0} has no body")]
    MissingBody(String),
    #[error("annotation {0} of a spot kind must not carry a body")]
    UnexpectedBody(String),
    #[error("a quality score needs at least one annotation rating")]
    EmptyAnnotationRatings,
    #[error("invalid depreciation: {0}")]
    InvalidDepreciation(String),
}

/// Serde helpers writing rationals as `"n/d"` (or `"n"` for integers).
pub(crate) mod ratio_string {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(value: &T, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(value)
    }

    pub fn deserialize<'de, T, D>(deserializer: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<T: Display, S: Serializer>(value: &Option<T>, serializer: S) -> Result<S::Ok, S::Error> {
            match value {
                Some(v) => serializer.collect_str(v),
                None => serializer.serialize_none(),
            }
        }

        pub fn deserialize<'de, T, D>(deserializer: D) -> Result<Option<T>, D::Error>
        where
            T: FromStr,
            T::Err: Display,
            D: Deserializer<'de>,
        {
            Option::<String>::deserialize(deserializer)?.map(|s| s.parse().map_err(D::Error::custom)).transpose()
        }
    }
}
