use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::iri::{Iri, QA};
use super::term::Term;
use super::ModelError;

/// The four output data types, each bound to one `qa:` annotation class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnnotationKind {
    /// O1, written by NED components.
    #[serde(rename = "O1")]
    Instance,
    /// O2, written by NER components.
    #[serde(rename = "O2")]
    SpotInstance,
    /// O3, written by relation linkers.
    #[serde(rename = "O3")]
    Relation,
    /// O4, written by query builders.
    #[serde(rename = "O4")]
    AnswerSparql,
}

impl AnnotationKind {
    pub const ALL: [AnnotationKind; 4] = [
        AnnotationKind::Instance,
        AnnotationKind::SpotInstance,
        AnnotationKind::Relation,
        AnnotationKind::AnswerSparql,
    ];

    pub fn code(self) -> &'static str {
        match self {
            AnnotationKind::Instance => "O1",
            AnnotationKind::SpotInstance => "O2",
            AnnotationKind::Relation => "O3",
            AnnotationKind::AnswerSparql => "O4",
        }
    }

    /// Local name of the annotation class, e.g. `AnnotationOfSpotInstance`.
    pub fn class_name(self) -> &'static str {
        match self {
            AnnotationKind::Instance => "AnnotationOfInstance",
            AnnotationKind::SpotInstance => "AnnotationOfSpotInstance",
            AnnotationKind::Relation => "AnnotationOfRelation",
            AnnotationKind::AnswerSparql => "AnnotationOfAnswerSPARQL",
        }
    }

    pub fn class_iri(self) -> Iri {
        Iri::from_parts(QA, self.class_name())
    }

    pub fn from_class_iri(iri: &Iri) -> Option<Self> {
        let local = iri.as_str().strip_prefix(QA)?;
        Self::ALL.into_iter().find(|k| k.class_name() == local)
    }

    /// Whether a grouped annotation of this kind must carry `oa:hasBody`.
    pub fn requires_body(self) -> bool {
        !matches!(self, AnnotationKind::SpotInstance)
    }
}

impl fmt::Display for AnnotationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for AnnotationKind {
    type Err = ModelError;

    /// Accepts the code (`O2`) or the class local name (`AnnotationOfSpotInstance`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.code().eq_ignore_ascii_case(s) || k.class_name() == s)
            .ok_or_else(|| ModelError::UnknownKind(s.to_string()))
    }
}

/// The six registered input-query keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InputQueryKey {
    I1,
    I2,
    I3,
    I4,
    I5,
    I6,
}

impl InputQueryKey {
    pub const ALL: [InputQueryKey; 6] = [
        InputQueryKey::I1,
        InputQueryKey::I2,
        InputQueryKey::I3,
        InputQueryKey::I4,
        InputQueryKey::I5,
        InputQueryKey::I6,
    ];

    pub fn code(self) -> &'static str {
        match self {
            InputQueryKey::I1 => "I1",
            InputQueryKey::I2 => "I2",
            InputQueryKey::I3 => "I3",
            InputQueryKey::I4 => "I4",
            InputQueryKey::I5 => "I5",
            InputQueryKey::I6 => "I6",
        }
    }
}

impl fmt::Display for InputQueryKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for InputQueryKey {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| ModelError::UnknownKind(s.to_string()))
    }
}

/// A numeric literal that keeps the lexical form it was read with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decimal {
    lexical: String,
    value: f64,
}

impl Decimal {
    pub fn parse(lexical: &str) -> Option<Self> {
        let trimmed = lexical.trim();
        let value: f64 = trimmed.parse().ok()?;
        value.is_finite().then(|| Self { lexical: trimmed.to_string(), value })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_unit_interval(&self) -> bool {
        (0.0..=1.0).contains(&self.value)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lexical)
    }
}

/// Character span inside the question text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selector {
    pub start: u64,
    pub end: u64,
}

/// One typed data item a component wrote, grouped from its triples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Annotation {
    pub id: String,
    pub kind: AnnotationKind,
    pub annotated_by: Iri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotated_at: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_question: Option<Iri>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selector: Option<Selector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<Term>,
}

impl Annotation {
    /// Checks the structural invariants. Out-of-range scores are tolerated here;
    /// ingestion reports them as warnings instead.
    pub fn validate(&self) -> Result<(), ModelError> {
        if let Some(sel) = self.selector {
            if sel.start > sel.end {
                return Err(ModelError::InvalidSelector { start: sel.start, end: sel.end });
            }
        }
        match (self.kind.requires_body(), self.body.is_some()) {
            (true, false) => Err(ModelError::MissingBody(self.id.clone())),
            (false, true) => Err(ModelError::UnexpectedBody(self.id.clone())),
            _ => Ok(()),
        }
    }
}
