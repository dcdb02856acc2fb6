use std::fmt;

use serde::{Deserialize, Serialize};

use super::iri::{Iri, OA};
use super::ModelError;

const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlankNode(String);

impl BlankNode {
    pub fn new(label: impl Into<String>) -> Result<Self, ModelError> {
        let label = label.into();
        if label.is_empty() || label.chars().any(char::is_whitespace) {
            return Err(ModelError::InvalidBlankLabel(label));
        }
        Ok(Self(label))
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub lexical: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datatype: Option<Iri>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Self {
        Self { lexical: lexical.into(), datatype: None, language: None }
    }

    /// `xsd:string` literals are stored as simple literals, the two being the same term.
    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        let datatype = (datatype.as_str() != XSD_STRING).then_some(datatype);
        Self { lexical: lexical.into(), datatype, language: None }
    }
}

/// An RDF term. There is no variable variant: every triple is ground.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
    Blank(BlankNode),
}

impl Term {
    /// IRI string, literal lexical form or blank-node label.
    pub fn value(&self) -> &str {
        match self {
            Term::Iri(iri) => iri.as_str(),
            Term::Literal(lit) => &lit.lexical,
            Term::Blank(b) => b.label(),
        }
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

impl From<BlankNode> for Term {
    fn from(b: BlankNode) -> Self {
        Term::Blank(b)
    }
}

/// N-Triples rendering of a single term.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Blank(b) => write!(f, "_:{}", b.label()),
            Term::Literal(lit) => {
                f.write_str("\"")?;
                for c in lit.lexical.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")?;
                if let Some(lang) = &lit.language {
                    write!(f, "@{lang}")
                } else if let Some(dt) = &lit.datatype {
                    write!(f, "^^<{dt}>")
                } else {
                    Ok(())
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    subject: Term,
    predicate: Iri,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Iri, object: Term) -> Result<Self, ModelError> {
        if subject.is_literal() {
            return Err(ModelError::LiteralSubject);
        }
        Ok(Self { subject, predicate, object })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Iri {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <{}> {} .", self.subject, self.predicate, self.object)
    }
}

/// The triples one component wrote into one named graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleSet {
    graph: Iri,
    component: Iri,
    triples: Vec<Triple>,
}

impl TripleSet {
    /// Fails when an `oa:annotatedBy` statement names a different component.
    pub fn new(graph: Iri, component: Iri, triples: Vec<Triple>) -> Result<Self, ModelError> {
        let annotated_by = format!("{OA}annotatedBy");
        for triple in &triples {
            if triple.predicate.as_str() == annotated_by && triple.object.value() != component.as_str() {
                return Err(ModelError::AttributionMismatch {
                    expected: component.to_string(),
                    found: triple.object.value().to_string(),
                });
            }
        }
        Ok(Self { graph, component, triples })
    }

    pub fn graph(&self) -> &Iri {
        &self.graph
    }

    pub fn component(&self) -> &Iri {
        &self.component
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn into_triples(self) -> Vec<Triple> {
        self.triples
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    #[test]
    fn literal_subject_rejected() {
        let err = Triple::new(Literal::plain("x").into(), iri("http://p"), iri("http://o").into());
        assert_eq!(err, Err(ModelError::LiteralSubject));
    }

    #[test]
    fn attribution_must_match_component() {
        let by = iri(&format!("{OA}annotatedBy"));
        let t = Triple::new(BlankNode::new("a").unwrap().into(), by, iri("urn:qanary:Other").into()).unwrap();
        let err = TripleSet::new(iri("urn:graph:1"), iri("urn:qanary:TextRazor"), vec![t.clone()]);
        assert!(matches!(err, Err(ModelError::AttributionMismatch { .. })));
        assert!(TripleSet::new(iri("urn:graph:1"), iri("urn:qanary:Other"), vec![t]).is_ok());
    }

    #[test]
    fn literal_display_escapes() {
        let lit = Term::Literal(Literal::plain("a \"b\"\n"));
        assert_eq!(lit.to_string(), r#""a \"b\"\n""#);
    }
}
