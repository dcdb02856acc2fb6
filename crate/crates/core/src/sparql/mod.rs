//! Classification of the SPARQL SELECT queries components use to read their input.

mod lexer;

use std::collections::BTreeSet;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{resolve_curie, AnnotationKind, InputQueryKey, Iri, PrefixTable, RDF};

use lexer::{lex, Lexeme};
pub use lexer::normalize_query;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SparqlError {
    #[error("not a SELECT query")]
    NotSelectQuery,
    #[error("query matches no registered signature: {0}")]
    UnclassifiableQuery(String),
    #[error("invalid query registry: {0}")]
    Registry(String),
}

/// A component's input query together with the key it was classified to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InputQueryRecord {
    pub raw_text: String,
    pub normalized_text: String,
    pub key: InputQueryKey,
    pub requested_kind: Option<AnnotationKind>,
    pub graph: Option<Iri>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegistryEntry {
    pub key: InputQueryKey,
    pub signature: Iri,
    pub kind: Option<AnnotationKind>,
    pub template_id: String,
    pub text: String,
}

#[derive(Deserialize)]
struct RegistryFile {
    query: Vec<RawEntry>,
}

#[derive(Deserialize)]
struct RawEntry {
    key: String,
    signature: String,
    kind: Option<String>,
    template: String,
    text: String,
}

/// The six registered input queries.
#[derive(Clone, Debug)]
pub struct QueryRegistry {
    entries: Vec<RegistryEntry>,
}

static STANDARD: Lazy<QueryRegistry> = Lazy::new(|| {
    QueryRegistry::from_toml(include_str!("../../assets/queries.toml")).expect("bundled query registry is valid")
});

impl QueryRegistry {
    pub fn standard() -> &'static QueryRegistry {
        &STANDARD
    }

    pub fn from_toml(text: &str) -> Result<Self, SparqlError> {
        let err = |m: String| SparqlError::Registry(m);
        let file: RegistryFile = toml::from_str(text).map_err(|e| err(e.to_string()))?;
        let prefixes = PrefixTable::standard();
        let mut entries = Vec::with_capacity(file.query.len());
        for raw in file.query {
            let key: InputQueryKey = raw.key.parse().map_err(|e: crate::model::ModelError| err(e.to_string()))?;
            let signature = resolve_curie(&raw.signature, &prefixes).map_err(|e| err(e.to_string()))?;
            let kind = raw
                .kind
                .map(|k| k.parse::<AnnotationKind>())
                .transpose()
                .map_err(|e| err(e.to_string()))?;
            entries.push(RegistryEntry { key, signature, kind, template_id: raw.template, text: raw.text.trim().to_string() });
        }
        let keys: BTreeSet<_> = entries.iter().map(|e| e.key).collect();
        let signatures: BTreeSet<_> = entries.iter().map(|e| e.signature.as_str()).collect();
        if keys.len() != entries.len() || signatures.len() != entries.len() {
            return Err(err("keys and signatures must be unique".into()));
        }
        if keys.len() != InputQueryKey::ALL.len() {
            return Err(err(format!("expected {} keys, found {}", InputQueryKey::ALL.len(), keys.len())));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[RegistryEntry] {
        &self.entries
    }

    pub fn entry(&self, key: InputQueryKey) -> Option<&RegistryEntry> {
        self.entries.iter().find(|e| e.key == key)
    }

    /// Classifies a query by the annotation classes its `rdf:type` patterns request.
    pub fn classify(&self, raw_text: &str) -> Result<InputQueryRecord, SparqlError> {
        let shape = analyze(raw_text)?;
        let matches: Vec<&RegistryEntry> = self.entries.iter().filter(|e| shape.classes.contains(&e.signature)).collect();
        match matches.as_slice() {
            [entry] => Ok(InputQueryRecord {
                raw_text: raw_text.to_string(),
                normalized_text: normalize_query(raw_text),
                key: entry.key,
                requested_kind: entry.kind,
                graph: shape.graph,
            }),
            [] if shape.classes.is_empty() => Err(SparqlError::UnclassifiableQuery("no rdf:type pattern".into())),
            [] => Err(SparqlError::UnclassifiableQuery(format!(
                "requested classes {} are not registered",
                shape.classes.iter().map(Iri::as_str).collect::<Vec<_>>().join(", ")
            ))),
            many => Err(SparqlError::UnclassifiableQuery(format!(
                "ambiguous between {}",
                many.iter().map(|e| e.key.code()).collect::<Vec<_>>().join(", ")
            ))),
        }
    }
}

/// Classifies against the bundled registry.
pub fn classify_query(raw_text: &str) -> Result<InputQueryKey, SparqlError> {
    QueryRegistry::standard().classify(raw_text).map(|r| r.key)
}

struct QueryShape {
    classes: Vec<Iri>,
    graph: Option<Iri>,
}

fn analyze(raw_text: &str) -> Result<QueryShape, SparqlError> {
    let lexemes = lex(raw_text);
    let mut prefixes = PrefixTable::standard();
    let mut i = 0;
    loop {
        match lexemes.get(i) {
            Some(Lexeme::Word(w)) if w.eq_ignore_ascii_case("PREFIX") => {
                if let (Some(Lexeme::Word(p)), Some(Lexeme::Iri(ns))) = (lexemes.get(i + 1), lexemes.get(i + 2)) {
                    prefixes.insert(p.trim_end_matches(':'), ns.clone());
                }
                i += 3;
            }
            Some(Lexeme::Word(w)) if w.eq_ignore_ascii_case("BASE") => i += 2,
            Some(Lexeme::Word(w)) if w.eq_ignore_ascii_case("SELECT") => break,
            _ => return Err(SparqlError::NotSelectQuery),
        }
    }

    let resolve = |lexeme: &Lexeme| -> Option<Iri> {
        match lexeme {
            Lexeme::Iri(value) => Iri::new(value.clone()).ok(),
            Lexeme::Word(w) if w.contains(':') && !w.starts_with(['?', '$']) => resolve_curie(w, &prefixes).ok(),
            _ => None,
        }
    };
    let rdf_type = format!("{RDF}type");
    let mut classes = Vec::new();
    let mut graph = None;
    let mut j = i + 1;
    while j < lexemes.len() {
        let lexeme = &lexemes[j];
        if let Lexeme::Word(w) = lexeme {
            if w.eq_ignore_ascii_case("FROM") || w.eq_ignore_ascii_case("GRAPH") {
                let mut k = j + 1;
                if matches!(lexemes.get(k), Some(Lexeme::Word(n)) if n.eq_ignore_ascii_case("NAMED")) {
                    k += 1;
                }
                if graph.is_none() {
                    graph = lexemes.get(k).and_then(resolve);
                }
                j = k + 1;
                continue;
            }
        }
        let is_type = matches!(lexeme, Lexeme::Word(w) if w == "a") || resolve(lexeme).is_some_and(|iri| iri.as_str() == rdf_type);
        if is_type {
            // `a qa:X, qa:Y` lists several objects.
            let mut k = j + 1;
            while let Some(class) = lexemes.get(k).and_then(resolve) {
                if !classes.contains(&class) {
                    classes.push(class);
                }
                if lexemes.get(k + 1) == Some(&Lexeme::Punct(',')) {
                    k += 2;
                } else {
                    break;
                }
            }
            j = k;
        }
        j += 1;
    }
    Ok(QueryShape { classes, graph })
}
