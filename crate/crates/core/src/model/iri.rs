use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const OA: &str = "http://www.w3.org/ns/openannotation/core/";
pub const QA: &str = "http://www.wdaqua.eu/qa#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

/// URI schemes that are accepted as absolute IRIs even without a `//` authority.
const OPAQUE_SCHEMES: &[&str] = &["urn", "tag", "mailto", "data", "did", "tel"];

/// An absolute IRI.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, ModelError> {
        let value = value.into();
        if value.is_empty() || value.chars().any(char::is_whitespace) {
            return Err(ModelError::InvalidIri(value));
        }
        Ok(Self(value))
    }

    /// Builds an IRI from a namespace and a local part known to be valid.
    pub(crate) fn from_parts(namespace: &str, local: &str) -> Self {
        Self(format!("{namespace}{local}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The part after the last `#`, `/` or `:`; the whole IRI when that part is empty.
    pub fn local_name(&self) -> &str {
        match self.0.rfind(['#', '/', ':']) {
            Some(idx) if idx + 1 < self.0.len() => &self.0[idx + 1..],
            _ => &self.0,
        }
    }

    /// The IRI without its `scheme://` head, if it has one.
    pub fn without_scheme(&self) -> &str {
        match self.0.find("://") {
            Some(idx) => &self.0[idx + 3..],
            None => &self.0,
        }
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Iri {
    type Error = ModelError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Iri> for String {
    fn from(iri: Iri) -> Self {
        iri.0
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Prefix → namespace table used to expand CURIEs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixTable {
    entries: Vec<(String, String)>,
}

impl PrefixTable {
    /// The fixed table: `rdf`, `oa`, `qa`, `xsd`.
    pub fn standard() -> Self {
        Self {
            entries: vec![
                ("rdf".into(), RDF.into()),
                ("oa".into(), OA.into()),
                ("qa".into(), QA.into()),
                ("xsd".into(), XSD.into()),
            ],
        }
    }

    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    /// Adds or replaces a prefix. Used for prefixes declared inside SPARQL queries.
    pub fn insert(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        let prefix = prefix.into();
        let namespace = namespace.into();
        match self.entries.iter_mut().find(|(p, _)| *p == prefix) {
            Some(entry) => entry.1 = namespace,
            None => self.entries.push((prefix, namespace)),
        }
    }

    pub fn namespace(&self, prefix: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(p, _)| p == prefix)
            .map(|(_, ns)| ns.as_str())
    }

    /// Shortest CURIE for `iri` whose local part is a plain name, if any prefix applies.
    pub fn compact(&self, iri: &Iri) -> Option<String> {
        self.entries
            .iter()
            .filter_map(|(prefix, ns)| {
                let local = iri.as_str().strip_prefix(ns.as_str())?;
                is_plain_local(local).then(|| format!("{prefix}:{local}"))
            })
            .min_by_key(String::len)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(p, ns)| (p.as_str(), ns.as_str()))
    }
}

impl Default for PrefixTable {
    fn default() -> Self {
        Self::standard()
    }
}

fn is_plain_local(local: &str) -> bool {
    !local.is_empty()
        && !local.ends_with('.')
        && local
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

/// True for strings that look like an absolute IRI (`scheme://...` or an opaque scheme such as `urn:`).
pub fn is_absolute_iri(value: &str) -> bool {
    let Some((scheme, rest)) = value.split_once(':') else {
        return false;
    };
    let mut chars = scheme.chars();
    let valid_scheme = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    valid_scheme
        && !rest.is_empty()
        && (rest.starts_with("//") || OPAQUE_SCHEMES.contains(&scheme.to_ascii_lowercase().as_str()))
}

/// Expands a CURIE against `table`. Absolute IRIs, with or without angle brackets, pass through.
pub fn resolve_curie(curie: &str, table: &PrefixTable) -> Result<Iri, ModelError> {
    if let Some(inner) = curie.strip_prefix('<').and_then(|s| s.strip_suffix('>')) {
        return Iri::new(inner);
    }
    let Some((prefix, local)) = curie.split_once(':') else {
        return Err(ModelError::InvalidIri(curie.to_string()));
    };
    if let Some(namespace) = table.namespace(prefix) {
        return Iri::new(format!("{namespace}{local}"));
    }
    if is_absolute_iri(curie) {
        return Iri::new(curie);
    }
    Err(ModelError::UnknownPrefix(prefix.to_string()))
}
