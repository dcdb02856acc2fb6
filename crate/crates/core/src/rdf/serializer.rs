use std::fmt::Write as _;

use crate::model::{BlankNode, Iri, Literal, PrefixTable, Term, Triple, XSD};

use super::parser::bare_literal;

/// Strict N-Triples, one statement per line.
pub fn to_ntriples(triples: &[Triple]) -> String {
    let mut out = String::new();
    for triple in triples {
        let _ = writeln!(out, "{triple}");
    }
    out
}

/// The abbreviated form: CURIEs for known namespaces, bare local identifiers for
/// blank nodes and bare numbers where that re-reads unambiguously.
pub fn to_compact(triples: &[Triple], prefixes: &PrefixTable) -> String {
    let mut out = String::new();
    for triple in triples {
        let _ = writeln!(
            out,
            "{} {} {} .",
            compact_term(triple.subject(), prefixes, false),
            compact_iri(triple.predicate(), prefixes),
            compact_term(triple.object(), prefixes, true),
        );
    }
    out
}

fn compact_iri(iri: &Iri, prefixes: &PrefixTable) -> String {
    prefixes.compact(iri).unwrap_or_else(|| format!("<{iri}>"))
}

fn compact_term(term: &Term, prefixes: &PrefixTable, object: bool) -> String {
    match term {
        Term::Iri(iri) => compact_iri(iri, prefixes),
        Term::Blank(b) if bare_safe(b.label(), object) => b.label().to_string(),
        Term::Blank(b) => format!("_:{}", b.label()),
        Term::Literal(lit) => compact_literal(lit, prefixes),
    }
}

fn compact_literal(lit: &Literal, prefixes: &PrefixTable) -> String {
    let bare_type = lit.datatype.as_ref().filter(|dt| {
        dt.as_str().strip_prefix(XSD).is_some_and(|t| matches!(t, "integer" | "decimal" | "double" | "boolean"))
    });
    if let (Some(dt), None) = (bare_type, &lit.language) {
        if bare_literal(&lit.lexical).is_some_and(|parsed| parsed.datatype.as_ref() == Some(dt)) {
            return lit.lexical.clone();
        }
    }
    let plain = Term::Literal(Literal::plain(lit.lexical.clone())).to_string();
    match (&lit.language, &lit.datatype) {
        (Some(lang), _) => format!("{plain}@{lang}"),
        (None, Some(dt)) => format!("{plain}^^{}", compact_iri(dt, prefixes)),
        (None, None) => plain,
    }
}

/// Whether a blank label can be written without `_:` and still read back as the same blank node.
fn bare_safe(label: &str, object: bool) -> bool {
    !label.is_empty()
        && label != "a"
        && !label.contains(':')
        && !label.ends_with('.')
        && !label.starts_with(['?', '$', '"', '<', '_', '#', '@', '^'])
        && !label.chars().any(char::is_whitespace)
        && !(object && bare_literal(label).is_some())
}

/// Prefix of the IRIs that stand in for blank nodes when triples are loaded into a store.
pub const SKOLEM_BASE: &str = "http://qanary.local/.well-known/genid/";

/// Replaces blank nodes by skolem IRIs so their labels survive a round trip through a triplestore.
pub fn skolemize(triples: &[Triple]) -> Vec<Triple> {
    let map = |term: &Term| match term {
        Term::Blank(b) => Term::Iri(skolem_iri(b)),
        other => other.clone(),
    };
    triples
        .iter()
        .map(|t| Triple::new(map(t.subject()), t.predicate().clone(), map(t.object())).expect("skolem subject is an IRI"))
        .collect()
}

pub fn skolem_iri(blank: &BlankNode) -> Iri {
    let mut encoded = String::new();
    for byte in blank.label().bytes() {
        if byte.is_ascii_alphanumeric() || matches!(byte, b'-' | b'_' | b'.' | b'~') {
            encoded.push(byte as char);
        } else {
            let _ = write!(encoded, "%{byte:02X}");
        }
    }
    Iri::from_parts(SKOLEM_BASE, &encoded)
}

/// Inverse of [`skolem_iri`] for IRIs under [`SKOLEM_BASE`].
pub fn deskolemize(iri: &Iri) -> Option<BlankNode> {
    let encoded = iri.as_str().strip_prefix(SKOLEM_BASE)?;
    let mut bytes = Vec::with_capacity(encoded.len());
    let raw = encoded.as_bytes();
    let mut i = 0;
    while i < raw.len() {
        if raw[i] == b'%' && i + 2 < raw.len() {
            let byte = u8::from_str_radix(std::str::from_utf8(&raw[i + 1..i + 3]).ok()?, 16).ok()?;
            bytes.push(byte);
            i += 3;
        } else {
            bytes.push(raw[i]);
            i += 1;
        }
    }
    BlankNode::new(String::from_utf8(bytes).ok()?).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_ntriples;

    #[test]
    fn compact_form_reads_back() {
        let text = "0.4794646229033659 rdf:type qa:AnnotationOfSpotInstance .\n\
                    0.4794646229033659 oa:annotatedBy urn:qanary:TextRazor .\n\
                    b2d oa:start 10 .\n\
                    b2d oa:note \"two words\"@en .\n\
                    b2d oa:ref _:10 .\n";
        let triples = parse_ntriples(text).unwrap();
        let compact = to_compact(&triples, &PrefixTable::standard());
        assert!(compact.starts_with("0.4794646229033659 rdf:type qa:AnnotationOfSpotInstance ."));
        assert!(compact.contains("b2d oa:ref _:10 ."));
        assert_eq!(parse_ntriples(&compact).unwrap(), triples);
        assert_eq!(parse_ntriples(&to_ntriples(&triples)).unwrap(), triples);
    }

    #[test]
    fn skolem_round_trip() {
        for label in ["0.4794646229033659", "b2d50b76", "x/y#z", "ümlaut"] {
            let b = BlankNode::new(label).unwrap();
            assert_eq!(deskolemize(&skolem_iri(&b)), Some(b));
        }
        assert_eq!(deskolemize(&Iri::new("http://example.org/x").unwrap()), None);
    }
}
