//! Reads one component's annotations from a Qanary process triplestore.

use std::time::Duration;

use serde_json::Value;
use thiserror::Error;

use crate::model::{BlankNode, Iri, Literal, ModelError, Term, Triple, TripleSet, OA};
use crate::rdf::deskolemize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TriplestoreError {
    #[error("endpoint unreachable: {0}")]
    EndpointUnreachable(String),
    #[error("graph not found: {0}")]
    GraphNotFound(String),
    #[error("malformed result set: {0}")]
    MalformedResultSet(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Links followed from an annotation to its target, selector and body nodes.
const CLOSURE_LINKS: [&str; 3] = ["hasTarget", "hasSelector", "hasBody"];

/// SELECT over `graph` returning the annotations made by `component` together with
/// the nodes reachable from them in at most two target/selector/body links.
pub fn closure_query(graph: &Iri, component: &Iri) -> String {
    let links = CLOSURE_LINKS.iter().map(|l| format!("oa:{l}")).collect::<Vec<_>>().join(", ");
    format!(
        "PREFIX oa: <{OA}>
SELECT DISTINCT ?s ?p ?o
WHERE {{
  GRAPH <{graph}> {{
    {{
      ?s oa:annotatedBy <{component}> .
      ?s ?p ?o .
    }} UNION {{
      ?a oa:annotatedBy <{component}> .
      ?a ?l1 ?s .
      FILTER(?l1 IN ({links}))
      ?s ?p ?o .
    }} UNION {{
      ?a oa:annotatedBy <{component}> .
      ?a ?l1 ?m .
      ?m ?l2 ?s .
      FILTER(?l1 IN ({links}) && ?l2 IN ({links}))
      ?s ?p ?o .
    }}
  }}
}}
ORDER BY ?s ?p ?o"
    )
}

/// Stateless SPARQL protocol client.
#[derive(Clone, Debug)]
pub struct TriplestoreClient {
    endpoint: String,
    agent: ureq::Agent,
}

impl TriplestoreClient {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self::with_timeout(endpoint, Duration::from_secs(30))
    }

    pub fn with_timeout(endpoint: impl Into<String>, timeout: Duration) -> Self {
        Self { endpoint: endpoint.into(), agent: ureq::AgentBuilder::new().timeout(timeout).build() }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub fn select(&self, query: &str) -> Result<Value, TriplestoreError> {
        let response = self
            .agent
            .post(&self.endpoint)
            .set("Accept", "application/sparql-results+json")
            .send_form(&[("query", query)]);
        match response {
            Ok(r) => r.into_json().map_err(|e| TriplestoreError::MalformedResultSet(e.to_string())),
            Err(ureq::Error::Status(404, _)) => Err(TriplestoreError::GraphNotFound(self.endpoint.clone())),
            Err(ureq::Error::Status(status, r)) => Err(TriplestoreError::EndpointUnreachable(format!(
                "{} answered {status}: {}",
                self.endpoint,
                r.into_string().unwrap_or_default()
            ))),
            Err(e) => Err(TriplestoreError::EndpointUnreachable(format!("{}: {e}", self.endpoint))),
        }
    }

    pub fn fetch_component_output(&self, graph: &Iri, component: &Iri) -> Result<TripleSet, TriplestoreError> {
        let results = self.select(&closure_query(graph, component)).map_err(|e| match e {
            TriplestoreError::GraphNotFound(_) => TriplestoreError::GraphNotFound(graph.to_string()),
            other => other,
        })?;
        let triples = triples_from_results(&results)?;
        Ok(TripleSet::new(graph.clone(), component.clone(), triples)?)
    }
}

pub fn fetch_component_output(endpoint: &str, graph: &Iri, component: &Iri) -> Result<TripleSet, TriplestoreError> {
    TriplestoreClient::new(endpoint).fetch_component_output(graph, component)
}

/// Reads `?s ?p ?o` bindings from a SPARQL JSON result document. Skolem IRIs
/// become blank nodes again.
pub fn triples_from_results(results: &Value) -> Result<Vec<Triple>, TriplestoreError> {
    let malformed = |m: &str| TriplestoreError::MalformedResultSet(m.to_string());
    let bindings = results
        .pointer("/results/bindings")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("missing results.bindings"))?;
    let mut triples = Vec::with_capacity(bindings.len());
    for row in bindings {
        let term = |name: &str| -> Result<Term, TriplestoreError> {
            let cell = row.get(name).ok_or_else(|| malformed(&format!("row without ?{name}")))?;
            term_from_json(cell)
        };
        let predicate = match term("p")? {
            Term::Iri(iri) => iri,
            _ => return Err(malformed("predicate is not an IRI")),
        };
        triples.push(Triple::new(term("s")?, predicate, term("o")?)?);
    }
    Ok(triples)
}

fn term_from_json(cell: &Value) -> Result<Term, TriplestoreError> {
    let malformed = |m: String| TriplestoreError::MalformedResultSet(m);
    let kind = cell.get("type").and_then(Value::as_str).ok_or_else(|| malformed("term without type".into()))?;
    let value = cell.get("value").and_then(Value::as_str).ok_or_else(|| malformed("term without value".into()))?;
    match kind {
        "uri" => {
            let iri = Iri::new(value)?;
            Ok(deskolemize(&iri).map_or(Term::Iri(iri), Term::Blank))
        }
        "bnode" => Ok(Term::Blank(BlankNode::new(value)?)),
        "literal" | "typed-literal" => {
            let mut literal = match cell.get("datatype").and_then(Value::as_str) {
                Some(dt) => Literal::typed(value, Iri::new(dt)?),
                None => Literal::plain(value),
            };
            literal.language = cell.get("xml:lang").and_then(Value::as_str).map(str::to_string);
            Ok(Term::Literal(literal))
        }
        other => Err(malformed(format!("unknown term type {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn reads_bindings() {
        let doc = json!({"head": {"vars": ["s", "p", "o"]}, "results": {"bindings": [
            {"s": {"type": "uri", "value": format!("{}b1", crate::rdf::SKOLEM_BASE)},
             "p": {"type": "uri", "value": "http://www.w3.org/ns/openannotation/core/start"},
             "o": {"type": "literal", "value": "10", "datatype": "http://www.w3.org/2001/XMLSchema#integer"}},
            {"s": {"type": "bnode", "value": "x"},
             "p": {"type": "uri", "value": "http://ex/label"},
             "o": {"type": "literal", "value": "hi", "xml:lang": "en"}}
        ]}});
        let triples = triples_from_results(&doc).unwrap();
        assert_eq!(triples[0].subject(), &Term::Blank(BlankNode::new("b1").unwrap()));
        assert_eq!(triples[0].object().value(), "10");
        assert_eq!(triples[1].object().as_literal().unwrap().language.as_deref(), Some("en"));
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(triples_from_results(&json!({})), Err(TriplestoreError::MalformedResultSet(_))));
        let bad = json!({"results": {"bindings": [{"s": {"type": "uri", "value": "urn:a"}}]}});
        assert!(matches!(triples_from_results(&bad), Err(TriplestoreError::MalformedResultSet(_))));
    }

    #[test]
    fn unreachable_endpoint() {
        let client = TriplestoreClient::with_timeout("http://127.0.0.1:9/sparql", Duration::from_secs(2));
        let g = Iri::new("urn:graph:g").unwrap();
        let r = client.fetch_component_output(&g, &g);
        assert!(matches!(r, Err(TriplestoreError::EndpointUnreachable(_))));
    }

    #[test]
    fn query_mentions_graph_and_component() {
        let q = closure_query(&Iri::new("urn:graph:g").unwrap(), &Iri::new("urn:qanary:X").unwrap());
        assert!(q.contains("GRAPH <urn:graph:g>") && q.matches("<urn:qanary:X>").count() == 3);
    }
}
