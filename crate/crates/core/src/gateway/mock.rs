use std::collections::BTreeMap;
use std::path::Path;

use super::{prompt_hash, CompletionGateway, CompletionResult, GatewayError};
use crate::model::{Annotation, Iri, SubjectKind};
use crate::prompt::{example_header, extract_test_payload, PromptSpec};
use crate::rdf::{group_triples, parse_ntriples};
use crate::sparql::QueryRegistry;
use crate::template::{item_bindings, TemplateEngine};

const UNREADABLE: &str = "The provided data could not be interpreted.";

/// Offline gateway. Answers from a table keyed by prompt hash, and otherwise
/// (unless built with [`MockGateway::table_only`]) synthesizes an answer from the
/// prompt text alone, so equal prompts always produce equal completions.
#[derive(Clone, Debug, Default)]
pub struct MockGateway {
    table: BTreeMap<String, String>,
    synthesize: bool,
}

impl MockGateway {
    pub fn synthesizing() -> Self {
        Self { table: BTreeMap::new(), synthesize: true }
    }

    pub fn table_only(table: BTreeMap<String, String>) -> Self {
        Self { table, synthesize: false }
    }

    pub fn with_table(mut self, table: BTreeMap<String, String>) -> Self {
        self.table.extend(table);
        self
    }

    /// Reads a JSON object mapping prompt hashes to completion texts.
    pub fn load_table(path: &Path) -> Result<BTreeMap<String, String>, GatewayError> {
        let text = std::fs::read_to_string(path).map_err(|e| GatewayError::Audit(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| GatewayError::Audit(format!("{}: {e}", path.display())))
    }

    pub fn insert(&mut self, prompt_text: &str, response: impl Into<String>) {
        self.table.insert(prompt_hash(prompt_text), response.into());
    }

    pub fn table(&self) -> &BTreeMap<String, String> {
        &self.table
    }
}

impl CompletionGateway for MockGateway {
    fn complete(&self, prompt: &PromptSpec, model: &str) -> Result<CompletionResult, GatewayError> {
        let hash = prompt_hash(&prompt.text);
        let text = match self.table.get(&hash) {
            Some(text) => text.clone(),
            None if self.synthesize => synthesize(&prompt.text, &hash),
            None => return Err(GatewayError::NotRecorded(hash)),
        };
        Ok(CompletionResult { text, model_id: model.to_string(), latency_ms: 0, request_id: Some(format!("mock-{}", &hash[..16])) })
    }
}

/// Subject kind is read back from the prompt's own wording.
fn synthesize(prompt_text: &str, hash: &str) -> String {
    let draw = u64::from_str_radix(&hash[..16], 16).unwrap_or_default();
    if let Some(data) = extract_test_payload(SubjectKind::OutputData, prompt_text) {
        let shots = prompt_text.matches(example_header(SubjectKind::OutputData)).count() as u64;
        return synthesize_output(data, shots, draw).unwrap_or_else(|| UNREADABLE.to_string());
    }
    if let Some(query) = extract_test_payload(SubjectKind::InputData, prompt_text) {
        return QueryRegistry::standard()
            .classify(query)
            .ok()
            .and_then(|record| TemplateEngine::standard().input_text(record.key).ok())
            .unwrap_or_else(|| "The query retrieves data from the knowledge graph of the question answering process.".into());
    }
    UNREADABLE.to_string()
}

/// Starts from the template rendering and, for some draws, damages it the way
/// generated text tends to be damaged. More examples mean fewer damaged answers.
fn synthesize_output(data: &str, shots: u64, draw: u64) -> Option<String> {
    let triples = parse_ntriples(data).ok()?;
    let annotations = group_triples(&triples, None).ok()?.annotations;
    let first = annotations.first()?;
    let component = first.annotated_by.clone();
    let engine = TemplateEngine::standard();
    let graph = Iri::new("urn:graph:mock").ok()?;
    let target = (draw >> 16) as usize % annotations.len();

    let clean = draw % 12 < 5 + 2 * shots.min(2);
    let flaw = (draw >> 8) % 5;
    let mut items = Vec::with_capacity(annotations.len());
    for (i, a) in annotations.iter().enumerate() {
        let mut b = item_bindings(a);
        if !clean && (i == target || flaw == 4) {
            match flaw {
                0 | 4 => {
                    b.insert("start".into(), None);
                    b.insert("end".into(), None);
                }
                1 => {
                    b.insert("annotatedAt".into(), None);
                    b.insert("score".into(), None);
                }
                3 => damage_value(a, &mut b),
                _ => {}
            }
        }
        items.push(engine.render_item_with(a, &b).ok()?);
    }
    let mut text = engine.compose_output(&component, &graph, &annotations, &items).ok()?;
    if !clean && flaw == 2 {
        let n = annotations.len();
        text = text.replacen(&format!("added {n} annotation"), &format!("added {} annotation", n + 1), 1);
    }
    if !clean && flaw == 4 {
        text = text.replacen(&format!(" {component}"), "", 1);
    }
    Some(text)
}

fn damage_value(a: &Annotation, b: &mut crate::template::Bindings) {
    if let Some(score) = &a.score {
        let shifted = (score.value() * 0.5 * 1e4).round() / 1e4;
        b.insert("score".into(), Some(format!("{shifted}")));
    } else if let Some(selector) = a.selector {
        b.insert("start".into(), Some((selector.start + 3).to_string()));
        b.insert("end".into(), Some((selector.end + 3).to_string()));
    } else {
        b.insert("annotatedAt".into(), Some("1970-01-01T00:00:00Z".into()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::score_explanation;
    use crate::prompt::{build_input_prompt, build_output_prompt};
    use crate::model::InputQueryKey;

    const DATA: &str = "a1 rdf:type qa:AnnotationOfSpotInstance .\na1 oa:annotatedBy urn:qanary:TextRazor .\n\
                        a1 oa:annotatedAt \"2023-10-18T07:57:57.82089Z\"^^xsd:dateTime .\na1 oa:hasTarget t1 .\n\
                        t1 oa:hasSelector s1 .\ns1 oa:start 10 .\ns1 oa:end 16 .";

    #[test]
    fn deterministic_and_scoreable() {
        let gateway = MockGateway::synthesizing();
        let component = Iri::new("urn:qanary:TextRazor").unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for q in 0..40 {
            let data = DATA.replace("oa:end 16", &format!("oa:end {}", 16 + q));
            let annotations = group_triples(&parse_ntriples(&data).unwrap(), None).unwrap().annotations;
            let prompt = build_output_prompt(&[], &data, "q").unwrap();
            let first = gateway.complete(&prompt, "m").unwrap();
            assert_eq!(first, gateway.complete(&prompt, "m").unwrap());
            let score = score_explanation(&first.text, &component, &annotations).unwrap().score;
            seen.insert(score.q_e());
        }
        assert!(seen.len() > 1, "mock should produce both clean and damaged answers");
        assert!(seen.contains(&num_rational::Ratio::from_integer(6)), "{seen:?}");
    }

    #[test]
    fn table_lookup_precedes_synthesis() {
        let prompt = build_output_prompt(&[], DATA, "q").unwrap();
        let mut gateway = MockGateway::synthesizing();
        gateway.insert(&prompt.text, "recorded");
        assert_eq!(gateway.complete(&prompt, "m").unwrap().text, "recorded");
        let strict = MockGateway::table_only(BTreeMap::new());
        assert!(matches!(strict.complete(&prompt, "m"), Err(GatewayError::NotRecorded(_))));
    }

    #[test]
    fn input_prompts_get_fixed_text() {
        let entry = QueryRegistry::standard().entry(InputQueryKey::I1).unwrap();
        let prompt = build_input_prompt(&[], &entry.text, "urn:qanary:C").unwrap();
        let text = MockGateway::synthesizing().complete(&prompt, "m").unwrap().text;
        assert_eq!(text, TemplateEngine::standard().input_text(InputQueryKey::I1).unwrap());
    }
}
