//! Zero-, one- and two-shot prompts for LLM explanations.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use once_cell::sync::Lazy;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digest::{content_id, derive_seed};
use crate::model::{AnnotationKind, InputQueryKey, ModelError, SubjectKind};
use crate::sparql::normalize_query;

pub const MAX_SHOTS: usize = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("the data to explain is empty")]
    EmptyTestData,
    #[error("the query to explain is empty")]
    EmptyTestQuery,
    #[error("at most {MAX_SHOTS} examples fit a prompt, got {0}")]
    TooManyExamples(usize),
    #[error("example of kind {0} does not fit this prompt")]
    WrongExampleKind(ExampleKind),
    #[error("example pairs need raw data and an explanation")]
    EmptyExample,
    #[error("no example of kind {0} in the pool")]
    NoExampleForKind(ExampleKind),
}

/// What an example shows: an output annotation kind or an input query key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExampleKind {
    Output(AnnotationKind),
    Input(InputQueryKey),
}

impl ExampleKind {
    pub fn subject_kind(self) -> SubjectKind {
        match self {
            ExampleKind::Output(_) => SubjectKind::OutputData,
            ExampleKind::Input(_) => SubjectKind::InputData,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            ExampleKind::Output(k) => k.code(),
            ExampleKind::Input(k) => k.code(),
        }
    }
}

impl fmt::Display for ExampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ExampleKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<AnnotationKind>()
            .map(ExampleKind::Output)
            .or_else(|_| s.parse::<InputQueryKey>().map(ExampleKind::Input))
    }
}

impl Serialize for ExampleKind {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for ExampleKind {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<AnnotationKind> for ExampleKind {
    fn from(kind: AnnotationKind) -> Self {
        ExampleKind::Output(kind)
    }
}

impl From<InputQueryKey> for ExampleKind {
    fn from(key: InputQueryKey) -> Self {
        ExampleKind::Input(key)
    }
}

/// Raw data with the explanation shown for it in a prompt.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExamplePair {
    kind: ExampleKind,
    raw_data: String,
    explanation_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    question_id: Option<String>,
}

impl ExamplePair {
    pub fn new(
        kind: impl Into<ExampleKind>,
        raw_data: impl Into<String>,
        explanation_text: impl Into<String>,
        question_id: Option<String>,
    ) -> Result<Self, PromptError> {
        let (raw_data, explanation_text) = (raw_data.into(), explanation_text.into());
        if raw_data.trim().is_empty() || explanation_text.trim().is_empty() {
            return Err(PromptError::EmptyExample);
        }
        Ok(Self { kind: kind.into(), raw_data, explanation_text, question_id })
    }

    pub fn kind(&self) -> ExampleKind {
        self.kind
    }

    pub fn raw_data(&self) -> &str {
        &self.raw_data
    }

    pub fn explanation_text(&self) -> &str {
        &self.explanation_text
    }

    pub fn question_id(&self) -> Option<&str> {
        self.question_id.as_deref()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PromptSpec {
    pub text: String,
    pub shots: u8,
    pub subject_kind: SubjectKind,
    pub example_kinds: Vec<ExampleKind>,
    pub test_ref: String,
}

#[derive(Deserialize)]
struct Sections {
    context: String,
    example: String,
    task: String,
}

#[derive(Deserialize)]
struct PromptAssets {
    output: Sections,
    input: Sections,
}

static ASSETS: Lazy<PromptAssets> =
    Lazy::new(|| toml::from_str(include_str!("../../assets/prompts.toml")).expect("bundled prompt templates parse"));

pub fn output_closing() -> &'static str {
    ASSETS.output.task.lines().last().unwrap_or_default()
}

pub fn input_closing() -> &'static str {
    ASSETS.input.task.lines().last().unwrap_or_default()
}

/// Header line that opens every example block, for counting blocks in a prompt.
pub fn example_header(subject: SubjectKind) -> &'static str {
    let sections = match subject {
        SubjectKind::OutputData => &ASSETS.output,
        SubjectKind::InputData => &ASSETS.input,
    };
    let first = sections.example.lines().next().unwrap_or_default();
    first.split('"').next().unwrap_or(first)
}

/// The data or query a built prompt asks to explain, recovered from its text.
pub fn extract_test_payload(subject: SubjectKind, prompt_text: &str) -> Option<&str> {
    let (task, marker) = match subject {
        SubjectKind::OutputData => (&ASSETS.output.task, "<TASK_RDF_DATA_TEST>"),
        SubjectKind::InputData => (&ASSETS.input.task, "${TEST_QUERY}"),
    };
    let (before, after) = task.split_once(marker)?;
    let (head, lead) = match before.find("${") {
        Some(open) => (&before[..open], before.rsplit('}').next().unwrap_or_default()),
        None => (before, ""),
    };
    let task_start = prompt_text.rfind(head)?;
    let rest = &prompt_text[task_start + head.len()..];
    let data_start = rest.find(lead)? + lead.len();
    let data_end = rest.rfind(after)?;
    (data_start <= data_end).then(|| &rest[data_start..data_end])
}

/// Replaces `<NAME>` and `${NAME}` markers in one left-to-right pass; substituted
/// text is never rescanned and unknown markers are kept as they are.
pub fn substitute(template: &str, values: &HashMap<&str, &str>) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(idx) = rest.find(['<', '$']) {
        out.push_str(&rest[..idx]);
        let tail = &rest[idx..];
        let (open, close) = if tail.starts_with("${") { ("${", '}') } else { ("<", '>') };
        let marker = tail[open.len()..].find(close).map(|end| &tail[open.len()..open.len() + end]);
        match marker.filter(|m| !m.is_empty()).and_then(|m| values.get(m).map(|v| (m, v))) {
            Some((name, value)) => {
                out.push_str(value);
                rest = &tail[open.len() + name.len() + 1..];
            }
            None => {
                let ch = tail.chars().next().map_or(1, char::len_utf8);
                out.push_str(&tail[..ch]);
                rest = &tail[ch..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn assemble(sections: &Sections, blocks: Vec<String>, task: String) -> String {
    std::iter::once(sections.context.clone()).chain(blocks).chain(std::iter::once(task)).join("\n\n")
}

/// Prompt asking for an explanation of a component's output triples.
pub fn build_output_prompt(
    examples: &[ExamplePair],
    test_data: &str,
    question_id: &str,
) -> Result<PromptSpec, PromptError> {
    if examples.len() > MAX_SHOTS {
        return Err(PromptError::TooManyExamples(examples.len()));
    }
    let test_data = test_data.trim_end();
    if test_data.trim().is_empty() {
        return Err(PromptError::EmptyTestData);
    }
    let sections = &ASSETS.output;
    let mut blocks = Vec::with_capacity(examples.len());
    for example in examples {
        if example.kind.subject_kind() != SubjectKind::OutputData {
            return Err(PromptError::WrongExampleKind(example.kind));
        }
        let values = HashMap::from([
            ("QUESTION_ID_EXAMPLE", example.question_id.as_deref().unwrap_or_default()),
            ("EXAMPLE_EXPLANATION", example.explanation_text.trim_end()),
            ("EXAMPLE_RDF_DATA", example.raw_data.trim_end()),
        ]);
        blocks.push(substitute(&sections.example, &values));
    }
    let task = substitute(&sections.task, &HashMap::from([("TASK_RDF_DATA_TEST", test_data)]));
    Ok(PromptSpec {
        text: assemble(sections, blocks, task),
        shots: examples.len() as u8,
        subject_kind: SubjectKind::OutputData,
        example_kinds: examples.iter().map(|e| e.kind).collect(),
        test_ref: question_id.to_string(),
    })
}

/// Prompt asking for an explanation of a component's input query.
pub fn build_input_prompt(
    examples: &[ExamplePair],
    test_query: &str,
    component: &str,
) -> Result<PromptSpec, PromptError> {
    if examples.len() > MAX_SHOTS {
        return Err(PromptError::TooManyExamples(examples.len()));
    }
    let test_query = test_query.trim();
    if test_query.is_empty() {
        return Err(PromptError::EmptyTestQuery);
    }
    let sections = &ASSETS.input;
    let mut blocks = Vec::with_capacity(examples.len());
    for example in examples {
        if example.kind.subject_kind() != SubjectKind::InputData {
            return Err(PromptError::WrongExampleKind(example.kind));
        }
        let values = HashMap::from([
            ("EXAMPLE_QUERY", example.raw_data.trim()),
            ("EXAMPLE_EXPLANATION", example.explanation_text.trim()),
        ]);
        blocks.push(substitute(&sections.example, &values));
    }
    let task = substitute(&sections.task, &HashMap::from([("COMPONENT", component), ("TEST_QUERY", test_query)]));
    Ok(PromptSpec {
        text: assemble(sections, blocks, task),
        shots: examples.len() as u8,
        subject_kind: SubjectKind::InputData,
        example_kinds: examples.iter().map(|e| e.kind).collect(),
        test_ref: format!("q:{}", content_id(&[&normalize_query(test_query)])),
    })
}

/// One example per wanted kind, in the order of `wanted`.
///
/// Candidates of each kind are shuffled with a generator derived from `seed` and
/// the kind, so the choice is stable; a kind wanted twice yields distinct
/// examples while the pool has them.
pub fn select_examples(pool: &[ExamplePair], wanted: &[ExampleKind], seed: u64) -> Result<Vec<ExamplePair>, PromptError> {
    let mut shuffled: BTreeMap<ExampleKind, (Vec<&ExamplePair>, usize)> = BTreeMap::new();
    let mut picked = Vec::with_capacity(wanted.len());
    for &kind in wanted {
        let (candidates, cursor) = shuffled.entry(kind).or_insert_with(|| {
            let mut candidates: Vec<&ExamplePair> = pool.iter().filter(|e| e.kind == kind).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["examples", kind.code()]));
            candidates.shuffle(&mut rng);
            (candidates, 0)
        });
        if candidates.is_empty() {
            return Err(PromptError::NoExampleForKind(kind));
        }
        picked.push(candidates[*cursor % candidates.len()].clone());
        *cursor += 1;
    }
    Ok(picked)
}

/// Unordered selections with repetition of `shots` kinds.
pub fn kind_combinations<K: Clone>(kinds: &[K], shots: usize) -> Vec<Vec<K>> {
    if shots == 0 {
        return vec![Vec::new()];
    }
    kinds.iter().cloned().combinations_with_replacement(shots).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use AnnotationKind::*;

    fn output_example(kind: AnnotationKind, tag: &str) -> ExamplePair {
        ExamplePair::new(kind, format!("raw {tag} ."), format!("explained {tag}"), Some(format!("q-{tag}"))).unwrap()
    }

    #[test]
    fn payload_round_trip() {
        let p = build_output_prompt(&[output_example(Instance, "a")], "x oa:start 1 .\ny oa:end 2 .", "q").unwrap();
        assert_eq!(extract_test_payload(SubjectKind::OutputData, &p.text), Some("x oa:start 1 .\ny oa:end 2 ."));
        let p = build_input_prompt(&[], "SELECT ?x\nWHERE { ?x ?y ?z }", "urn:qanary:C").unwrap();
        assert_eq!(extract_test_payload(SubjectKind::InputData, &p.text), Some("SELECT ?x\nWHERE { ?x ?y ?z }"));
        assert_eq!(extract_test_payload(SubjectKind::InputData, "nothing"), None);
    }

    #[test]
    fn zero_shot_output_prompt() {
        let p = build_output_prompt(&[], "s oa:start 10 .\n", "q1").unwrap();
        assert!(!p.text.contains("For example"));
        assert!(p.text.ends_with("Don't introduce your answer and only return the result."));
        assert!(p.text.starts_with("Given the following context:\nHere, we consider"));
        assert_eq!(p.shots, 0);
    }

    #[test]
    fn example_blocks_in_order() {
        let examples = [output_example(Instance, "a"), output_example(Relation, "b")];
        let p = build_output_prompt(&examples, "test data", "q").unwrap();
        assert_eq!(p.text.matches(example_header(SubjectKind::OutputData)).count(), 2);
        let (a, b, t) = (p.text.find("explained a").unwrap(), p.text.find("explained b").unwrap(), p.text.find("test data").unwrap());
        assert!(a < b && b < t);
        assert!(p.text.find("raw a").unwrap() > a);
        assert!(p.text.contains("for the question \"q-a\" from the given raw data.\nThe example explanation:\nexplained a\nGiven raw data:\nraw a ."));
        assert_eq!(p.example_kinds, [ExampleKind::Output(Instance), ExampleKind::Output(Relation)]);
    }

    #[test]
    fn output_prompt_errors() {
        assert_eq!(build_output_prompt(&[], "  \n", "q"), Err(PromptError::EmptyTestData));
        let three = [output_example(Instance, "a"), output_example(Instance, "b"), output_example(Instance, "c")];
        assert_eq!(build_output_prompt(&three, "x", "q"), Err(PromptError::TooManyExamples(3)));
        assert_eq!(ExamplePair::new(Instance, "", "x", None), Err(PromptError::EmptyExample));
    }

    #[test]
    fn input_prompt() {
        let example = ExamplePair::new(InputQueryKey::I1, "SELECT ?a", "It selects.", None).unwrap();
        let p = build_input_prompt(&[example], "SELECT ?b", "NED-DBpediaSpotlight").unwrap();
        assert!(p.text.contains("Here's an example explanation:\nThe query:\nSELECT ?a\nThe example explanation:\n\"It selects.\""));
        assert!(p.text.contains("used by the component \"NED-DBpediaSpotlight\":\nSELECT ?b"));
        assert!(p.text.ends_with("Don't use more than 3 sentences."));
        assert_eq!(p, build_input_prompt(&[ExamplePair::new(InputQueryKey::I1, "SELECT ?a", "It selects.", None).unwrap()], "SELECT ?b", "NED-DBpediaSpotlight").unwrap());
        let zero = build_input_prompt(&[], "SELECT ?b", "X").unwrap();
        assert!(!zero.text.contains("Here's an example"));
        assert_eq!(build_input_prompt(&[], " ", "X"), Err(PromptError::EmptyTestQuery));
    }

    #[test]
    fn substitution_is_single_pass() {
        let values = HashMap::from([("A", "<B>"), ("B", "no")]);
        assert_eq!(substitute("x <A> ${B} <C> $5 <", &values), "x <B> no <C> $5 <");
    }

    #[test]
    fn combinations() {
        let kinds = AnnotationKind::ALL;
        assert_eq!(kind_combinations(&kinds, 2).len(), 10);
        assert_eq!(kind_combinations(&kinds, 1).len(), 4);
        assert_eq!(kind_combinations(&kinds, 0), vec![Vec::<AnnotationKind>::new()]);
    }

    #[test]
    fn seeded_selection() {
        let pool: Vec<_> = (0..5).map(|i| output_example(Instance, &i.to_string())).chain([output_example(Relation, "r")]).collect();
        let wanted = [ExampleKind::Output(Instance), ExampleKind::Output(Instance), ExampleKind::Output(Relation)];
        let first = select_examples(&pool, &wanted, 7).unwrap();
        assert_eq!(first, select_examples(&pool, &wanted, 7).unwrap());
        assert_ne!(first[0], first[1]);
        assert_eq!(first[2].kind(), ExampleKind::Output(Relation));
        assert_eq!(
            select_examples(&pool, &[ExampleKind::Output(SpotInstance)], 1),
            Err(PromptError::NoExampleForKind(ExampleKind::Output(SpotInstance)))
        );
    }
}
