use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ExperimentError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct QuestionDataset {
    pub questions: Vec<Question>,
    /// Questions that had no English text, with the language used instead.
    pub warnings: Vec<String>,
}

impl QuestionDataset {
    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }

    pub fn ids(&self) -> BTreeSet<&str> {
        self.questions.iter().map(|q| q.id.as_str()).collect()
    }
}

pub fn load_dataset(path: &Path) -> Result<QuestionDataset, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
    parse_dataset(&text)
}

/// Accepts the QALD layout (`{"questions": [{"id", "question": [{"language", "string"}]}]}`)
/// or a plain list of `{"id", "text"}` objects or bare strings.
pub fn parse_dataset(text: &str) -> Result<QuestionDataset, ExperimentError> {
    let parse_error = |m: String| ExperimentError::Parse(m);
    let root: Value = serde_json::from_str(text).map_err(|e| parse_error(e.to_string()))?;
    let mut dataset = QuestionDataset::default();
    match &root {
        Value::Object(map) => {
            let questions = map
                .get("questions")
                .and_then(Value::as_array)
                .ok_or_else(|| parse_error("expected a \"questions\" array".into()))?;
            for (n, entry) in questions.iter().enumerate() {
                let id = id_of(entry).ok_or_else(|| parse_error(format!("question {n} has no id")))?;
                let variants = entry
                    .get("question")
                    .and_then(Value::as_array)
                    .ok_or_else(|| parse_error(format!("question {id} has no language variants")))?;
                let text_of = |v: &Value| v.get("string").and_then(Value::as_str).map(str::to_string);
                let lang_of = |v: &Value| v.get("language").and_then(Value::as_str).unwrap_or("?").to_string();
                let english = variants.iter().find(|v| lang_of(v) == "en").and_then(text_of);
                let text = match english {
                    Some(text) => text,
                    None => {
                        let first = variants
                            .iter()
                            .find(|v| text_of(v).is_some())
                            .ok_or_else(|| parse_error(format!("question {id} has no text")))?;
                        let warning = format!("question {id} has no English text, using \"{}\"", lang_of(first));
                        tracing::warn!("{warning}");
                        dataset.warnings.push(warning);
                        text_of(first).unwrap_or_default()
                    }
                };
                dataset.questions.push(Question { id, text });
            }
        }
        Value::Array(items) => {
            for (n, item) in items.iter().enumerate() {
                let question = match item {
                    Value::String(text) => Question { id: (n + 1).to_string(), text: text.clone() },
                    Value::Object(_) => Question {
                        id: id_of(item).ok_or_else(|| parse_error(format!("entry {n} has no id")))?,
                        text: ["text", "question", "string"]
                            .iter()
                            .find_map(|k| item.get(*k).and_then(Value::as_str))
                            .ok_or_else(|| parse_error(format!("entry {n} has no text")))?
                            .to_string(),
                    },
                    _ => return Err(parse_error(format!("entry {n} is neither a string nor an object"))),
                };
                dataset.questions.push(question);
            }
        }
        _ => return Err(parse_error("expected an object or an array".into())),
    }
    if dataset.questions.is_empty() {
        return Err(ExperimentError::EmptyDataset);
    }
    let mut seen = BTreeSet::new();
    for q in &dataset.questions {
        if !seen.insert(q.id.as_str()) {
            return Err(parse_error(format!("duplicate question id {}", q.id)));
        }
    }
    Ok(dataset)
}

fn id_of(entry: &Value) -> Option<String> {
    match entry.get("id")? {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}
