//! Example pools for few-shot prompts.

use std::path::Path;

use super::corpus::{load_corpus, CorpusEntry};
use super::ExperimentError;
use crate::model::PrefixTable;
use crate::prompt::ExamplePair;
use crate::rdf::to_compact;
use crate::template::TemplateEngine;

/// The abbreviated triple listing used as raw data in prompts.
pub fn prompt_data(entry: &CorpusEntry) -> String {
    to_compact(entry.set.triples(), &PrefixTable::standard())
}

/// An output example whose explanation is the template rendering of the entry.
pub fn example_from_entry(entry: &CorpusEntry, engine: &TemplateEngine) -> Result<ExamplePair, ExperimentError> {
    let text = engine
        .render_output(entry.set.component(), entry.set.graph(), &entry.annotations)
        .map_err(|e| ExperimentError::Corpus(format!("question {}: {e}", entry.question_id)))?;
    ExamplePair::new(entry.kind, prompt_data(entry), text, Some(entry.question_id.clone()))
        .map_err(|e| ExperimentError::Corpus(e.to_string()))
}

/// Reads example outputs stored in the corpus layout. A `.txt` file next to an
/// example supplies its explanation; otherwise the template rendering is used.
pub fn load_output_examples(dir: &Path, engine: &TemplateEngine) -> Result<Vec<ExamplePair>, ExperimentError> {
    let mut pool = Vec::new();
    for entry in load_corpus(dir)? {
        let sidecar = dir.join(entry.relative_path()).with_extension("txt");
        let example = match std::fs::read_to_string(&sidecar) {
            Ok(explanation) => {
                ExamplePair::new(entry.kind, prompt_data(&entry), explanation.trim_end(), Some(entry.question_id.clone()))
                    .map_err(|e| ExperimentError::Corpus(format!("{}: {e}", sidecar.display())))?
            }
            Err(_) => example_from_entry(&entry, engine)?,
        };
        pool.push(example);
    }
    Ok(pool)
}

/// One example per registered input query: the query and its fixed explanation.
pub fn input_examples(engine: &TemplateEngine) -> Result<Vec<ExamplePair>, ExperimentError> {
    engine
        .queries()
        .entries()
        .iter()
        .map(|entry| {
            let text = engine.input_text(entry.key).map_err(|e| ExperimentError::Corpus(e.to_string()))?;
            ExamplePair::new(entry.key, entry.text.clone(), text, None).map_err(|e| ExperimentError::Corpus(e.to_string()))
        })
        .collect()
}

const BUILTIN_QUESTIONS: [&str; 8] = [
    "Which composer wrote The Magic Flute?",
    "What is the capital of Italy?",
    "Who founded the city of Alexandria?",
    "Which river flows through Vienna?",
    "Who wrote War and Peace?",
    "Where is the Louvre located?",
    "When was Isaac Newton born?",
    "Which company developed Windows?",
];

/// Output examples synthesized from a fixed question list, for use when no pool is configured.
pub fn builtin_output_examples(engine: &TemplateEngine) -> Vec<ExamplePair> {
    let dataset = super::QuestionDataset {
        questions: BUILTIN_QUESTIONS
            .iter()
            .enumerate()
            .map(|(i, text)| super::Question { id: format!("ex{}", i + 1), text: text.to_string() })
            .collect(),
        warnings: Vec::new(),
    };
    super::synthesize_corpus(&dataset, 0)
        .iter()
        .map(|e| example_from_entry(e, engine).expect("synthesized examples render"))
        .collect()
}
