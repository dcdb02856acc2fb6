use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::corpus::{components, graph_iri, load_corpus, synthesize_corpus, CorpusEntry};
use super::dataset::load_dataset;
use super::examples::{example_from_entry, input_examples, load_output_examples, prompt_data};
use super::plan::ExperimentPlan;
use super::ExperimentError;
use crate::digest::derive_seed;
use crate::eval::{aggregate, format_decimal, score_explanation, Evaluation, ExperimentMatrix, ScoredTrial};
use crate::gateway::{AuditingGateway, CompletionGateway};
use crate::model::{AnnotationKind, Explanation, SubjectKind, TripleSet};
use crate::prompt::{build_input_prompt, build_output_prompt, select_examples, ExampleKind, ExamplePair};
use crate::rdf::group_annotations;
use crate::template::TemplateEngine;
use crate::triplestore::TriplestoreClient;

/// How a run executes, as opposed to what it measures.
#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Trials in flight at once.
    pub concurrency: usize,
    /// Refetch each sampled output from this store instead of using the recorded copy.
    pub triplestore: Option<TriplestoreClient>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { concurrency: 4, triplestore: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialRecord {
    pub model_id: String,
    pub shots: u8,
    pub example_kinds: Vec<ExampleKind>,
    pub test_kind: ExampleKind,
    pub trial: usize,
    pub question_id: String,
    pub component: String,
    pub explanation: Option<Explanation>,
    pub evaluation: Option<Evaluation>,
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn status(&self) -> String {
        match (&self.error, &self.evaluation) {
            (Some(e), _) => format!("failed: {e}"),
            (None, Some(_)) => "ok".into(),
            (None, None) => "unscored".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub plan: ExperimentPlan,
    pub trials: Vec<TrialRecord>,
    pub matrix: ExperimentMatrix,
}

enum Subject<'a> {
    Output(&'a CorpusEntry),
    Input(String),
}

struct Instance<'a> {
    question_id: String,
    component: String,
    subject: Subject<'a>,
}

struct TrialSpec<'a> {
    model_id: &'a str,
    combo: &'a [ExampleKind],
    test_kind: ExampleKind,
    trial: usize,
    instance: &'a Instance<'a>,
    examples: Vec<ExamplePair>,
}

fn label(kinds: &[ExampleKind]) -> String {
    kinds.iter().map(|k| k.code()).collect::<Vec<_>>().join("+")
}

/// Runs every (model, example combination, test kind) cell of the plan.
pub fn run(plan: &ExperimentPlan, gateway: &dyn CompletionGateway, options: &RunOptions) -> Result<RunReport, ExperimentError> {
    plan.validate()?;
    let engine = TemplateEngine::standard();
    let dataset = plan.dataset_path.as_deref().map(load_dataset).transpose()?;
    let corpus = match (&plan.corpus_path, &dataset) {
        (Some(path), _) => load_corpus(path)?,
        (None, Some(d)) => synthesize_corpus(d, plan.seed),
        (None, None) if plan.subject_kind == SubjectKind::InputData => Vec::new(),
        (None, None) => return Err(ExperimentError::InvalidPlan("a corpusPath or datasetPath is required".into())),
    };
    let known = dataset.as_ref().map(|d| d.ids());
    let corpus: Vec<CorpusEntry> = corpus
        .into_iter()
        .filter(|e| known.as_ref().is_none_or(|ids| ids.contains(e.question_id.as_str())))
        .collect();

    let pool = match plan.subject_kind {
        SubjectKind::OutputData => match &plan.examples_path {
            Some(dir) => load_output_examples(dir, engine)?,
            None => corpus.iter().map(|e| example_from_entry(e, engine)).collect::<Result<_, _>>()?,
        },
        SubjectKind::InputData => input_examples(engine)?,
    };
    let combos = plan.combos();
    for kind in combos.iter().flatten() {
        if !pool.iter().any(|e| e.kind() == *kind) {
            return Err(ExperimentError::PlanInfeasible(format!("no example of kind {kind}")));
        }
    }

    let instances = instances(plan, &corpus, dataset.as_ref().map(|d| d.questions.iter().map(|q| q.id.clone()).collect()));
    let mut specs = Vec::new();
    for combo in &combos {
        for test_kind in plan.tests() {
            let candidates = instances.get(&test_kind).map(Vec::as_slice).unwrap_or_default();
            if candidates.len() < plan.trials_per_cell {
                return Err(ExperimentError::DatasetTooSmall {
                    kind: test_kind.to_string(),
                    available: candidates.len(),
                    needed: plan.trials_per_cell,
                });
            }
            let mut order: Vec<&Instance> = candidates.iter().collect();
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(plan.seed, &["instances", &label(combo), test_kind.code()]));
            order.shuffle(&mut rng);
            for (trial, instance) in order.into_iter().take(plan.trials_per_cell).enumerate() {
                let own: Vec<ExamplePair> =
                    pool.iter().filter(|e| e.question_id() != Some(instance.question_id.as_str())).cloned().collect();
                let usable = if combo.iter().all(|k| own.iter().any(|e| e.kind() == *k)) { &own } else { &pool };
                let seed = derive_seed(plan.seed, &["examples", &label(combo), test_kind.code(), &trial.to_string()]);
                let examples = select_examples(usable, combo, seed).map_err(|e| ExperimentError::PlanInfeasible(e.to_string()))?;
                for model_id in &plan.model_ids {
                    specs.push(TrialSpec { model_id, combo, test_kind, trial, instance, examples: examples.clone() });
                }
            }
        }
    }
    specs.sort_by(|a, b| {
        (a.model_id, a.combo, a.test_kind, a.trial).cmp(&(b.model_id, b.combo, b.test_kind, b.trial))
    });

    let threads = rayon::ThreadPoolBuilder::new()
        .num_threads(options.concurrency.max(1))
        .build()
        .map_err(|e| ExperimentError::Io(e.to_string()))?;
    let trials: Vec<TrialRecord> =
        threads.install(|| specs.par_iter().map(|spec| run_trial(plan, spec, gateway, options)).collect());

    let scored: Vec<ScoredTrial> = trials
        .iter()
        .filter_map(|t| {
            let output = |k: &ExampleKind| match k {
                ExampleKind::Output(kind) => Some(*kind),
                ExampleKind::Input(_) => None,
            };
            Some(ScoredTrial {
                example_kinds: t.example_kinds.iter().map(output).collect::<Option<Vec<AnnotationKind>>>()?,
                test_kind: output(&t.test_kind)?,
                model_id: t.model_id.clone(),
                score: t.evaluation.as_ref().map(|e| e.score.clone()),
            })
        })
        .collect();
    Ok(RunReport { plan: plan.clone(), trials, matrix: aggregate(&scored) })
}

fn instances<'a>(
    plan: &ExperimentPlan,
    corpus: &'a [CorpusEntry],
    question_ids: Option<Vec<String>>,
) -> BTreeMap<ExampleKind, Vec<Instance<'a>>> {
    let mut by_kind: BTreeMap<ExampleKind, Vec<Instance>> = BTreeMap::new();
    match plan.subject_kind {
        SubjectKind::OutputData => {
            for entry in corpus {
                by_kind.entry(ExampleKind::Output(entry.kind)).or_default().push(Instance {
                    question_id: entry.question_id.clone(),
                    component: entry.set.component().to_string(),
                    subject: Subject::Output(entry),
                });
            }
        }
        SubjectKind::InputData => {
            let ids = question_ids.unwrap_or_else(|| {
                let mut ids: Vec<String> = corpus.iter().map(|e| e.question_id.clone()).collect();
                ids.dedup();
                ids
            });
            let all: Vec<&str> = AnnotationKind::ALL.iter().flat_map(|k| components(*k).iter().copied()).collect();
            for entry in TemplateEngine::standard().queries().entries() {
                let original = crate::sparql::QueryRegistry::standard().classify(&entry.text).ok().and_then(|r| r.graph);
                for id in &ids {
                    let graph = graph_iri(plan.seed, id);
                    let query = match &original {
                        Some(g) => entry.text.replace(g.as_str(), graph.as_str()),
                        None => entry.text.clone(),
                    };
                    let pick = derive_seed(plan.seed, &["consumer", entry.key.code(), id]) as usize % all.len();
                    by_kind.entry(ExampleKind::Input(entry.key)).or_default().push(Instance {
                        question_id: id.clone(),
                        component: format!("urn:qanary:{}", all[pick]),
                        subject: Subject::Input(query),
                    });
                }
            }
        }
    }
    by_kind
}

fn run_trial(plan: &ExperimentPlan, spec: &TrialSpec, gateway: &dyn CompletionGateway, options: &RunOptions) -> TrialRecord {
    let mut record = TrialRecord {
        model_id: spec.model_id.to_string(),
        shots: plan.shots,
        example_kinds: spec.combo.to_vec(),
        test_kind: spec.test_kind,
        trial: spec.trial,
        question_id: spec.instance.question_id.clone(),
        component: spec.instance.component.clone(),
        explanation: None,
        evaluation: None,
        error: None,
    };
    if let Err(e) = complete_trial(spec, gateway, options, &mut record) {
        record.error = Some(e);
    }
    record
}

fn complete_trial(
    spec: &TrialSpec,
    gateway: &dyn CompletionGateway,
    options: &RunOptions,
    record: &mut TrialRecord,
) -> Result<(), String> {
    match &spec.instance.subject {
        Subject::Output(entry) => {
            let fetched;
            let (set, annotations): (&TripleSet, _) = match &options.triplestore {
                Some(client) => {
                    fetched = client
                        .fetch_component_output(entry.set.graph(), entry.set.component())
                        .map_err(|e| e.to_string())?;
                    let annotations = group_annotations(&fetched).map_err(|e| e.to_string())?.annotations;
                    (&fetched, annotations)
                }
                None => (&entry.set, entry.annotations.clone()),
            };
            let data = prompt_data(&CorpusEntry { kind: entry.kind, question_id: entry.question_id.clone(), set: set.clone(), annotations: annotations.clone() });
            let prompt = build_output_prompt(&spec.examples, &data, &entry.question_id).map_err(|e| e.to_string())?;
            let completion = gateway.complete(&prompt, spec.model_id).map_err(|e| e.to_string())?;
            let evaluation = score_explanation(&completion.text, set.component(), &annotations).map_err(|e| e.to_string())?;
            record.explanation = Some(Explanation::from_llm(
                SubjectKind::OutputData,
                completion.text,
                crate::template::output_source_ref(set),
                completion.model_id,
                prompt.text,
                prompt.shots,
            ));
            record.evaluation = Some(evaluation);
        }
        Subject::Input(query) => {
            let prompt = build_input_prompt(&spec.examples, query, &spec.instance.component).map_err(|e| e.to_string())?;
            let completion = gateway.complete(&prompt, spec.model_id).map_err(|e| e.to_string())?;
            record.explanation = Some(Explanation::from_llm(
                SubjectKind::InputData,
                completion.text,
                prompt.test_ref.clone(),
                completion.model_id,
                prompt.text,
                prompt.shots,
            ));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ChecksColumn<'a> {
    prefix: &'a [crate::eval::ValueCheck],
    annotations: Vec<&'a [crate::eval::ValueCheck]>,
}

pub fn trials_csv(trials: &[TrialRecord]) -> Result<String, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| ExperimentError::Io(e.to_string());
    w.write_record([
        "questionId", "component", "exampleKinds", "testKind", "model", "shots", "prefixRating", "annotationRatings", "qE",
        "checks", "status",
    ])
    .map_err(csv_err)?;
    for t in trials {
        let (prefix, ratings, q_e, checks) = match &t.evaluation {
            Some(e) => (
                e.prefix.rating.to_string(),
                e.annotations.iter().map(|a| a.rating.to_string()).collect::<Vec<_>>().join(";"),
                e.score.q_e().to_string(),
                serde_json::to_string(&ChecksColumn {
                    prefix: &e.prefix.checks,
                    annotations: e.annotations.iter().map(|a| a.checks.as_slice()).collect(),
                })
                .map_err(|e| ExperimentError::Io(e.to_string()))?,
            ),
            None => Default::default(),
        };
        w.write_record([
            t.question_id.as_str(),
            &t.component,
            &label(&t.example_kinds),
            t.test_kind.code(),
            &t.model_id,
            &t.shots.to_string(),
            &prefix,
            &ratings,
            &q_e,
            &checks,
            &t.status(),
        ])
        .map_err(csv_err)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| ExperimentError::Io(e.to_string()))?).map_err(|e| ExperimentError::Io(e.to_string()))
}

/// One row per (model, example combination): cell means per test kind, then the row mean.
pub fn matrix_csv(plan: &ExperimentPlan, matrix: &ExperimentMatrix) -> Result<String, ExperimentError> {
    let tests: Vec<AnnotationKind> = plan
        .tests()
        .into_iter()
        .filter_map(|k| match k {
            ExampleKind::Output(kind) => Some(kind),
            ExampleKind::Input(_) => None,
        })
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| ExperimentError::Io(e.to_string());
    let mut header = vec!["model".to_string(), "exampleKinds".to_string()];
    header.extend(tests.iter().map(|k| k.code().to_string()));
    header.push("mean".into());
    w.write_record(&header).map_err(csv_err)?;
    let fmt = |v: &Option<num_rational::BigRational>| v.as_ref().map(|v| format_decimal(v, 2)).unwrap_or_default();
    for marginal in &matrix.marginals {
        let mut row = vec![marginal.model_id.clone(), marginal.example_kinds.iter().map(|k| k.code()).collect::<Vec<_>>().join("+")];
        for test in &tests {
            row.push(matrix.cell(&marginal.model_id, &marginal.example_kinds, *test).map(|c| fmt(&c.mean_q_e)).unwrap_or_default());
        }
        row.push(fmt(&marginal.mean));
        w.write_record(&row).map_err(csv_err)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| ExperimentError::Io(e.to_string()))?).map_err(|e| ExperimentError::Io(e.to_string()))
}

/// Writes `trials.csv`, `matrix.csv`, `matrix.json` and `explanations.ndjson`.
pub fn write_reports(dir: &Path, report: &RunReport) -> Result<(), ExperimentError> {
    let io = |e: std::io::Error| ExperimentError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join("trials.csv"), trials_csv(&report.trials)?).map_err(io)?;
    std::fs::write(dir.join("matrix.csv"), matrix_csv(&report.plan, &report.matrix)?).map_err(io)?;
    let json = serde_json::to_string_pretty(&report.matrix).map_err(|e| ExperimentError::Io(e.to_string()))?;
    std::fs::write(dir.join("matrix.json"), json + "\n").map_err(io)?;
    let mut lines = String::new();
    for e in report.trials.iter().filter_map(|t| t.explanation.as_ref()) {
        lines.push_str(&serde_json::to_string(e).map_err(|e| ExperimentError::Io(e.to_string()))?);
        lines.push('\n');
    }
    std::fs::write(dir.join("explanations.ndjson"), lines).map_err(io)
}

/// [`run`] with every completion recorded in `<out>/audit.ndjson`, then [`write_reports`].
pub fn run_to_directory<G: CompletionGateway>(
    plan: &ExperimentPlan,
    gateway: G,
    options: &RunOptions,
    out: &Path,
) -> Result<RunReport, ExperimentError> {
    let io = |e: std::io::Error| ExperimentError::Io(format!("{}: {e}", out.display()));
    std::fs::create_dir_all(out).map_err(io)?;
    let audit = out.join("audit.ndjson");
    std::fs::write(&audit, "").map_err(io)?;
    let gateway = AuditingGateway::to_file(gateway, &audit).map_err(|e| ExperimentError::Io(e.to_string()))?;
    let report = run(plan, &gateway, options)?;
    write_reports(out, &report)?;
    Ok(report)
}
