//! Recorded component outputs, stored as one N-Triples file per
//! `<KIND>/<component>/<question>.nt` with `# graph:`, `# component:` and
//! `# question:` header comments.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::QuestionDataset;
use super::ExperimentError;
use crate::digest::{content_id, derive_seed};
use crate::model::{Annotation, AnnotationKind, BlankNode, Iri, Literal, Term, Triple, TripleSet, OA, QA, RDF, XSD};
use crate::rdf::{group_annotations, parse_ntriples, to_ntriples};

/// Components whose recorded outputs make up the corpus, per annotation kind.
pub fn components(kind: AnnotationKind) -> &'static [&'static str] {
    match kind {
        AnnotationKind::Instance => &["NED-DBpediaSpotlight", "NED-Dandelion", "NED-Ontotext", "NED-TagMe"],
        AnnotationKind::SpotInstance => &["NER-DBpediaSpotlight", "TagMeNER", "TextRazor", "DandelionNER"],
        AnnotationKind::Relation => &["REL-Python-Falcon", "DiambiguationProperty-OKBQA"],
        AnnotationKind::AnswerSparql => &["SINA", "QAnswerQueryBuilderAndQueryCandidateFetcher", "PlatypusQueryBuilder"],
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    pub kind: AnnotationKind,
    pub question_id: String,
    pub set: TripleSet,
    pub annotations: Vec<Annotation>,
}

impl CorpusEntry {
    pub fn new(kind: AnnotationKind, question_id: impl Into<String>, set: TripleSet) -> Result<Self, ExperimentError> {
        let question_id = question_id.into();
        let annotations = group_annotations(&set)
            .map_err(|e| ExperimentError::Corpus(format!("question {question_id}: {e}")))?
            .annotations;
        if let Some(other) = annotations.iter().find(|a| a.kind != kind) {
            return Err(ExperimentError::Corpus(format!(
                "question {question_id}: {} annotation filed under {}",
                other.kind.code(),
                kind.code()
            )));
        }
        Ok(Self { kind, question_id, set, annotations })
    }

    pub fn relative_path(&self) -> PathBuf {
        let component = self.set.component().local_name().to_string();
        PathBuf::from(self.kind.code()).join(component).join(format!("{}.nt", self.question_id))
    }

    pub fn to_file_text(&self) -> String {
        format!(
            "# graph: {}\n# component: {}\n# question: {}\n{}",
            self.set.graph(),
            self.set.component(),
            self.question_id,
            to_ntriples(self.set.triples())
        )
    }
}

fn header<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .take_while(|l| l.starts_with('#') || l.trim().is_empty())
        .find_map(|l| l.trim_start_matches('#').trim().strip_prefix(key)?.strip_prefix(':').map(str::trim))
}

/// Reads one corpus file. The kind comes from the caller, the rest from the header.
pub fn read_entry(kind: AnnotationKind, text: &str, origin: &str) -> Result<CorpusEntry, ExperimentError> {
    let err = |m: String| ExperimentError::Corpus(format!("{origin}: {m}"));
    let field = |key: &str| header(text, key).ok_or_else(|| err(format!("missing \"# {key}:\" header")));
    let graph = Iri::new(field("graph")?).map_err(|e| err(e.to_string()))?;
    let component = Iri::new(field("component")?).map_err(|e| err(e.to_string()))?;
    let question = field("question")?.to_string();
    let triples = parse_ntriples(text).map_err(|e| err(e.to_string()))?;
    let set = TripleSet::new(graph, component, triples).map_err(|e| err(e.to_string()))?;
    CorpusEntry::new(kind, question, set)
}

fn sorted_children(dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    let io = |e: std::io::Error| ExperimentError::Io(format!("{}: {e}", dir.display()));
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir).map_err(io)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    Ok(paths)
}

/// Every entry under `dir`, in path order.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, ExperimentError> {
    let mut entries = Vec::new();
    for kind in AnnotationKind::ALL {
        let kind_dir = dir.join(kind.code());
        if !kind_dir.is_dir() {
            continue;
        }
        for component_dir in sorted_children(&kind_dir)?.into_iter().filter(|p| p.is_dir()) {
            for file in sorted_children(&component_dir)? {
                if file.extension().is_some_and(|e| e == "nt") {
                    let text = std::fs::read_to_string(&file)
                        .map_err(|e| ExperimentError::Io(format!("{}: {e}", file.display())))?;
                    entries.push(read_entry(kind, &text, &file.display().to_string())?);
                }
            }
        }
    }
    Ok(entries)
}

pub fn write_corpus(dir: &Path, entries: &[CorpusEntry]) -> Result<(), ExperimentError> {
    for entry in entries {
        let path = dir.join(entry.relative_path());
        let io = |e: std::io::Error| ExperimentError::Io(format!("{}: {e}", path.display()));
        std::fs::create_dir_all(path.parent().expect("entry paths have parents")).map_err(io)?;
        std::fs::write(&path, entry.to_file_text()).map_err(io)?;
    }
    Ok(())
}

/// Words of the question with their character offsets, end exclusive.
fn spans(text: &str) -> Vec<(String, usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_alphanumeric() {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '-' || chars[i] == '\'') {
                i += 1;
            }
            out.push((chars[start..i].iter().collect(), start, i));
        } else {
            i += 1;
        }
    }
    out
}

/// Entity-like words first: capitalised words past the first, then long words.
fn candidate_spans(text: &str) -> Vec<(String, usize, usize)> {
    let all = spans(text);
    let mut picked: Vec<_> =
        all.iter().skip(1).filter(|(w, _, _)| w.chars().next().is_some_and(char::is_uppercase)).cloned().collect();
    for span in all.iter().filter(|(w, _, _)| w.chars().count() >= 5) {
        if !picked.contains(span) {
            picked.push(span.clone());
        }
    }
    if picked.is_empty() {
        picked.extend(all.into_iter().take(1));
    }
    picked
}

fn timestamp(rng: &mut ChaCha8Rng) -> String {
    let base = chrono::DateTime::parse_from_rfc3339("2023-10-18T07:00:00Z").expect("valid base time").to_utc();
    let at = base
        + chrono::Duration::seconds(rng.gen_range(0..86_400 * 30))
        + chrono::Duration::microseconds(rng.gen_range(1..1_000_000));
    let text = at.format("%Y-%m-%dT%H:%M:%S%.6f").to_string();
    format!("{}Z", text.trim_end_matches('0'))
}

pub(crate) fn graph_iri(seed: u64, question_id: &str) -> Iri {
    let h = content_id(&[&seed.to_string(), question_id]);
    Iri::new(format!("urn:graph:{}-{}-{}-{}-{}", &h[..8], &h[8..12], &h[12..16], &h[16..20], &h[20..32])).expect("valid graph IRI")
}

fn resource_name(word: &str) -> String {
    let mut chars = word.chars();
    chars.next().map(|c| c.to_uppercase().chain(chars).collect()).unwrap_or_default()
}

/// Builds a plausible recorded output for every question and kind. Each question
/// is answered by one component per kind, chosen from the seed.
pub fn synthesize_corpus(dataset: &QuestionDataset, seed: u64) -> Vec<CorpusEntry> {
    let mut entries = Vec::new();
    for kind in AnnotationKind::ALL {
        for question in &dataset.questions {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["corpus", kind.code(), &question.id]));
            let names = components(kind);
            let component = Iri::new(format!("urn:qanary:{}", names[rng.gen_range(0..names.len())])).expect("valid component IRI");
            let graph = graph_iri(seed, &question.id);
            let triples = synthesize_output(kind, &component, &question.id, &question.text, &mut rng);
            let set = TripleSet::new(graph, component, triples).expect("synthesized attribution is consistent");
            entries.push(CorpusEntry::new(kind, question.id.clone(), set).expect("synthesized output groups"));
        }
    }
    entries
}

fn synthesize_output(kind: AnnotationKind, component: &Iri, question_id: &str, text: &str, rng: &mut ChaCha8Rng) -> Vec<Triple> {
    let iri = |s: String| Iri::new(s).expect("valid IRI");
    let tag = kind.code().to_lowercase();
    let blank = |s: String| Term::Blank(BlankNode::new(format!("{tag}{s}")).expect("valid label"));
    let typed = |v: String, dt: &str| Term::Literal(Literal::typed(v, iri(format!("{XSD}{dt}"))));
    let question = Term::Iri(iri(format!("http://qanary.local/question/stored-question__text_{question_id}")));
    let candidates = candidate_spans(text);
    let wanted = match rng.gen_range(0..10) {
        0..=4 => 1,
        5..=7 => 2,
        _ => 3,
    };
    let count = wanted.min(candidates.len()).max(1);
    let has_score = !matches!(component.local_name(), "TextRazor" | "NER-DBpediaSpotlight");

    let mut triples = Vec::new();
    let mut push = |s: Term, p: String, o: Term| triples.push(Triple::new(s, iri(p), o).expect("valid triple"));
    for i in 0..count {
        let (word, start, end) = candidates[i % candidates.len()].clone();
        let a = blank(format!("a{i}"));
        push(a.clone(), format!("{RDF}type"), Term::Iri(kind.class_iri()));
        let with_selector = matches!(kind, AnnotationKind::Instance | AnnotationKind::SpotInstance)
            || (kind == AnnotationKind::Relation && rng.gen_bool(0.5));
        if with_selector {
            let (t, s) = (blank(format!("t{i}")), blank(format!("s{i}")));
            push(a.clone(), format!("{OA}hasTarget"), t.clone());
            push(t.clone(), format!("{RDF}type"), Term::Iri(iri(format!("{OA}SpecificResource"))));
            push(t.clone(), format!("{OA}hasSource"), question.clone());
            push(t, format!("{OA}hasSelector"), s.clone());
            push(s.clone(), format!("{RDF}type"), Term::Iri(iri(format!("{OA}TextPositionSelector"))));
            push(s.clone(), format!("{OA}start"), typed(start.to_string(), "nonNegativeInteger"));
            push(s, format!("{OA}end"), typed(end.to_string(), "nonNegativeInteger"));
        } else {
            push(a.clone(), format!("{OA}hasTarget"), question.clone());
        }
        match kind {
            AnnotationKind::Instance => {
                push(a.clone(), format!("{OA}hasBody"), Term::Iri(iri(format!("http://dbpedia.org/resource/{}", resource_name(&word)))));
            }
            AnnotationKind::Relation => {
                push(a.clone(), format!("{OA}hasBody"), Term::Iri(iri(format!("http://dbpedia.org/ontology/{}", word.to_lowercase()))));
            }
            AnnotationKind::AnswerSparql => {
                let query = format!(
                    "SELECT ?answer WHERE {{ <http://dbpedia.org/resource/{}> <http://dbpedia.org/ontology/{}> ?answer . }}",
                    resource_name(&word),
                    ["birthPlace", "author", "capital", "director", "population"][rng.gen_range(0..5)]
                );
                push(a.clone(), format!("{OA}hasBody"), typed(query, "string"));
            }
            AnnotationKind::SpotInstance => {}
        }
        if has_score {
            let score: f64 = rng.gen_range(0.05..1.0);
            push(a.clone(), format!("{QA}score"), typed(format!("{score}"), "double"));
        }
        push(a.clone(), format!("{OA}annotatedBy"), Term::Iri(component.clone()));
        push(a, format!("{OA}annotatedAt"), typed(timestamp(rng), "dateTime"));
    }
    triples
}
