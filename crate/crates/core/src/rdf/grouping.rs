use std::collections::{HashMap, HashSet};

use crate::model::{Annotation, AnnotationKind, Decimal, Iri, Selector, Term, Triple, TripleSet, OA, QA, RDF};

use super::{ParseDiagnostic, RdfError};

/// Annotations recovered from a triple set, with the non-fatal problems met on the way.
#[derive(Clone, Debug, PartialEq)]
pub struct Grouping {
    pub annotations: Vec<Annotation>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

pub fn classify_kind(class: &Iri) -> Result<AnnotationKind, RdfError> {
    AnnotationKind::from_class_iri(class).ok_or_else(|| RdfError::UnknownAnnotationClass(class.clone()))
}

pub fn group_annotations(set: &TripleSet) -> Result<Grouping, RdfError> {
    group_triples(set.triples(), Some(set.component()))
}

struct Index<'a> {
    by_subject: HashMap<&'a Term, Vec<(usize, &'a Triple)>>,
}

impl<'a> Index<'a> {
    fn new(triples: &'a [Triple]) -> Self {
        let mut by_subject: HashMap<&Term, Vec<(usize, &Triple)>> = HashMap::new();
        for (i, t) in triples.iter().enumerate() {
            by_subject.entry(t.subject()).or_default().push((i + 1, t));
        }
        Self { by_subject }
    }

    fn objects(&self, subject: &Term, predicate: &str) -> impl Iterator<Item = &'a Term> + '_ {
        let predicate = predicate.to_string();
        self.by_subject
            .get(subject)
            .into_iter()
            .flatten()
            .filter(move |(_, t)| t.predicate().as_str() == predicate)
            .map(|(_, t)| t.object())
    }

    fn first(&self, subject: &Term, predicate: &str) -> Option<&'a Term> {
        self.objects(subject, predicate).next()
    }

    fn contains(&self, subject: &Term) -> bool {
        self.by_subject.contains_key(subject)
    }
}

/// Groups triples into annotations, one per subject typed with a registered
/// annotation class, in order of the subject's first appearance.
///
/// `default_component` fills in `annotatedBy` when a subject lacks the statement.
pub fn group_triples(triples: &[Triple], default_component: Option<&Iri>) -> Result<Grouping, RdfError> {
    let rdf_type = format!("{RDF}type");
    let index = Index::new(triples);

    let mut typed: Vec<(&Term, AnnotationKind, usize)> = Vec::new();
    let mut seen = HashSet::new();
    for (i, t) in triples.iter().enumerate() {
        if t.predicate().as_str() != rdf_type {
            continue;
        }
        let Some(kind) = t.object().as_iri().and_then(AnnotationKind::from_class_iri) else { continue };
        if seen.insert(t.subject()) {
            typed.push((t.subject(), kind, i + 1));
        }
    }
    if typed.is_empty() {
        return Err(RdfError::MissingType);
    }
    let first_seen: HashMap<&Term, usize> = triples.iter().enumerate().rev().map(|(i, t)| (t.subject(), i)).collect();
    typed.sort_by_key(|(subject, _, _)| first_seen[subject]);

    let mut diagnostics = Vec::new();
    let mut annotations = Vec::with_capacity(typed.len());
    for (subject, kind, line) in typed {
        let id = subject.value().to_string();
        let mut warn = |message: String| diagnostics.push(ParseDiagnostic::warning(line, message));

        let annotated_by = match index.first(subject, &format!("{OA}annotatedBy")) {
            Some(Term::Iri(iri)) => iri.clone(),
            Some(other) => Iri::new(other.value()).map_err(|_| RdfError::MissingAttribution { id: id.clone() })?,
            None => default_component.cloned().ok_or_else(|| RdfError::MissingAttribution { id: id.clone() })?,
        };
        let annotated_at = index.first(subject, &format!("{OA}annotatedAt")).map(|t| t.value().to_string());

        let score = match index.first(subject, &format!("{QA}score")) {
            None => None,
            Some(term) => match Decimal::parse(term.value()) {
                None => {
                    warn(format!("annotation {id}: score {:?} is not numeric and was dropped", term.value()));
                    None
                }
                Some(d) => {
                    if !d.is_unit_interval() {
                        warn(format!("annotation {id}: score {d} is outside [0, 1]"));
                    }
                    Some(d)
                }
            },
        };

        let targets: Vec<&Term> = index.objects(subject, &format!("{OA}hasTarget")).collect();
        let target_question = targets.iter().find_map(|target| match index.first(target, &format!("{OA}hasSource")) {
            Some(Term::Iri(iri)) => Some(iri.clone()),
            Some(_) => None,
            None if !index.contains(target) => target.as_iri().cloned(),
            None => None,
        });

        let selector = resolve_selector(&index, subject, &targets, &id, &mut warn);

        let mut body = index.first(subject, &format!("{OA}hasBody")).cloned();
        if !kind.requires_body() && body.is_some() {
            warn(format!("annotation {id}: {} carries a body, ignored", kind.class_name()));
            body = None;
        }
        if kind.requires_body() && body.is_none() {
            return Err(RdfError::MissingBody { id });
        }

        let annotation = Annotation {
            id,
            kind,
            annotated_by,
            annotated_at,
            score,
            target_question,
            selector,
            body,
        };
        annotation.validate()?;
        annotations.push(annotation);
    }
    Ok(Grouping { annotations, diagnostics })
}

/// A direct `oa:hasSelector` wins over the `oa:hasTarget` → `oa:hasSelector` path.
fn resolve_selector(
    index: &Index<'_>,
    subject: &Term,
    targets: &[&Term],
    id: &str,
    warn: &mut impl FnMut(String),
) -> Option<Selector> {
    let has_selector = format!("{OA}hasSelector");
    let candidates = index
        .objects(subject, &has_selector)
        .chain(targets.iter().flat_map(|target| index.objects(target, &has_selector)));
    for node in candidates {
        if !index.contains(node) {
            warn(format!("annotation {id}: selector {} is not described in the data", node.value()));
            continue;
        }
        // Some dumps nest one more selector level below the first.
        let nodes = std::iter::once(node).chain(index.objects(node, &has_selector));
        for candidate in nodes {
            let start = index.first(candidate, &format!("{OA}start")).and_then(position);
            let end = index.first(candidate, &format!("{OA}end")).and_then(position);
            match (start, end) {
                (Some(start), Some(end)) if start <= end => return Some(Selector { start, end }),
                (Some(start), Some(end)) => {
                    warn(format!("annotation {id}: selector start {start} is after end {end}, dropped"));
                    return None;
                }
                _ => {}
            }
        }
        warn(format!("annotation {id}: selector {} lacks oa:start/oa:end", node.value()));
    }
    None
}

fn position(term: &Term) -> Option<u64> {
    let value = term.value().trim();
    value.parse::<u64>().ok().or_else(|| {
        let f: f64 = value.parse().ok()?;
        (f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64).then_some(f as u64)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_ntriples;

    const TEXTRAZOR: &str = r#"
0.4794646229033659 rdf:type qa:AnnotationOfSpotInstance .
0.4794646229033659 oa:annotatedBy urn:qanary:TextRazor .
0.4794646229033659 oa:annotatedAt "2023-10-18T07:57:57.82089Z"^^xsd:dateTime .
0.4794646229033659 oa:hasTarget dd42717663eae28cdae021f88dab5c6 .
dd42717663eae28cdae021f88dab5c6 rdf:type oa:SpecificResource .
dd42717663eae28cdae021f88dab5c6 oa:hasSource <urn:qanary:question:q1> .
dd42717663eae28cdae021f88dab5c6 oa:hasSelector
b2d50b76259cb9962c231b45fc4f7e02 .
b2d50b76259cb9962c231b45fc4f7e02 rdf:type oa:TextPositionSelector .
b2d50b76259cb9962c231b45fc4f7e02 oa:start 10 .
b2d50b76259cb9962c231b45fc4f7e02 oa:end 16 .
"#;

    #[test]
    fn groups_the_spot_annotation() {
        let grouping = group_triples(&parse_ntriples(TEXTRAZOR).unwrap(), None).unwrap();
        assert!(grouping.diagnostics.is_empty());
        let [ann] = grouping.annotations.as_slice() else { panic!("expected one annotation") };
        assert_eq!(ann.kind, AnnotationKind::SpotInstance);
        assert_eq!(ann.annotated_by.as_str(), "urn:qanary:TextRazor");
        assert_eq!(ann.annotated_at.as_deref(), Some("2023-10-18T07:57:57.82089Z"));
        assert_eq!(ann.selector, Some(Selector { start: 10, end: 16 }));
        assert_eq!(ann.target_question.as_ref().unwrap().as_str(), "urn:qanary:question:q1");
        assert!(ann.body.is_none() && ann.score.is_none());
    }

    #[test]
    fn two_instances_in_order() {
        let text = "b rdf:type qa:AnnotationOfInstance .\n\
                    a rdf:type qa:AnnotationOfInstance .\n\
                    a oa:hasBody <http://dbpedia.org/resource/Berlin> .\n\
                    b oa:hasBody <http://dbpedia.org/resource/Paris> .\n";
        let c = Iri::new("urn:qanary:NED-TagMe").unwrap();
        let grouping = group_triples(&parse_ntriples(text).unwrap(), Some(&c)).unwrap();
        let ids: Vec<_> = grouping.annotations.iter().map(|a| a.id.as_str()).collect();
        assert_eq!(ids, ["b", "a"]);
        assert_eq!(grouping.annotations[0].annotated_by, c);
    }

    #[test]
    fn no_typed_subject() {
        let triples = parse_ntriples("s rdf:type oa:TextPositionSelector .").unwrap();
        assert_eq!(group_triples(&triples, None), Err(RdfError::MissingType));
    }

    #[test]
    fn dangling_selector_is_a_warning() {
        let text = "x rdf:type qa:AnnotationOfSpotInstance .\nx oa:annotatedBy urn:qanary:T .\nx oa:hasSelector nowhere .";
        let grouping = group_triples(&parse_ntriples(text).unwrap(), None).unwrap();
        assert_eq!(grouping.annotations[0].selector, None);
        assert_eq!(grouping.diagnostics.len(), 1);
        assert_eq!(grouping.diagnostics[0].severity, super::super::Severity::Warning);
    }

    #[test]
    fn score_out_of_range_is_kept_with_a_warning() {
        let text = "x rdf:type qa:AnnotationOfRelation .\nx oa:annotatedBy urn:qanary:T .\n\
                    x oa:hasBody <http://dbpedia.org/ontology/birthPlace> .\nx qa:score 1.7 .";
        let grouping = group_triples(&parse_ntriples(text).unwrap(), None).unwrap();
        assert_eq!(grouping.annotations[0].score.as_ref().unwrap().lexical(), "1.7");
        assert_eq!(grouping.diagnostics.len(), 1);
    }

    #[test]
    fn missing_body_on_instance() {
        let text = "x rdf:type qa:AnnotationOfInstance .\nx oa:annotatedBy urn:qanary:T .";
        assert_eq!(group_triples(&parse_ntriples(text).unwrap(), None), Err(RdfError::MissingBody { id: "x".into() }));
    }

    #[test]
    fn kind_classification() {
        let qa = |n: &str| Iri::new(format!("{QA}{n}")).unwrap();
        assert_eq!(classify_kind(&qa("AnnotationOfSpotInstance")), Ok(AnnotationKind::SpotInstance));
        assert_eq!(classify_kind(&qa("AnnotationOfInstance")), Ok(AnnotationKind::Instance));
        let sel = Iri::new(format!("{OA}TextPositionSelector")).unwrap();
        assert_eq!(classify_kind(&sel), Err(RdfError::UnknownAnnotationClass(sel.clone())));
    }
}
