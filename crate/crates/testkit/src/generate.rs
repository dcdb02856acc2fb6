use explain_core::experiment::corpus::components;
use explain_core::model::{
    Annotation, AnnotationKind, BlankNode, Decimal, Iri, Literal, Selector, Term, Triple, OA, QA, RDF, XSD,
};
use proptest::prelude::*;

fn kind_strategy() -> impl Strategy<Value = AnnotationKind> {
    prop::sample::select(AnnotationKind::ALL.to_vec())
}

fn timestamp_strategy() -> impl Strategy<Value = String> {
    (1u32..=12, 1u32..=28, 0u32..24, 0u32..60, 0u32..60, prop::option::of(1u32..1_000_000)).prop_map(
        |(mo, d, h, mi, s, frac)| {
            let frac = frac.map(|f| format!(".{}", format!("{f:06}").trim_end_matches('0'))).unwrap_or_default();
            format!("2023-{mo:02}-{d:02}T{h:02}:{mi:02}:{s:02}{frac}Z")
        },
    )
}

fn score_strategy() -> impl Strategy<Value = Decimal> {
    (1u64..10_000_000_000_000_000, 4usize..=16).prop_map(|(digits, len)| {
        let text = format!("{digits:016}");
        let kept = text[..len].trim_end_matches('0');
        Decimal::parse(&format!("0.{}", if kept.is_empty() { "5" } else { kept })).expect("decimal")
    })
}

fn name_strategy() -> impl Strategy<Value = String> {
    "[A-Z][a-z]{2,9}(_[A-Z][a-z]{2,8})?"
}

fn body_strategy(kind: AnnotationKind) -> BoxedStrategy<Option<Term>> {
    let iri = |s: String| Term::Iri(Iri::new(s).expect("IRI"));
    match kind {
        AnnotationKind::Instance => name_strategy().prop_map(move |n| Some(iri(format!("http://dbpedia.org/resource/{n}")))).boxed(),
        AnnotationKind::Relation => {
            "[a-z]{3,8}([A-Z][a-z]{2,6})?".prop_map(move |n| Some(iri(format!("http://dbpedia.org/ontology/{n}")))).boxed()
        }
        AnnotationKind::AnswerSparql => (name_strategy(), "[a-z]{3,8}")
            .prop_map(|(r, p)| {
                Some(Term::Literal(Literal::typed(
                    format!("SELECT ?x WHERE {{ <http://dbpedia.org/resource/{r}> <http://dbpedia.org/ontology/{p}> ?x . }}"),
                    Iri::new(format!("{XSD}string")).unwrap(),
                )))
            })
            .boxed(),
        AnnotationKind::SpotInstance => Just(None).boxed(),
    }
}

fn annotation_of(kind: AnnotationKind, index: usize) -> BoxedStrategy<Annotation> {
    let component = prop::sample::select(components(kind).to_vec());
    (
        component,
        prop::option::weighted(0.9, timestamp_strategy()),
        prop::option::weighted(0.7, score_strategy()),
        prop::option::weighted(0.8, (0u64..200, 1u64..40)),
        body_strategy(kind),
        0u32..1000,
    )
        .prop_map(move |(component, annotated_at, score, span, body, question)| Annotation {
            id: format!("ann{index}"),
            kind,
            annotated_by: Iri::new(format!("urn:qanary:{component}")).unwrap(),
            annotated_at,
            score,
            target_question: Some(Iri::new(format!("urn:qanary:question:{question}")).unwrap()),
            selector: span.map(|(start, len)| Selector { start, end: start + len }),
            body,
        })
        .boxed()
}

/// A single annotation of any kind with a random subset of its optional fields.
pub fn annotation_strategy() -> impl Strategy<Value = Annotation> {
    kind_strategy().prop_flat_map(|kind| annotation_of(kind, 0))
}

/// One to four annotations of one kind written by one component.
pub fn output_strategy() -> impl Strategy<Value = Vec<Annotation>> {
    (kind_strategy(), 1usize..=4).prop_flat_map(|(kind, n)| {
        let parts: Vec<_> = (0..n).map(|i| annotation_of(kind, i)).collect();
        parts.prop_map(|mut anns| {
            let component = anns[0].annotated_by.clone();
            for a in &mut anns {
                a.annotated_by = component.clone();
            }
            anns
        })
    })
}

/// The triples a component would write for `annotation`, with blank nodes named after its id.
pub fn annotation_triples(annotation: &Annotation) -> Vec<Triple> {
    let iri = |s: String| Iri::new(s).expect("IRI");
    let blank = |s: String| Term::Blank(BlankNode::new(s).expect("label"));
    let typed = |v: String, dt: &str| Term::Literal(Literal::typed(v, iri(format!("{XSD}{dt}"))));
    let a = blank(annotation.id.clone());
    let t = blank(format!("{}-target", annotation.id));
    let mut out = Vec::new();
    let mut push = |s: &Term, p: String, o: Term| out.push(Triple::new(s.clone(), iri(p), o).expect("triple"));
    push(&a, format!("{RDF}type"), Term::Iri(annotation.kind.class_iri()));
    push(&a, format!("{OA}annotatedBy"), Term::Iri(annotation.annotated_by.clone()));
    if let Some(at) = &annotation.annotated_at {
        push(&a, format!("{OA}annotatedAt"), typed(at.clone(), "dateTime"));
    }
    if let Some(score) = &annotation.score {
        push(&a, format!("{QA}score"), typed(score.lexical().to_string(), "double"));
    }
    push(&a, format!("{OA}hasTarget"), t.clone());
    if let Some(q) = &annotation.target_question {
        push(&t, format!("{OA}hasSource"), Term::Iri(q.clone()));
    }
    if let Some(sel) = annotation.selector {
        let s = blank(format!("{}-selector", annotation.id));
        push(&t, format!("{OA}hasSelector"), s.clone());
        push(&s, format!("{RDF}type"), Term::Iri(iri(format!("{OA}TextPositionSelector"))));
        push(&s, format!("{OA}start"), typed(sel.start.to_string(), "nonNegativeInteger"));
        push(&s, format!("{OA}end"), typed(sel.end.to_string(), "nonNegativeInteger"));
    }
    if let Some(body) = &annotation.body {
        push(&a, format!("{OA}hasBody"), body.clone());
    }
    out
}
