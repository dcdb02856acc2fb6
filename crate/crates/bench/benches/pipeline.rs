use criterion::{black_box, criterion_group, criterion_main, Criterion};
use explain_core::eval::score_explanation;
use explain_core::experiment::{load_corpus, read_entry};
use explain_core::model::AnnotationKind;
use explain_core::rdf::parse_ntriples;
use explain_core::sparql::{classify_query, QueryRegistry};
use explain_core::template::explain_output;
use explain_testkit::fixtures_dir;

fn textrazor() -> String {
    std::fs::read_to_string(fixtures_dir().join("output/textrazor.nt")).unwrap()
}

fn parsing(c: &mut Criterion) {
    let text = textrazor();
    c.bench_function("parse_textrazor", |b| b.iter(|| parse_ntriples(black_box(&text)).unwrap()));
}

fn explaining(c: &mut Criterion) {
    let entry = read_entry(AnnotationKind::SpotInstance, &textrazor(), "textrazor").unwrap();
    c.bench_function("explain_output_textrazor", |b| b.iter(|| explain_output(black_box(&entry.set)).unwrap()));
    let corpus = load_corpus(&fixtures_dir().join("corpus")).unwrap();
    c.bench_function("explain_output_corpus", |b| {
        b.iter(|| corpus.iter().map(|e| explain_output(&e.set).unwrap().text().len()).sum::<usize>())
    });
}

fn scoring(c: &mut Criterion) {
    let corpus = load_corpus(&fixtures_dir().join("corpus")).unwrap();
    let cases: Vec<_> = corpus.iter().map(|e| (explain_output(&e.set).unwrap().text().to_string(), e)).collect();
    c.bench_function("score_corpus", |b| {
        b.iter(|| {
            for (text, e) in &cases {
                black_box(score_explanation(text, e.set.component(), &e.annotations).unwrap());
            }
        })
    });
}

fn classification(c: &mut Criterion) {
    let queries: Vec<String> = QueryRegistry::standard().entries().iter().map(|e| e.text.clone()).collect();
    c.bench_function("classify_registry_queries", |b| {
        b.iter(|| queries.iter().map(|q| classify_query(q).unwrap()).collect::<Vec<_>>())
    });
}

criterion_group!(benches, parsing, explaining, scoring, classification);
criterion_main!(benches);
