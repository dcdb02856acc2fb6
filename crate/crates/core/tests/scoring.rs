use explain_core::eval::{score_annotation, score_explanation, CheckStatus};
use explain_core::experiment::read_entry;
use explain_core::model::{Annotation, AnnotationKind, Iri};
use explain_core::template::{item_bindings, TemplateEngine};
use explain_testkit::{annotation_strategy, fixtures_dir, output_strategy};
use num_rational::Ratio;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestRunner};

const FIELDS: &[&str] = &["annotatedAt", "score", "hasBody", "start"];

fn present(a: &Annotation) -> Vec<&'static str> {
    let b = item_bindings(a);
    FIELDS.iter().copied().filter(|f| b.get(*f).is_some_and(Option::is_some)).collect()
}

fn without(a: &Annotation, fields: &[&str]) -> String {
    let mut b = item_bindings(a);
    for f in fields {
        b.insert(f.to_string(), None);
        if *f == "start" {
            b.insert("end".into(), None);
        }
    }
    TemplateEngine::standard().render_item_with(a, &b).unwrap()
}

/// At least 200 generated annotations, checked for the full, one-field and two-field cases.
#[test]
fn template_text_scores_full_and_deletions_cost_one() {
    let mut runner = TestRunner::new(Config { cases: 400, ..Config::default() });
    let (mut full, mut single, mut double) = (0, 0, 0);
    let mut cases = Vec::new();
    for _ in 0..400 {
        cases.push(annotation_strategy().new_tree(&mut runner).unwrap().current());
    }
    for a in &cases {
        let text = TemplateEngine::standard().render_item(a).unwrap();
        assert_eq!(score_annotation(&text, a).rating, 3, "{text}\n{a:?}");
        full += 1;
        let fields = present(a);
        for f in &fields {
            let text = without(a, &[f]);
            let rated = score_annotation(&text, a);
            assert_eq!(rated.rating, 2, "without {f}: {text}\n{a:?}");
            assert!(rated.has(CheckStatus::Missing));
            single += 1;
        }
        for (i, f) in fields.iter().enumerate() {
            for g in &fields[i + 1..] {
                let text = without(a, &[f, g]);
                assert_eq!(score_annotation(&text, a).rating, 2, "without {f},{g}: {text}");
                double += 1;
            }
        }
    }
    assert!(full >= 200 && single >= 200 && double >= 100, "{full} {single} {double}");
}

#[test]
fn worked_example_scores_four() {
    let data = std::fs::read_to_string(fixtures_dir().join("output/textrazor.nt")).unwrap();
    let entry = read_entry(AnnotationKind::SpotInstance, &data, "textrazor").unwrap();
    let generated = std::fs::read_to_string(fixtures_dir().join("output/textrazor.generated.txt")).unwrap();
    let eval = score_explanation(&generated, entry.set.component(), &entry.annotations).unwrap();
    assert_eq!(eval.score.prefix_rating(), 3);
    assert_eq!(eval.score.annotation_ratings(), &[1]);
    assert_eq!(eval.score.q_e(), Ratio::from_integer(4));

    let template = std::fs::read_to_string(fixtures_dir().join("output/textrazor.template.txt")).unwrap();
    let eval = score_explanation(&template, entry.set.component(), &entry.annotations).unwrap();
    assert_eq!(eval.score.q_e(), Ratio::from_integer(6));
}

#[test]
fn empty_annotation_list_is_an_error() {
    let component = Iri::new("urn:qanary:X").unwrap();
    assert!(score_explanation("anything", &component, &[]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn full_template_output_scores_six(anns in output_strategy()) {
        let engine = TemplateEngine::standard();
        let graph = Iri::new("urn:graph:p").unwrap();
        let text = engine.render_output(&anns[0].annotated_by, &graph, &anns).unwrap();
        let eval = score_explanation(&text, &anns[0].annotated_by, &anns).unwrap();
        prop_assert_eq!(eval.score.q_e(), Ratio::from_integer(6), "{}", text);
    }

    #[test]
    fn q_e_stays_in_range(anns in output_strategy(), noise in "[ a-z0-9.:]{0,80}") {
        let eval = score_explanation(&noise, &anns[0].annotated_by, &anns).unwrap();
        let q = eval.score.q_e();
        prop_assert!(q >= Ratio::from_integer(2) && q <= Ratio::from_integer(6));
    }
}
