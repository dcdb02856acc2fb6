use clap::Parser;
use explain_cli::{execute, Cli};
use explain_testkit::fixtures_dir;

fn run(args: &[&str]) -> anyhow::Result<String> {
    let cli = Cli::try_parse_from(std::iter::once("explain").chain(args.iter().copied()))?;
    let mut out = Vec::new();
    execute(cli, &mut out)?;
    Ok(String::from_utf8(out)?)
}

fn fixture(rel: &str) -> String {
    fixtures_dir().join(rel).display().to_string()
}

#[test]
fn explain_output_template() {
    let text = run(&["explain", "output", "--data", &fixture("output/textrazor.nt")]).unwrap();
    let golden = std::fs::read_to_string(fixtures_dir().join("output/textrazor.template.txt")).unwrap();
    assert_eq!(text.trim_end(), golden.trim_end());
}

#[test]
fn explain_input_json() {
    let dir = tempfile::tempdir().unwrap();
    let query = dir.path().join("q.rq");
    std::fs::write(&query, "PREFIX qa: <http://www.wdaqua.eu/qa#>\nSELECT * WHERE { ?a a qa:AnnotationOfRelation }").unwrap();
    let json = run(&["explain", "input", "--query", query.to_str().unwrap(), "--json"]).unwrap();
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["kind"], "I3");
    assert_eq!(value["method"], "template");
}

#[test]
fn score_fixture_texts() {
    let data = fixture("output/textrazor.nt");
    let template = run(&["score", "--text", &fixture("output/textrazor.template.txt"), "--data", &data]).unwrap();
    let template: serde_json::Value = serde_json::from_str(&template).unwrap();
    assert_eq!(template["score"]["prefixRating"], 3);
    assert_eq!(template["score"]["annotationRatings"], serde_json::json!([3]));
    let generated = run(&["score", "--text", &fixture("output/textrazor.generated.txt"), "--data", &data]).unwrap();
    let generated: serde_json::Value = serde_json::from_str(&generated).unwrap();
    assert_eq!(generated["score"]["prefixRating"], 3);
    assert_eq!(generated["score"]["annotationRatings"], serde_json::json!([1]));
}

#[test]
fn prompt_hash_matches_mock_table() {
    let printed = run(&["prompt", "output", "--data", &fixture("output/textrazor.nt")]).unwrap();
    let hash = printed.lines().next().unwrap().trim_start_matches("# sha256 ").to_string();
    let table: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixtures_dir().join("mock/table.json")).unwrap()).unwrap();
    assert!(table.get(&hash).is_some());
}

#[test]
fn mock_runs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let plan = fixture("plans/one_shot.json");
    let summary = run(&["run", "--plan", &plan, "--out", a.path().to_str().unwrap(), "--mock", "--concurrency", "1"]).unwrap();
    assert!(summary.starts_with("80 trials, 0 failed"));
    run(&["run", "--plan", &plan, "--out", b.path().to_str().unwrap(), "--mock", "--concurrency", "8"]).unwrap();
    for file in ["trials.csv", "matrix.csv", "matrix.json"] {
        assert_eq!(std::fs::read(a.path().join(file)).unwrap(), std::fs::read(b.path().join(file)).unwrap(), "{file}");
    }
    let other = tempfile::tempdir().unwrap();
    run(&["run", "--plan", &plan, "--out", other.path().to_str().unwrap(), "--mock", "--seed", "1"]).unwrap();
    assert_ne!(std::fs::read(a.path().join("trials.csv")).unwrap(), std::fs::read(other.path().join("trials.csv")).unwrap());
}

#[test]
fn replay_reproduces_a_run() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let plan = fixture("plans/one_shot.json");
    run(&["run", "--plan", &plan, "--out", first.path().to_str().unwrap(), "--mock"]).unwrap();
    let audit = first.path().join("audit.ndjson");
    assert_eq!(std::fs::read_to_string(&audit).unwrap().lines().count(), 80);
    run(&["run", "--plan", &plan, "--out", second.path().to_str().unwrap(), "--replay", audit.to_str().unwrap()]).unwrap();
    assert_eq!(
        std::fs::read(first.path().join("trials.csv")).unwrap(),
        std::fs::read(second.path().join("trials.csv")).unwrap()
    );
}

#[test]
fn corpus_command_writes_layout() {
    let dir = tempfile::tempdir().unwrap();
    let msg = run(&["corpus", "--dataset", &fixture("datasets/example_questions.json"), "--out", dir.path().to_str().unwrap()]).unwrap();
    assert!(msg.starts_with("wrote 32 "));
    let corpus = explain_core::experiment::load_corpus(dir.path()).unwrap();
    assert_eq!(corpus.len(), 32);
}

#[test]
fn export_ratings_from_empty_store() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("explain.toml");
    std::fs::write(&config, format!("store_path = {:?}\n", dir.path().join("s.ndjson").display().to_string())).unwrap();
    let csv = run(&["--config", config.to_str().unwrap(), "export-ratings"]).unwrap();
    assert_eq!(csv, "subjectKind,metric,method,shots,model,ratings,mean\n");
}

#[test]
fn bad_arguments() {
    assert!(run(&["explain", "output"]).is_err());
    assert!(run(&["run", "--plan", "/nonexistent.json", "--out", "/tmp/x", "--mock"]).is_err());
}
