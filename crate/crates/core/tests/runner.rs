mod common;

use std::collections::BTreeMap;

use neuroqa::eval::{ReportFormat, RunMode};
use neuroqa::runner::{compare_runs, execute_run, read_manifest, read_results, report_run, RunConfig, RunError, RunOptions};

fn expected(mode: &str) -> BTreeMap<String, char> {
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(common::toy().join("expected_answers.json")).unwrap()).unwrap();
    v[mode]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, l)| (k.clone(), l.as_str().unwrap().chars().next().unwrap()))
        .collect()
}

fn options(mode: RunMode, out: &std::path::Path, index: Option<std::path::PathBuf>) -> RunOptions {
    RunOptions {
        dataset: common::toy().join("dataset.jsonl"),
        mode,
        config: common::toy().join("config.json"),
        out: out.to_path_buf(),
        parallelism: 2,
        index,
    }
}

#[test]
fn base_and_rag_runs_score_scripted_answers() {
    let dir = tempfile::tempdir().unwrap();
    let index = common::build_toy_index(dir.path());
    for (mode, name) in [(RunMode::Base, "base"), (RunMode::Rag { top_k: 5 }, "rag")] {
        let out = dir.path().join(name);
        let summary = execute_run(&options(mode, &out, Some(index.clone()))).unwrap();
        let want = expected(name);
        for r in &summary.results {
            let letter = (b'A' + r.predicted_index.unwrap() as u8) as char;
            assert_eq!(letter, want[&r.question_id], "{name} {}", r.question_id);
        }
        assert_eq!(read_results(&out.join("results.jsonl")).unwrap(), summary.results);
        let manifest = read_manifest(&out).unwrap();
        assert_eq!(manifest.n_questions, 6);
        assert_eq!(manifest.run_id.len(), 12);
        assert_eq!(manifest.index_digest.is_some(), name == "rag");
    }
    // The config's rag_top_k applies.
    let m = read_manifest(&dir.path().join("rag")).unwrap();
    assert_eq!(m.mode, RunMode::Rag { top_k: 3 });

    let cmp = compare_runs(&dir.path().join("base"), &dir.path().join("rag")).unwrap();
    assert_eq!(cmp.table, [[3, 3], [5, 1]]);
    let same = compare_runs(&dir.path().join("base"), &dir.path().join("base")).unwrap();
    assert_eq!(same.p_value, 1.0);
}

#[test]
fn reports_render_from_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("base");
    execute_run(&options(RunMode::Base, &out, None)).unwrap();
    let metrics_before = std::fs::read(out.join("metrics.json")).unwrap();
    let files = report_run(&out, ReportFormat::Json).unwrap();
    assert_eq!(files.len(), 2);
    assert_eq!(std::fs::read(out.join("metrics.json")).unwrap(), metrics_before);

    let csv = report_run(&out, ReportFormat::Csv).unwrap();
    let names: Vec<String> = csv.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(
        names,
        ["breakdown_subspecialty.csv", "breakdown_complexity_fkd.csv", "breakdown_complexity_cci.csv", "breakdown_complexity_rc.csv", "breakdown_exam.csv"]
    );
    let md = report_run(&out, ReportFormat::Markdown).unwrap();
    let text = std::fs::read_to_string(&md[0]).unwrap();
    assert!(text.contains("| base | 6 | 3 | 50% |"), "{text}");
    assert!(text.contains("Neuromuscular"));
}

#[test]
fn run_refuses_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(out.join("keep"), "").unwrap();
    assert!(matches!(execute_run(&options(RunMode::Base, &out, None)), Err(RunError::Data(_))));

    let err = execute_run(&options(RunMode::Agentic, &dir.path().join("y"), None)).unwrap_err();
    assert!(matches!(err, RunError::Config(_)), "{err}");

    let cfg = r#"{"backend": {"kind": "http", "base_url": "http://localhost:1", "api_key": "sk-secret"}}"#;
    assert!(matches!(RunConfig::parse(cfg, dir.path()), Err(RunError::Config(_))));
    assert!(matches!(RunConfig::parse(r#"{"surprise": 1}"#, dir.path()), Err(RunError::Config(_))));
    assert!(matches!(
        RunConfig::parse(r#"{"pipeline": {"max_validation_cycles": 0}}"#, dir.path()),
        Err(RunError::Config(_))
    ));
}

#[test]
fn relative_paths_resolve_against_config_file() {
    let loaded = RunConfig::load(&common::toy().join("config.json")).unwrap();
    assert_eq!(loaded.config.backend.mock_script.unwrap(), common::toy().join("mock_script.json"));
    assert_eq!(loaded.digest.len(), 64);
}
