use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn toy() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/toy")
}

fn neuroqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neuroqa")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = neuroqa(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn full_workflow_on_toy_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let config = toy().join("config.json");
    let dataset = toy().join("dataset.jsonl");
    let (chunks, index) = (d.join("chunks.jsonl"), d.join("toy.idx"));

    let said = ok(&["validate-data", "--dataset", s(&dataset), "--profile", "board"]);
    assert!(said.contains("6 questions valid"), "{said}");

    let said = ok(&["ingest", "--corpus", s(&toy().join("corpus")), "--out", s(&chunks), "--config", s(&config)]);
    assert!(said.contains("wrote 10 chunks"), "{said}");
    ok(&["index", "--chunks", s(&chunks), "--out", s(&index), "--config", s(&config)]);

    let run = |name: &str, mode: &str| {
        let out = d.join(name);
        ok(&[
            "run", "--dataset", s(&dataset), "--mode", mode, "--config", s(&config), "--out", s(&out), "--index", s(&index),
            "--parallelism", "3",
        ]);
        out
    };
    let a1 = run("agentic1", "agentic");
    let a2 = run("agentic2", "agentic");
    let base = run("base", "base");
    let rag = run("rag", "rag");

    assert_eq!(std::fs::read(a1.join("metrics.json")).unwrap(), std::fs::read(a2.join("metrics.json")).unwrap());
    let metrics: serde_json::Value = serde_json::from_slice(&std::fs::read(a1.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["metrics"][0]["n_correct"], 4);
    for (dir, want) in [(&base, 3), (&rag, 5)] {
        let m: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("metrics.json")).unwrap()).unwrap();
        assert_eq!(m["metrics"][0]["n_correct"], want, "{}", dir.display());
    }

    let written = ok(&["report", "--run", s(&a1), "--format", "markdown"]);
    assert!(written.trim().ends_with("report.md"), "{written}");
    assert!(std::fs::read_to_string(a1.join("report.md")).unwrap().contains("agentic"));

    let cmp: serde_json::Value = serde_json::from_str(&ok(&["compare", "--run-a", s(&a1), "--run-b", s(&a1)])).unwrap();
    assert_eq!(cmp["p_value"], 1.0);
    assert_eq!(cmp["significant"], false);
    let cmp: serde_json::Value = serde_json::from_str(&ok(&["compare", "--run-a", s(&base), "--run-b", s(&rag)])).unwrap();
    assert!(cmp["p_value"].as_f64().unwrap() > 0.05);

    // Re-running into a used directory is refused as a data error.
    let again = neuroqa(&[
        "--json-errors", "run", "--dataset", s(&dataset), "--mode", "base", "--config", s(&config), "--out", s(&base),
    ]);
    assert_eq!(again.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&again.stderr).unwrap();
    assert_eq!(err["exit_code"], 2);
}

#[test]
fn usage_errors_exit_one() {
    let out = neuroqa(&["run", "--dataset", "d.jsonl", "--mode", "turbo", "--config", "c.json", "--out", "o"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("turbo"));
    assert_eq!(neuroqa(&[]).status.code(), Some(1));
    assert_eq!(neuroqa(&["--help"]).status.code(), Some(0));
}

#[test]
fn rag_without_index_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = neuroqa(&[
        "run", "--dataset", s(&toy().join("dataset.jsonl")), "--mode", "rag", "--config", s(&toy().join("config.json")),
        "--out", s(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("index"));
}
