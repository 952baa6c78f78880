use std::path::Path;
use std::process::{Command, Output};

fn teamcomm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teamcomm"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = teamcomm(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(
        teamcomm(&["preprocess", "--no-such-flag"]).status.code(),
        Some(1)
    );
    assert_eq!(
        teamcomm(&["--jobs", "0", "synth", "teams"]).status.code(),
        Some(1)
    );
    // no corpus anywhere
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        teamcomm(&["--out", path(dir.path()), "preprocess"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(teamcomm(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_data_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    std::fs::create_dir(&corpus).unwrap();
    std::fs::write(corpus.join("s.txt"), "medic no separator on this line\n").unwrap();
    let out = teamcomm(&[
        "--out",
        path(&dir.path().join("out")),
        "preprocess",
        "--corpus",
        path(&corpus),
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn stages_select_planted_topics_and_rerun_identically() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("out");
    ok(&["--out", path(&data), "--seed", "4", "synth", "corpus"]);
    let corpus = data.join("transcripts");
    ok(&["--out", path(&out), "preprocess", "--corpus", path(&corpus)]);
    let dtm = std::fs::read(out.join("dtm.json")).unwrap();
    ok(&["--out", path(&out), "preprocess", "--corpus", path(&corpus)]);
    assert_eq!(std::fs::read(out.join("dtm.json")).unwrap(), dtm);

    ok(&[
        "--out",
        path(&out),
        "--seed",
        "4",
        "topics",
        "select-k",
        "--k-min",
        "2",
        "--k-max",
        "4",
        "--runs",
        "3",
    ]);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("topic_count_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["selected_k"], 3, "{report}");
    let top = std::fs::read_to_string(out.join("top_terms.csv")).unwrap();
    assert!(top.starts_with("topic,rank,term,phi\n"));

    ok(&[
        "--out",
        path(&out),
        "cluster",
        "gap",
        "--k-max",
        "4",
        "--b-refs",
        "5",
    ]);
    ok(&["--out", path(&out), "cluster", "fit", "--k", "3"]);
    ok(&["--out", path(&out), "compose"]);
    assert!(out.join("composition.csv").exists());
}

#[test]
fn pipeline_logs_every_checkpoint_of_every_trial() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("out");
    ok(&[
        "--out",
        path(&data),
        "--seed",
        "2",
        "synth",
        "corpus",
        "--n-docs",
        "40",
        "--doc-length",
        "50",
        "--scores",
    ]);
    ok(&[
        "--out",
        path(&data),
        "--seed",
        "2",
        "synth",
        "teams",
        "--n-teams",
        "20",
    ]);
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{
  "seed": 8,
  "corpus_dir": "data/transcripts",
  "beard": "data/beard.csv",
  "ted": "data/ted.csv",
  "ted_schema": "data/ted_schema.json",
  "lda": {"n_iter": 60, "burn_in": 30},
  "sweep": {"k_min": 2, "k_max": 3, "runs_per_k": 2},
  "clustering": {"k_max": 3, "b_refs": 5, "restarts": 2},
  "early": {"fold_in_iters": 30}
}"#,
    )
    .unwrap();
    ok(&[
        "--config",
        path(&config),
        "--out",
        path(&out),
        "pipeline",
        "run",
    ]);
    let trials: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("trials.json")).unwrap()).unwrap();
    let n_trials = trials.as_array().unwrap().len();
    let log = std::fs::read_to_string(out.join("interventions.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 4 * n_trials);
    for line in log.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["intervene"].is_boolean());
    }
    assert!(out.join("pipeline_summary.json").exists());
}
