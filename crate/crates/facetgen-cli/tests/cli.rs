//! End-to-end tests of the `facetgen` binary: the full command pipeline,
//! artifact determinism, and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn facetgen(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_facetgen"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_ok(output: &Output) {
    assert!(
        output.status.success(),
        "command failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn write_config(dir: &Path, seed: u64) -> String {
    let config = serde_json::json!({
        "corpus": {
            "kind": "synthetic",
            "num_queries": 12,
            "facet_count_weights": [0.0, 0.5, 0.5, 0.0, 0.0],
            "vocab_size": 40,
            "seed": seed,
        },
        "objectives": ["seq-default", "set-pred"],
        "model": {"embedding_dim": 12, "hidden_dim": 16, "init_seed": 5},
        "training": {"epochs": 40, "batch_size": 4},
        "inference": {"facet_count": 2},
    });
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path.to_string_lossy().to_string()
}

#[test]
fn full_pipeline_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let config = write_config(dir, 9);

    assert_ok(&facetgen(
        &["--config", &config, "synth", "--out", "run"],
        dir,
    ));
    assert!(dir.join("run/corpus.jsonl").exists());
    assert!(dir.join("run/corpus.stats.json").exists());

    for objective in ["seq-default", "set-pred"] {
        assert_ok(&facetgen(
            &[
                "--config",
                &config,
                "train",
                "--objective",
                objective,
                "--out",
                "run",
                "--dump-examples",
            ],
            dir,
        ));
        assert!(dir
            .join(format!("run/{objective}.checkpoint.json"))
            .exists());
        assert!(dir.join(format!("run/{objective}.train.jsonl")).exists());
        assert!(dir.join(format!("run/{objective}.examples.jsonl")).exists());
        assert!(dir.join(format!("run/{objective}.vocab.txt")).exists());

        let checkpoint = format!("run/{objective}.checkpoint.json");
        assert_ok(&facetgen(
            &[
                "--config",
                &config,
                "generate",
                "--objective",
                objective,
                "--checkpoint",
                &checkpoint,
                "--out",
                "run",
            ],
            dir,
        ));
        let predictions = format!("run/{objective}.predictions.jsonl");
        assert!(dir.join(&predictions).exists());

        assert_ok(&facetgen(
            &[
                "--config",
                &config,
                "evaluate",
                "--predictions",
                &predictions,
                "--out",
                "run",
                "--label",
                objective,
            ],
            dir,
        ));
        assert!(dir.join(format!("run/{objective}.report.json")).exists());
        assert!(dir.join(format!("run/{objective}.report.md")).exists());
        assert!(dir.join(format!("run/{objective}.histogram.json")).exists());
    }

    assert_ok(&facetgen(
        &[
            "--config",
            &config,
            "compare",
            "--reports",
            "run/seq-default.report.json",
            "run/set-pred.report.json",
            "--baseline",
            "seq-default",
            "--out",
            "run",
        ],
        dir,
    ));
    assert!(dir.join("run/comparison.md").exists());
    assert!(dir.join("run/comparison.json").exists());

    let cost = facetgen(&["--config", &config, "cost", "--out", "run"], dir);
    assert_ok(&cost);
    let stdout = String::from_utf8_lossy(&cost.stdout);
    assert!(stdout.contains("seq-default"));
    assert!(dir.join("run/cost.md").exists());
}

#[test]
fn set_pred_respects_facet_count_bound() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let config = write_config(dir, 21);
    assert_ok(&facetgen(
        &[
            "--config",
            &config,
            "train",
            "--objective",
            "set-pred",
            "--out",
            "run",
        ],
        dir,
    ));
    assert_ok(&facetgen(
        &[
            "--config",
            &config,
            "generate",
            "--objective",
            "set-pred",
            "--checkpoint",
            "run/set-pred.checkpoint.json",
            "--out",
            "run",
        ],
        dir,
    ));
    let predictions = fs::read_to_string(dir.join("run/set-pred.predictions.jsonl")).unwrap();
    for line in predictions.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(row["facets"].as_array().unwrap().len() <= 2);
    }
}

#[test]
fn rerunning_train_and_generate_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let config = write_config(dir, 13);
    let mut artifacts: Vec<(Vec<u8>, Vec<u8>, Vec<u8>)> = Vec::new();
    for out in ["a", "b"] {
        assert_ok(&facetgen(
            &[
                "--config",
                &config,
                "train",
                "--objective",
                "seq-default",
                "--out",
                out,
            ],
            dir,
        ));
        assert_ok(&facetgen(
            &[
                "--config",
                &config,
                "generate",
                "--objective",
                "seq-default",
                "--checkpoint",
                &format!("{out}/seq-default.checkpoint.json"),
                "--out",
                out,
            ],
            dir,
        ));
        artifacts.push((
            fs::read(dir.join(format!("{out}/seq-default.checkpoint.json"))).unwrap(),
            fs::read(dir.join(format!("{out}/seq-default.train.jsonl"))).unwrap(),
            fs::read(dir.join(format!("{out}/seq-default.predictions.jsonl"))).unwrap(),
        ));
    }
    assert_eq!(artifacts[0].0, artifacts[1].0, "checkpoints differ");
    assert_eq!(artifacts[0].1, artifacts[1].1, "training logs differ");
    assert_eq!(artifacts[0].2, artifacts[1].2, "predictions differ");
}

#[test]
fn exit_codes_by_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let config = write_config(dir, 2);

    // usage: missing config
    let out = facetgen(&["synth", "--out", "run"], dir);
    assert_eq!(out.status.code(), Some(1));

    // usage: unknown objective
    let out = facetgen(
        &[
            "--config",
            &config,
            "train",
            "--objective",
            "nonsense",
            "--out",
            "run",
        ],
        dir,
    );
    assert_eq!(out.status.code(), Some(1));

    // usage: unknown profile
    let out = facetgen(
        &[
            "--config",
            &config,
            "--profile",
            "huge",
            "synth",
            "--out",
            "run",
        ],
        dir,
    );
    assert_eq!(out.status.code(), Some(1));

    // data: missing corpus file
    let bad = serde_json::json!({"corpus": {"kind": "native", "path": "missing.jsonl"}});
    let bad_path = dir.join("bad.json");
    fs::write(&bad_path, serde_json::to_string(&bad).unwrap()).unwrap();
    let out = facetgen(
        &[
            "--config",
            bad_path.to_str().unwrap(),
            "synth",
            "--out",
            "run",
        ],
        dir,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_rejects_checkpoint_from_another_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let config_a = write_config(dir, 31);
    assert_ok(&facetgen(
        &[
            "--config",
            &config_a,
            "train",
            "--objective",
            "seq-default",
            "--out",
            "run",
        ],
        dir,
    ));
    // same shape, different corpus seed -> different query tokens
    let config_b = {
        let mut v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.join("config.json")).unwrap()).unwrap();
        v["corpus"]["seed"] = serde_json::json!(32);
        let path = dir.join("config_b.json");
        fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
        path.to_string_lossy().to_string()
    };
    let out = facetgen(
        &[
            "--config",
            &config_b,
            "generate",
            "--objective",
            "seq-default",
            "--checkpoint",
            "run/seq-default.checkpoint.json",
            "--out",
            "run",
        ],
        dir,
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("vocabulary mismatch"), "stderr: {stderr}");
}

#[test]
fn seed_flag_overrides_config_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let config = write_config(dir, 3);
    assert_ok(&facetgen(
        &["--config", &config, "--seed", "77", "synth", "--out", "s77"],
        dir,
    ));
    assert_ok(&facetgen(
        &["--config", &config, "--seed", "78", "synth", "--out", "s78"],
        dir,
    ));
    let a = fs::read(dir.join("s77/corpus.jsonl")).unwrap();
    let b = fs::read(dir.join("s78/corpus.jsonl")).unwrap();
    assert_ne!(a, b, "different seeds must change the synthetic corpus");
}
