//! End-to-end pipeline tests driving the compiled binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn lthm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lthm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = lthm(args);
    assert!(
        out.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write_gen_config(path: &Path, seed: u64) {
    fs::write(
        path,
        format!(
            r#"{{"docs": 24, "topics": 3, "vocab": 30, "tokens_per_doc": {{"fixed": 20}},
                "alpha": 0.4, "eta": 0.1, "gamma_doc": 1.1, "gamma_null": 60.0, "seed": {seed}}}"#
        ),
    )
    .unwrap();
}

/// gen -> train (lthm + freq) -> predict -> eval, returning the output root.
fn run_pipeline(root: &Path, seed: u64) -> PathBuf {
    fs::create_dir_all(root).unwrap();
    let config = root.join("gen.json");
    write_gen_config(&config, seed);
    let data = root.join("data");
    let lthm_dir = root.join("lthm");
    let freq_dir = root.join("freq");
    let pred_lthm = root.join("pred_lthm");
    let pred_freq = root.join("pred_freq");
    let curves = root.join("curves");

    ok(&["gen", "--config", config.to_str().unwrap(), "--out", data.to_str().unwrap()]);
    let corpus = data.join("corpus.jsonl");
    for (model, dir) in [("lthm", &lthm_dir), ("freq", &freq_dir)] {
        ok(&[
            "train",
            "--corpus",
            corpus.to_str().unwrap(),
            "--model",
            model,
            "--topics",
            "3",
            "--iters",
            "25",
            "--seed",
            "3",
            "--split",
            "0.8",
            "--out",
            dir.to_str().unwrap(),
        ]);
    }
    for (model_dir, pred_dir) in [(&lthm_dir, &pred_lthm), (&freq_dir, &pred_freq)] {
        ok(&[
            "predict",
            "--model",
            model_dir.join("model.json").to_str().unwrap(),
            "--vocab",
            model_dir.join("vocab.tsv").to_str().unwrap(),
            "--corpus",
            corpus.to_str().unwrap(),
            "--split-file",
            lthm_dir.join("split.tsv").to_str().unwrap(),
            "--subset",
            "test",
            "--out",
            pred_dir.to_str().unwrap(),
        ]);
    }
    ok(&[
        "eval",
        "--corpus",
        corpus.to_str().unwrap(),
        "--split-file",
        lthm_dir.join("split.tsv").to_str().unwrap(),
        "--rankings",
        &format!("lthm={}", pred_lthm.join("rankings.jsonl").display()),
        "--rankings",
        &format!("freq={}", pred_freq.join("rankings.jsonl").display()),
        "--nmax",
        "10",
        "--out",
        curves.to_str().unwrap(),
    ]);
    // Fold-in path: re-estimate test-doc mixtures from text instead of the
    // trained rows.
    ok(&[
        "predict",
        "--model",
        lthm_dir.join("model.json").to_str().unwrap(),
        "--vocab",
        lthm_dir.join("vocab.tsv").to_str().unwrap(),
        "--corpus",
        corpus.to_str().unwrap(),
        "--split-file",
        lthm_dir.join("split.tsv").to_str().unwrap(),
        "--subset",
        "test",
        "--fold-in",
        "--out",
        root.join("pred_foldin").to_str().unwrap(),
    ]);
    root.to_path_buf()
}

#[test]
fn pipeline_runs_and_is_byte_reproducible() {
    let tmp = TempDir::new().unwrap();
    let a = run_pipeline(&tmp.path().join("a"), 7);
    let b = run_pipeline(&tmp.path().join("b"), 7);

    // Identical inputs and seeds reproduce every model-bearing output byte
    // for byte (manifests and traces carry wall times and are exempt).
    for rel in [
        "data/corpus.jsonl",
        "data/truth.jsonl",
        "lthm/model.json",
        "lthm/vocab.tsv",
        "lthm/split.tsv",
        "freq/model.json",
        "pred_lthm/rankings.jsonl",
        "pred_freq/rankings.jsonl",
        "pred_foldin/rankings.jsonl",
        "curves/curves.csv",
    ] {
        let x = fs::read(a.join(rel)).unwrap();
        let y = fs::read(b.join(rel)).unwrap();
        assert_eq!(x, y, "{rel} differs between identical runs");
    }

    // Exactly one manifest per output directory.
    for dir in ["data", "lthm", "freq", "pred_lthm", "pred_freq", "curves"] {
        let manifests = fs::read_dir(a.join(dir))
            .unwrap()
            .filter(|e| e.as_ref().unwrap().file_name() == "manifest.json")
            .count();
        assert_eq!(manifests, 1, "{dir} should hold exactly one manifest");
    }

    // Scores are non-increasing down each emitted ranking.
    let rankings = fs::read_to_string(a.join("pred_lthm/rankings.jsonl")).unwrap();
    for line in rankings.lines() {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        let scores: Vec<f64> = record["ranking"]
            .as_array()
            .unwrap()
            .iter()
            .map(|pair| pair[1].as_f64().unwrap())
            .collect();
        assert!(!scores.is_empty());
        for pair in scores.windows(2) {
            assert!(pair[0] >= pair[1]);
        }
    }

    // The curves file covers both methods at every N.
    let curves = fs::read_to_string(a.join("curves/curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 1 + 2 * 10);
}

#[test]
fn lda_model_records_disabled_links_in_manifest() {
    let tmp = TempDir::new().unwrap();
    let config = tmp.path().join("gen.json");
    write_gen_config(&config, 11);
    let data = tmp.path().join("data");
    ok(&["gen", "--config", config.to_str().unwrap(), "--out", data.to_str().unwrap()]);
    let out = tmp.path().join("lda");
    ok(&[
        "train",
        "--corpus",
        data.join("corpus.jsonl").to_str().unwrap(),
        "--model",
        "lda",
        "--topics",
        "2",
        "--iters",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["disable_links"], serde_json::Value::Bool(true));
    assert_eq!(manifest["config"]["model"], "lda");

    let model: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("model.json")).unwrap()).unwrap();
    assert_eq!(model["kind"], "lda");
    assert_eq!(model["k"], 2);
    // Lambda pinned to the no-link slot.
    let lambda = model["lambda"].as_array().unwrap();
    assert_eq!(lambda.last().unwrap().as_f64().unwrap(), 1.0);

    // With the no-link slot at 1, inspect reports every link probability as 0.
    let inspect = ok(&[
        "inspect",
        "--model",
        out.join("model.json").to_str().unwrap(),
        "--top-words",
        "2",
        "--top-links",
        "2",
    ]);
    let text = String::from_utf8(inspect.stdout).unwrap();
    let link_lines: Vec<&str> = text.lines().filter(|l| l.starts_with("  link ")).collect();
    assert_eq!(link_lines.len(), 4);
    assert!(link_lines.iter().all(|l| l.trim_end().ends_with("0.0000")), "{text}");
}

#[test]
fn freq_model_emits_the_same_ranking_for_every_doc() {
    let tmp = TempDir::new().unwrap();
    let config = tmp.path().join("gen.json");
    write_gen_config(&config, 13);
    let data = tmp.path().join("data");
    ok(&["gen", "--config", config.to_str().unwrap(), "--out", data.to_str().unwrap()]);
    let corpus = data.join("corpus.jsonl");
    let freq = tmp.path().join("freq");
    ok(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--model",
        "freq",
        "--seed",
        "5",
        "--out",
        freq.to_str().unwrap(),
    ]);
    let pred = tmp.path().join("pred");
    ok(&[
        "predict",
        "--model",
        freq.join("model.json").to_str().unwrap(),
        "--vocab",
        freq.join("vocab.tsv").to_str().unwrap(),
        "--corpus",
        corpus.to_str().unwrap(),
        "--docs",
        "d00,d01,d05",
        "--out",
        pred.to_str().unwrap(),
    ]);
    let lines: Vec<serde_json::Value> = fs::read_to_string(pred.join("rankings.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0]["ranking"], lines[1]["ranking"]);
    assert_eq!(lines[1]["ranking"], lines[2]["ranking"]);
}

#[test]
fn missing_corpus_exits_2_with_no_partial_outputs() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("never");
    let result = lthm(&[
        "train",
        "--corpus",
        tmp.path().join("absent.jsonl").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(2));
    assert!(!out.exists(), "failed run must not leave an output directory");
}

#[test]
fn usage_errors_exit_1() {
    let result = lthm(&["train", "--no-such-flag"]);
    assert_eq!(result.status.code(), Some(1));
    let result = lthm(&["not-a-command"]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn unknown_doc_id_exits_2() {
    let tmp = TempDir::new().unwrap();
    let config = tmp.path().join("gen.json");
    write_gen_config(&config, 17);
    let data = tmp.path().join("data");
    ok(&["gen", "--config", config.to_str().unwrap(), "--out", data.to_str().unwrap()]);
    let corpus = data.join("corpus.jsonl");
    let model = tmp.path().join("model");
    ok(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--topics",
        "2",
        "--iters",
        "3",
        "--out",
        model.to_str().unwrap(),
    ]);
    let result = lthm(&[
        "predict",
        "--model",
        model.join("model.json").to_str().unwrap(),
        "--vocab",
        model.join("vocab.tsv").to_str().unwrap(),
        "--corpus",
        corpus.to_str().unwrap(),
        "--docs",
        "ghost",
        "--out",
        tmp.path().join("pred").to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("unknown document id"));
}

#[test]
fn single_doc_corpus_ranks_itself() {
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("one.jsonl");
    fs::write(&corpus, r#"{"id": "only", "tokens": ["a", "b", "a"]}"#).unwrap();
    let model = tmp.path().join("model");
    ok(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--topics",
        "1",
        "--iters",
        "2",
        "--split",
        "1",
        "--out",
        model.to_str().unwrap(),
    ]);
    let pred = tmp.path().join("pred");
    ok(&[
        "predict",
        "--model",
        model.join("model.json").to_str().unwrap(),
        "--vocab",
        model.join("vocab.tsv").to_str().unwrap(),
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        pred.to_str().unwrap(),
    ]);
    let line = fs::read_to_string(pred.join("rankings.jsonl")).unwrap();
    let record: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    let ranking = record["ranking"].as_array().unwrap();
    assert_eq!(ranking.len(), 1);
    assert_eq!(ranking[0][0], "only");
}

#[test]
fn inspect_prints_topics() {
    let tmp = TempDir::new().unwrap();
    let config = tmp.path().join("gen.json");
    write_gen_config(&config, 19);
    let data = tmp.path().join("data");
    ok(&["gen", "--config", config.to_str().unwrap(), "--out", data.to_str().unwrap()]);
    let model = tmp.path().join("model");
    ok(&[
        "train",
        "--corpus",
        data.join("corpus.jsonl").to_str().unwrap(),
        "--topics",
        "3",
        "--iters",
        "10",
        "--out",
        model.to_str().unwrap(),
    ]);
    let out = ok(&[
        "inspect",
        "--model",
        model.join("model.json").to_str().unwrap(),
        "--vocab",
        model.join("vocab.tsv").to_str().unwrap(),
        "--top-words",
        "3",
        "--top-links",
        "2",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("topic 0"));
    assert!(text.contains("topic 2"));
    assert_eq!(text.matches("  word ").count(), 9);
    assert_eq!(text.matches("  link ").count(), 6);
}

#[test]
fn small_wiki_scale_train_produces_a_k20_model() {
    // 105 documents, 20 topics, 90/10 split.
    let tmp = TempDir::new().unwrap();
    let config = tmp.path().join("gen.json");
    fs::write(
        &config,
        r#"{"docs": 105, "topics": 5, "vocab": 250, "tokens_per_doc": {"fixed": 60},
            "alpha": 0.4, "eta": 0.1, "gamma_doc": 1.1, "gamma_null": 420.0, "seed": 29}"#,
    )
    .unwrap();
    let data = tmp.path().join("data");
    ok(&["gen", "--config", config.to_str().unwrap(), "--out", data.to_str().unwrap()]);
    let model = tmp.path().join("model");
    ok(&[
        "train",
        "--corpus",
        data.join("corpus.jsonl").to_str().unwrap(),
        "--model",
        "lthm",
        "--topics",
        "20",
        "--split",
        "0.9",
        "--seed",
        "1",
        "--iters",
        "15",
        "--out",
        model.to_str().unwrap(),
    ]);
    let saved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(model.join("model.json")).unwrap()).unwrap();
    assert_eq!(saved["k"], 20);
    assert_eq!(saved["d"], 105);
    let split = fs::read_to_string(model.join("split.tsv")).unwrap();
    let test_docs = split.lines().filter(|l| l.ends_with("\ttest")).count();
    assert_eq!(test_docs, 11); // ceil(0.1 * 105)
    assert_eq!(split.lines().count(), 105);
}

#[test]
fn train_help_documents_every_flag() {
    let out = ok(&["train", "--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for flag in [
        "--topics",
        "--alpha",
        "--eta",
        "--gamma-doc",
        "--gamma-null",
        "--iters",
        "--tol",
        "--seed",
        "--split",
        "--deterministic",
        "--threads",
        "--min-count",
        "--stopwords",
        "--citation-weight",
    ] {
        assert!(text.contains(flag), "train --help is missing {flag}");
    }
}
