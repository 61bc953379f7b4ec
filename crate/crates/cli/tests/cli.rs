use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn cbforest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbforest"))
        .args(args)
        .env_remove("CBF_SEED")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn synth(dir: &Path, name: &str, seed: u64) -> PathBuf {
    let path = dir.join(name);
    let seed = seed.to_string();
    let out = cbforest(&[
        "synth",
        "--out",
        path.to_str().unwrap(),
        "--n",
        "600",
        "--n-features",
        "32",
        "--pos-rate",
        "0.05",
        "--signal",
        "8",
        "--seed",
        &seed,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    path
}

fn write_config(dir: &Path, h: usize, output: &str) -> PathBuf {
    let cfg = config_text(h, output);
    let path = dir.join(format!("{output}.json"));
    fs::write(&path, cfg).unwrap();
    path
}

fn config_text(h: usize, output: &str) -> String {
    format!(
        r#"{{
  "train_path": "train.svm",
  "labels": {{ "source": "continuous" }},
  "h": {h},
  "k": 3,
  "seed": 11,
  "stop_metric": "auc_prc",
  "patience": 10,
  "max_rounds": 60,
  "ranges": {{ "min_child_weight": {{ "lo": 0.1, "hi": 2.0 }} }},
  "output_dir": "{output}"
}}"#
    )
}

struct Trained {
    dir: TempDir,
    out: PathBuf,
}

fn train(h: usize, workers: &str) -> Trained {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "train.svm", 3);
    let cfg = write_config(dir.path(), h, "run");
    let out = cbforest(&["train", "--config", cfg.to_str().unwrap(), "--workers", workers]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = dir.path().join("run");
    Trained { dir, out }
}

#[test]
fn synth_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let a = fs::read(synth(dir.path(), "a.svm", 5)).unwrap();
    let b = fs::read(synth(dir.path(), "b.svm", 5)).unwrap();
    let c = fs::read(synth(dir.path(), "c.svm", 6)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# threshold: "));
}

#[test]
fn train_writes_all_outputs() {
    let t = train(2, "1");
    for name in ["model.cbf", "cv_scores.tsv", "metrics.tsv", "reliability.tsv"] {
        assert!(t.out.join(name).is_file(), "{name} missing");
    }
    let cv = fs::read_to_string(t.out.join("cv_scores.tsv")).unwrap();
    assert!(cv.starts_with("layer\tlabel\tmodel\tbooster\tmetric\tfold_0\tfold_1\tfold_2\tcv_mean\tselected\n"));
    // Two layer-1 bundles of H rows each, then H layer-2 candidates.
    assert_eq!(cv.lines().count(), 1 + 2 * 2 + 2);
    let metrics = fs::read_to_string(t.out.join("metrics.tsv")).unwrap();
    for m in [
        "auc_roc",
        "auc_prc",
        "auc_bed@20",
        "ef@0.01",
        "logloss",
        "reliability_score@10",
    ] {
        assert!(metrics.contains(m), "{m} not reported");
    }
}

#[test]
fn zero_h_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "train.svm", 3);
    let cfg = write_config(dir.path(), 0, "run");
    let out = cbforest(&["train", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("h:"), "{}", stderr(&out));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "train.svm", 3);
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{ "train_path": "train.svm", "hh": 2 }"#).unwrap();
    let out = cbforest(&["train", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("hh"), "{}", stderr(&out));
}

#[test]
fn cv_scores_do_not_depend_on_worker_count() {
    let a = train(2, "1");
    let b = train(2, "4");
    let c = train(2, "4");
    let read = |t: &Trained| fs::read(t.out.join("cv_scores.tsv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&b), read(&c));
    let scores = |t: &Trained| {
        let output = t.dir.path().join("scores.tsv");
        let out = cbforest(&[
            "predict",
            "--model",
            t.out.join("model.cbf").to_str().unwrap(),
            "--input",
            t.dir.path().join("train.svm").to_str().unwrap(),
            "--output",
            output.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        fs::read(output).unwrap()
    };
    assert_eq!(scores(&a), scores(&b));
}

#[test]
fn seed_environment_variable_overrides_config() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "train.svm", 3);
    let run = |name: &str, seed: Option<&str>| {
        let cfg = write_config(dir.path(), 2, name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_cbforest"));
        cmd.args(["train", "--config", cfg.to_str().unwrap()])
            .env_remove("CBF_SEED");
        if let Some(s) = seed {
            cmd.env("CBF_SEED", s);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        fs::read(dir.path().join(name).join("cv_scores.tsv")).unwrap()
    };
    let base = run("base", None);
    assert_eq!(run("same", Some("11")), base);
    assert_ne!(run("other", Some("12")), base);
}

#[test]
fn predict_scores_every_row() {
    let t = train(1, "2");
    let input = t.dir.path().join("train.svm");
    let output = t.dir.path().join("scores.tsv");
    let model = t.out.join("model.cbf");
    let out = cbforest(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&output).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("row_id\tprobability"));
    let rows: Vec<(String, f64)> = lines
        .map(|l| {
            let (id, p) = l.split_once('\t').unwrap();
            (id.to_string(), p.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 600);
    assert!(rows.iter().all(|(_, p)| *p > 0.0 && *p < 1.0));
    assert_eq!(rows[0].0, "r0");
    assert_eq!(rows[599].0, "r599");
}

#[test]
fn predict_rejects_corrupted_archive() {
    let t = train(1, "1");
    let model = t.out.join("model.cbf");
    let text = fs::read_to_string(&model).unwrap();
    // Flip one digit inside the payload; the JSON stays well-formed.
    let at = text.find("\"base_score\": ").unwrap() + "\"base_score\": ".len();
    let mut bytes = text.into_bytes();
    bytes[at] = if bytes[at] == b'1' { b'2' } else { b'1' };
    fs::write(&model, bytes).unwrap();
    let output = t.dir.path().join("scores.tsv");
    let out = cbforest(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--input",
        t.dir.path().join("train.svm").to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("checksum"), "{}", stderr(&out));
    assert!(!output.exists());
}

#[test]
fn predict_rejects_wider_input() {
    let t = train(1, "1");
    let wide = t.dir.path().join("wide.svm");
    fs::write(&wide, "1 0:1 40:1\n0 3:1\n").unwrap();
    let out = cbforest(&[
        "predict",
        "--model",
        t.out.join("model.cbf").to_str().unwrap(),
        "--input",
        wide.to_str().unwrap(),
        "--output",
        t.dir.path().join("scores.tsv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

fn column_file(dir: &Path, name: &str, values: &[f64]) -> PathBuf {
    let path = dir.join(name);
    let text: String = values.iter().map(|v| format!("{v}\n")).collect();
    fs::write(&path, text).unwrap();
    path
}

fn evaluate(args: &[&str]) -> (Option<i32>, String) {
    let out = cbforest(args);
    (out.status.code(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn evaluate_labels_against_themselves() {
    let dir = TempDir::new().unwrap();
    let labels = column_file(dir.path(), "y.txt", &[0.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
    let p = labels.to_str().unwrap();
    let (code, text) = evaluate(&["evaluate", "--scores", p, "--labels", p, "--auc-roc"]);
    assert_eq!(code, Some(0));
    assert_eq!(text, "metric\tvalue\nauc_roc\t1\n");
}

#[test]
fn evaluate_enrichment_factor_example() {
    let dir = TempDir::new().unwrap();
    let scores: Vec<f64> = (0..100).map(|i| 1.0 - i as f64 / 100.0).collect();
    let labels: Vec<f64> = (0..100).map(|i| if i % 10 == 0 { 1.0 } else { 0.0 }).collect();
    let s = column_file(dir.path(), "s.txt", &scores);
    let y = column_file(dir.path(), "y.txt", &labels);
    let (code, text) = evaluate(&[
        "evaluate",
        "--scores",
        s.to_str().unwrap(),
        "--labels",
        y.to_str().unwrap(),
        "--ef",
        "0.01",
    ]);
    assert_eq!(code, Some(0));
    assert_eq!(text, "metric\tvalue\nef@0.01\t10\n");
}

#[test]
fn evaluate_reliability_tables() {
    let dir = TempDir::new().unwrap();
    let scores = [0.05, 0.1, 0.2, 0.3, 0.6, 0.9];
    let labels = [0.0, 0.0, 0.0, 1.0, 0.0, 1.0];
    let s = column_file(dir.path(), "s.txt", &scores);
    let y = column_file(dir.path(), "y.txt", &labels);
    let base = [
        "evaluate",
        "--scores",
        s.to_str().unwrap(),
        "--labels",
        y.to_str().unwrap(),
    ];
    let (code, quantile) = evaluate(&[&base[..], &["--reliability", "--bins", "3"]].concat());
    assert_eq!(code, Some(0));
    assert!(quantile.contains("bin\tcount\tmean_predicted\tpositive_rate\n0\t2\t"));
    let (code, fixed) = evaluate(&[&base[..], &["--reliability", "--bins", "2", "--fixed-width"]].concat());
    assert_eq!(code, Some(0));
    assert!(fixed.contains("0\t4\t"), "{fixed}");
}

#[test]
fn evaluate_length_mismatch_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let s = column_file(dir.path(), "s.txt", &[0.1, 0.2]);
    let y = column_file(dir.path(), "y.txt", &[0.0, 1.0, 1.0]);
    let (code, _) = evaluate(&[
        "evaluate",
        "--scores",
        s.to_str().unwrap(),
        "--labels",
        y.to_str().unwrap(),
    ]);
    assert_eq!(code, Some(2));
}

#[test]
fn unknown_flag_prints_usage() {
    let out = cbforest(&["evaluate", "--scores", "a", "--labels", "b", "--auc-xyz"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("Usage"), "{}", stderr(&out));
}
