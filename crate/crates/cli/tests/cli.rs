use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use polarcascade::corpus::{parse_record, Label};

const BIN: &str = env!("CARGO_BIN_EXE_polarcascade");

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Fixture {
    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn vectors(&self) -> String {
        self.path("vectors.txt").display().to_string()
    }
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(o: Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

/// A small corpus with both models trained once for all tests.
fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_owned();
        let p = |n: &str| root.join(n).display().to_string();
        ok(run(&[
            "--quiet", "synth", "--out", &p("corpus.jsonl"), "--vectors", &p("vectors.txt"),
            "--per-class", "150", "--vocab-per-set", "20", "--dim", "16",
        ]));
        for kind in ["polarity", "neutral"] {
            ok(run(&[
                "--quiet", "--embeddings", &p("vectors.txt"), "train", "--kind", kind,
                "--data", &p("corpus.jsonl"), "--out", &p(&format!("{kind}.json")),
                "--hidden", "16", "--epochs", "10",
            ]));
        }
        Fixture { _dir: dir, root }
    })
}

fn predict(f: &Fixture, extra: &[&str]) -> Output {
    let pol = f.path("polarity.json").display().to_string();
    let neu = f.path("neutral.json").display().to_string();
    let v = f.vectors();
    let mut args = vec!["--quiet", "--embeddings", &v, "predict", "--polarity", &pol, "--neutral", &neu];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn train_reports_accuracy_and_is_deterministic() {
    let f = fixture();
    let again = f.path("polarity-again.json").display().to_string();
    let out = ok(run(&[
        "--quiet", "--embeddings", &f.vectors(), "train", "--kind", "polarity",
        "--data", &f.path("corpus.jsonl").display().to_string(), "--out", &again,
        "--hidden", "16", "--epochs", "10",
    ]));
    assert!(out.starts_with("kind=polarity train_accuracy="), "{out}");
    let acc: f64 = out
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("test_accuracy="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(acc > 0.8, "{out}");
    assert_eq!(
        std::fs::read(f.path("polarity.json")).unwrap(),
        std::fs::read(&again).unwrap()
    );
}

#[test]
fn desk_scale_models_reach_95_percent() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).display().to_string();
    ok(run(&["--quiet", "synth", "--out", &p("c.jsonl"), "--vectors", &p("v.txt")]));
    for kind in ["polarity", "neutral"] {
        let out = ok(run(&[
            "--quiet", "--embeddings", &p("v.txt"), "train", "--kind", kind,
            "--data", &p("c.jsonl"), "--out", &p("m.json"),
        ]));
        let acc: f64 = out
            .split_whitespace()
            .find_map(|kv| kv.strip_prefix("test_accuracy="))
            .unwrap()
            .parse()
            .unwrap();
        assert!(acc >= 0.95, "{out}");
    }
}

#[test]
fn plain_output_format() {
    let out = ok(predict(fixture(), &["--text", "right001 right002 right003. plain001 plain002 plain003."]));
    let line = out.trim();
    let re_ok = line.starts_with("score=+") || line.starts_with("score=-");
    assert!(re_ok && line.contains(" bucket=") && line.ends_with("kept=1/2"), "{line}");
    let score = &line["score=".len()..line.find(' ').unwrap()];
    assert_eq!(score.split('.').nth(1).unwrap().len(), 2, "{line}");
}

#[test]
fn tepc_and_two_step_agree_on_neutral_free_text() {
    let text = "right001 right004 right007 plain002.";
    let two = ok(predict(fixture(), &["--text", text]));
    let tepc = ok(predict(fixture(), &["--text", text, "--mode", "tepc"]));
    let score = |s: &str| s.split_whitespace().next().unwrap().to_string();
    assert!(two.contains("kept=1/1"), "{two}");
    assert_eq!(score(&two), score(&tepc));
}

#[test]
fn all_neutral_is_an_answer() {
    let out = predict(fixture(), &["--text", "Qwxz blorf."]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "score=none bucket=all_neutral kept=0/1");
}

#[test]
fn empty_stdin_is_a_usage_error() {
    let f = fixture();
    let mut child = Command::new(BIN)
        .args([
            "--embeddings", &f.vectors(), "predict",
            "--polarity", &f.path("polarity.json").display().to_string(),
            "--neutral", &f.path("neutral.json").display().to_string(),
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    drop(child.stdin.take());
    assert_eq!(child.wait().unwrap().code(), Some(2));
}

#[test]
fn structured_output_parses_as_a_dataset_record() {
    let out = ok(predict(fixture(), &["--text", "right001 right002 right003.", "--output", "structured"]));
    let rec = parse_record(out.trim(), 1).unwrap();
    assert_eq!(rec.text, "right001 right002 right003.");
    assert!(Label::ALL.contains(&rec.label));
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert!(v["verdict"]["kept"].is_array());
}

#[test]
fn missing_data_file_exits_2_naming_the_path() {
    let f = fixture();
    let o = run(&[
        "--embeddings", &f.vectors(), "train", "--kind", "neutral",
        "--data", "/nonexistent/data.jsonl", "--out", "/tmp/never.json",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/data.jsonl"));
}

#[test]
fn missing_embeddings_flag_exits_2() {
    let o = run(&["train", "--kind", "neutral", "--data", "x.jsonl", "--out", "y.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_exits_2() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn oracle_dilution_has_a_flat_two_step_column() {
    let f = fixture();
    let out = f.path("oracle.csv");
    ok(run(&[
        "--quiet", "--embeddings", &f.vectors(), "experiment", "dilute",
        "--data", &f.path("corpus.jsonl").display().to_string(),
        "--polarity", &f.path("polarity.json").display().to_string(),
        "--oracle", "--out", &out.display().to_string(),
    ]));
    let rows = read_csv(&out);
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r[2] == rows[0][2]), "{rows:?}");
    assert_eq!(
        std::fs::read_to_string(&out).unwrap().lines().next(),
        Some("k,tepc_accuracy,two_step_accuracy")
    );
}

#[test]
fn evr_with_all_components_sums_to_one() {
    let f = fixture();
    let out = f.path("evr.csv");
    ok(run(&[
        "--quiet", "--embeddings", &f.vectors(), "experiment", "evr",
        "--data", &f.path("corpus.jsonl").display().to_string(),
        "--out", &out.display().to_string(),
    ]));
    let rows = read_csv(&out);
    assert_eq!(rows.len(), 16);
    let sum: f64 = rows.iter().map(|r| r[1].parse::<f64>().unwrap()).sum();
    assert!((sum - 1.0).abs() <= 1e-9, "{sum}");
}

#[test]
fn spearman_fixture_prints_point_eight() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ranks.csv");
    std::fs::write(&csv, "id,human,machine\na,1,1\nb,2,3\nc,3,2\nd,4,4\n").unwrap();
    let out = ok(run(&["experiment", "spearman", "--data", &csv.display().to_string()]));
    assert_eq!(out.trim(), "spearman_rho=0.8 n=4");
}

#[test]
fn grid_search_writes_a_report() {
    let f = fixture();
    let report = f.path("grid.json");
    let out = ok(run(&[
        "--quiet", "--embeddings", &f.vectors(), "train", "--kind", "neutral", "--grid",
        "--grid-lr", "0.05", "--grid-hidden", "8;", "--grid-l2", "0", "--epochs", "3",
        "--data", &f.path("corpus.jsonl").display().to_string(),
        "--out", &f.path("grid-model.json").display().to_string(),
        "--report", &report.display().to_string(),
    ]));
    assert!(out.contains("kind=neutral"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    let grid = v["grid"].as_array().unwrap();
    assert_eq!(grid.len(), 2);
    // Equal validation accuracy goes to the smaller (hidden-free) model.
    let best = grid
        .iter()
        .max_by(|a, b| {
            a["mean_validation_accuracy"]
                .as_f64()
                .partial_cmp(&b["mean_validation_accuracy"].as_f64())
                .unwrap()
                .then(b["param_count"].as_u64().cmp(&a["param_count"].as_u64()))
        })
        .unwrap();
    assert_eq!(v["hidden_sizes"], best["hidden_sizes"]);
}

#[test]
fn serve_answers_health_and_stops_on_sigterm() {
    let f = fixture();
    let mut child = Command::new(BIN)
        .args([
            "--embeddings", &f.vectors(), "serve", "--listen", "127.0.0.1:0",
            "--polarity", &f.path("polarity.json").display().to_string(),
            "--neutral", &f.path("neutral.json").display().to_string(),
        ])
        .env("RUST_LOG", "info")
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
    let deadline = Instant::now() + Duration::from_secs(30);
    let addr = loop {
        assert!(Instant::now() < deadline, "server did not report its address");
        let line = lines.next().expect("server exited early").unwrap();
        if let Some(rest) = line.split("listening on http://").nth(1) {
            break rest.trim().to_string();
        }
    };
    let mut stream = TcpStream::connect(&addr).unwrap();
    stream.set_read_timeout(Some(Duration::from_secs(10))).unwrap();
    write!(stream, "GET /healthz HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut resp = String::new();
    stream.read_to_string(&mut resp).unwrap();
    assert!(resp.starts_with("HTTP/1.1 200"), "{resp}");
    assert!(resp.contains("\"status\":\"ok\""), "{resp}");

    let killed = Command::new("kill").args(["-TERM", &child.id().to_string()]).status().unwrap();
    assert!(killed.success());
    assert_eq!(child.wait().unwrap().code(), Some(0));
}

#[test]
fn serve_with_bad_model_path_fails_before_binding() {
    let f = fixture();
    let o = run(&[
        "--embeddings", &f.vectors(), "serve", "--listen", "127.0.0.1:0",
        "--polarity", "/nonexistent/pol.json",
        "--neutral", &f.path("neutral.json").display().to_string(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/pol.json"));
}
