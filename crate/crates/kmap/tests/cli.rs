//! Drives the kmap binary the way a shell user would and checks the
//! command-line contract: exit codes, stream separation, and output shapes.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::sync::OnceLock;

fn kmap() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kmap"))
}

fn run(args: &[&str]) -> Output {
    kmap().args(args).output().expect("spawn kmap")
}

fn run_with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = kmap()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn kmap");
    // A child that rejects its flags exits without draining stdin; the
    // resulting broken pipe is not a test failure.
    let _ = child.stdin.take().expect("stdin handle").write_all(input);
    child.wait_with_output().expect("wait for kmap")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// A small synthetic corpus plus a model trained on it, built once and
/// shared by the tests that need a working training pipeline.
struct Fixture {
    corpus: PathBuf,
    model: PathBuf,
}

fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let root = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli_fixture");
        if root.exists() {
            std::fs::remove_dir_all(&root).expect("clear stale fixture");
        }
        std::fs::create_dir_all(&root).expect("create fixture dir");
        let corpus = root.join("corpus");
        let model = root.join("model.json");

        let synth = run(&[
            "synth",
            "--out",
            corpus.to_str().unwrap(),
            "--per-kind",
            "4",
            "--length",
            "4096",
            "--seed",
            "7",
        ]);
        assert_eq!(exit_code(&synth), 0, "synth failed: {}", stderr_of(&synth));

        let train = run(&[
            "train",
            "--corpus",
            corpus.to_str().unwrap(),
            "--model-out",
            model.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&train), 0, "train failed: {}", stderr_of(&train));
        Fixture { corpus, model }
    })
}

#[test]
fn version_names_the_model_format() {
    let out = run(&["--version"]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout_of(&out).trim(), "kmap 0.1.0 (model format v1)");
}

#[test]
fn estimate_prints_one_line_per_estimator() {
    let out = run_with_stdin(&["estimate", "-"], &[0xAAu8; 512]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let stdout = stdout_of(&out);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 5, "one line per default estimator: {stdout}");
    for (line, id) in lines.iter().zip(["H", "LZ", "ZIP", "BZ", "PSI"]) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(fields.len(), 4, "id, value, bits, elapsed: {line}");
        assert_eq!(fields[0], id);
        let value: f64 = fields[1].parse().expect("value parses");
        assert!((0.0..=1.0).contains(&value), "value in [0, 1]: {line}");
        fields[2].parse::<u64>().expect("raw bits parse");
        assert!(fields[3].ends_with("us"), "elapsed carries a unit: {line}");
    }
}

#[test]
fn estimate_caps_whole_input_size() {
    let dir = tempfile::tempdir().expect("tempdir");
    let big = dir.path().join("big.bin");
    std::fs::write(&big, vec![0u8; 262_145]).expect("write input");
    let out = run(&["estimate", big.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 3);
    assert!(
        stderr_of(&out).contains("map"),
        "oversize diagnostic points at the map command: {}",
        stderr_of(&out)
    );
}

#[test]
fn missing_input_is_an_io_error() {
    let out = run(&["estimate", "/no/such/file"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).starts_with("error:"));
}

#[test]
fn unknown_estimator_diagnostic_names_the_valid_ids() {
    let out = run_with_stdin(&["estimate", "-", "--estimators", "WAT"], b"x");
    assert_eq!(exit_code(&out), 3);
    let diag = stderr_of(&out);
    for id in ["H", "LZ", "ZIP", "BZ", "PSI"] {
        assert!(diag.contains(id), "diagnostic lists {id}: {diag}");
    }
}

#[test]
fn passthrough_requires_an_output_path() {
    let out = run_with_stdin(&["map", "--passthrough"], b"hello");
    assert_eq!(exit_code(&out), 3);
    assert!(stderr_of(&out).contains("--output"));
}

#[test]
fn passthrough_echoes_stdin_and_writes_the_map_aside() {
    let dir = tempfile::tempdir().expect("tempdir");
    let map_path = dir.path().join("map.csv");
    let payload: Vec<u8> = (0..2048u32).map(|i| (i % 251) as u8).collect();
    let out = run_with_stdin(
        &[
            "map",
            "--passthrough",
            "--window-size",
            "256",
            "--estimators",
            "H",
            "--output",
            map_path.to_str().unwrap(),
        ],
        &payload,
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    assert_eq!(out.stdout, payload, "stdout is the verbatim input");
    let map = std::fs::read_to_string(&map_path).expect("map file");
    assert!(map.starts_with("window_index,offset,length,"));
    assert_eq!(map.lines().count(), 1 + 2048 / 256);
}

#[test]
fn train_then_classify_recovers_the_label() {
    let fix = fixture();
    let sample = fix.corpus.join("repeated_pattern/sample_00.bin");
    let out = run(&[
        "classify",
        sample.to_str().unwrap(),
        "--model",
        fix.model.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    assert_eq!(stdout_of(&out).trim(), "repeated_pattern");
}

#[test]
fn eval_reports_confusion_and_overall_accuracy() {
    let fix = fixture();
    let out = run(&[
        "eval",
        "--corpus",
        fix.corpus.to_str().unwrap(),
        "--model",
        fix.model.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let stdout = stdout_of(&out);
    assert!(stdout.starts_with("actual,predicted,count\n"));
    assert!(stdout.contains("\ngroup,accuracy\n"));
    let overall = stdout
        .lines()
        .find_map(|l| l.strip_prefix("overall,"))
        .expect("overall line");
    let overall: f64 = overall.parse().expect("overall parses");
    assert!((0.0..=1.0).contains(&overall));
}

#[test]
fn merge_suggest_lists_pairs_in_ascending_order() {
    let fix = fixture();
    let out = run(&[
        "merge-suggest",
        "--model",
        fix.model.to_str().unwrap(),
        "--threshold",
        "1e12",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let stdout = stdout_of(&out);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("a,b,squared_distance"));
    let d2: Vec<f64> = lines
        .map(|l| l.rsplit(',').next().unwrap().parse().expect("d2 parses"))
        .collect();
    assert_eq!(d2.len(), 10, "all pairs of five kinds fall below 1e12");
    assert!(d2.windows(2).all(|w| w[0] <= w[1]), "ascending: {d2:?}");
}

#[test]
fn map_with_model_keeps_stdout_machine_readable() {
    let fix = fixture();
    let sample = fix.corpus.join("markov_text/sample_01.bin");
    let out = run(&[
        "map",
        sample.to_str().unwrap(),
        "--model",
        fix.model.to_str().unwrap(),
        "--output-mode",
        "single-type",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).starts_with("window_index,offset,length,"));
    assert!(
        stderr_of(&out).contains("predicted type:"),
        "summary goes to stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn map_needs_the_models_estimators() {
    let fix = fixture();
    let sample = fix.corpus.join("markov_text/sample_00.bin");
    let out = run(&[
        "map",
        sample.to_str().unwrap(),
        "--model",
        fix.model.to_str().unwrap(),
        "--estimators",
        "H",
    ]);
    assert_eq!(exit_code(&out), 4, "stderr: {}", stderr_of(&out));
}

#[test]
fn corrupt_model_files_are_rejected() {
    let dir = tempfile::tempdir().expect("tempdir");
    let model = dir.path().join("model.json");
    std::fs::write(&model, "not json").expect("write model");
    let out = run_with_stdin(&["classify", "-", "--model", model.to_str().unwrap()], b"x");
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).contains("model"));
}

#[test]
fn training_needs_two_samples_per_group() {
    let dir = tempfile::tempdir().expect("tempdir");
    let corpus = dir.path().join("corpus");
    let synth = run(&[
        "synth",
        "--out",
        corpus.to_str().unwrap(),
        "--per-kind",
        "1",
        "--length",
        "4096",
        "--seed",
        "3",
    ]);
    assert_eq!(exit_code(&synth), 0, "stderr: {}", stderr_of(&synth));
    let out = run(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--model-out",
        dir.path().join("model.json").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 5, "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("need at least 2"));
}

#[test]
fn bench_rejects_unknown_figures_at_the_cli() {
    let fix = fixture();
    let out = run(&[
        "bench",
        "--corpus",
        fix.corpus.to_str().unwrap(),
        "--figure",
        "fig99",
    ]);
    assert_eq!(exit_code(&out), 3, "stderr: {}", stderr_of(&out));
}

#[test]
fn dump_config_emits_the_effective_json() {
    let out = run(&[
        "map",
        "--window-size",
        "512",
        "--estimators",
        "H,LZ",
        "--dump-config",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let dump: serde_json::Value = serde_json::from_str(&stdout_of(&out)).expect("valid JSON");
    assert_eq!(dump["command"], "map");
    assert_eq!(dump["probe"]["window_size"], 512);
    assert_eq!(dump["probe"]["estimators"], serde_json::json!(["H", "LZ"]));
}

#[test]
fn synth_writes_a_loadable_manifest() {
    let fix = fixture();
    let dir = tempfile::tempdir().expect("tempdir");
    let manifest = fix.corpus.join("manifest.jsonl");
    let out = run(&[
        "train",
        "--corpus",
        manifest.to_str().unwrap(),
        "--model-out",
        dir.path().join("model.json").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(
        stdout_of(&out).contains("repeated_pattern,4"),
        "per-type counts on stdout: {}",
        stdout_of(&out)
    );
}
