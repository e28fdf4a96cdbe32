use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn forge(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forge")).args(args).current_dir(cwd).output().expect("forge runs")
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn http_provider_without_base_url_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    std::fs::write(
        &config,
        "[run]\nname = \"x\"\nseed = 1\nout_dir = \"out\"\n\n[input]\nquestions = \"q.jsonl\"\n\n\
         [decontaminate]\nenabled = false\n\n[provider]\nkind = \"http\"\nmodel = \"m\"\n",
    )
    .unwrap();
    let o = forge(&["pipeline", "--config", config.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!dir.path().join("out/manifests").exists());
}

#[test]
fn missing_flags_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = forge(&["dedup", "--in", "questions.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--out"));
}

#[test]
fn unreadable_input_exits_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = forge(&["corpus", "dedup", "--in", "missing.jsonl", "--out", "o.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bench_validate_counts_venues_in_date_window() {
    let dir = tempfile::tempdir().unwrap();
    let bench = fixtures().join("mini_bench/bench.jsonl");
    let o = forge(&["bench", "validate", "--in", bench.to_str().unwrap()], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("records 12"), "{text}");
    assert!(text.contains("venue atcoder 6"));
    assert!(text.contains("venue leetcode 6"));

    let o =
        forge(&["bench", "validate", "--in", bench.to_str().unwrap(), "--from", "2409", "--to", "2412"], dir.path());
    let text = stdout(&o);
    assert!(text.contains("records 7"), "{text}");
}

#[test]
fn harness_drives_a_function_call_solution() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let o = forge(
        &[
            "bench",
            "harness",
            "--bench",
            fx.join("mini_bench/bench.jsonl").to_str().unwrap(),
            "--record",
            "lc_two_sum",
            "--solution",
            fx.join("mini_bench/solutions/lc_two_sum/correct.py").to_str().unwrap(),
            "--lang",
            "python",
            "--out",
            "driver.py",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut child = Command::new("python3")
        .arg(dir.path().join("driver.py"))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"[2,7,11,15], 9\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "[0,1]");
}

#[test]
fn metrics_report_matches_hand_computed_pass_at_k() {
    let dir = tempfile::tempdir().unwrap();
    // 3 samples, one correct: pass@2 = 1 - C(2,2)/C(3,2) = 2/3. The correct
    // sample has the only right judgment, so selection always finds it when
    // drawn (2 of 3 pairs) and otherwise falls back to a wrong one.
    let pools = r#"{"question_id":"q","difficulty":"easy","samples":[{"sample_index":0,"is_correct":true,"judgment":"right","critique_trace_length":5},{"sample_index":1,"is_correct":false,"judgment":"wrong","critique_trace_length":9},{"sample_index":2,"is_correct":false,"judgment":"wrong","critique_trace_length":7}]}"#;
    std::fs::write(dir.path().join("pools.jsonl"), format!("{pools}\n")).unwrap();
    let o = forge(
        &["metrics", "report", "--pools", "pools.jsonl", "--k", "2", "--resamples", "3000", "--out", "r.json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    let overall = &report["overall"];
    assert!((overall["pass_at_k"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!((overall["pass_at_1"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert!((overall["pass1_select_at_k"].as_f64().unwrap() - 2.0 / 3.0).abs() < 0.05);

    let o = forge(&["metrics", "curves", "--pools", "pools.jsonl", "--k-max", "3", "--out", "c.csv"], dir.path());
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().last().unwrap().starts_with("3,"));
}

#[test]
fn explicit_postprocess_and_exec_chain() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let questions = fx.join("pipeline/questions.jsonl");
    let source = std::fs::read_to_string(fx.join("mini_bench/solutions/atc_sum_to_n/correct.py")).unwrap();
    let good = format!("<think>\nsum the range\n</think>\n```python\n{}\n```", source.trim_end());
    let raw = [
        serde_json::json!({"question_id": "atc_sum_to_n", "sample_index": 0, "code_language": "python",
            "prompt_sha256": "0", "response": {"text": good, "finish_reason": "stop"}}),
        serde_json::json!({"question_id": "atc_sum_to_n", "sample_index": 1, "code_language": "python",
            "prompt_sha256": "0", "response": {"text": "no code here", "finish_reason": "stop"}}),
    ];
    let raw: String = raw.iter().map(|v| v.to_string() + "\n").collect();
    std::fs::write(dir.path().join("raw.jsonl"), raw).unwrap();

    let o = forge(
        &["postprocess", "--in", "raw.jsonl", "--out", "solutions.jsonl", "--rejections", "rej.jsonl"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("accepted 1 of 2"), "{}", stdout(&o));

    let o = forge(
        &[
            "exec",
            "run",
            "--solutions",
            "solutions.jsonl",
            "--questions",
            questions.to_str().unwrap(),
            "--timeout",
            "5",
            "--out",
            "results.jsonl",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let line = std::fs::read_to_string(dir.path().join("results.jsonl")).unwrap();
    let result: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(result["pass_rate"].as_f64(), Some(1.0));
}
