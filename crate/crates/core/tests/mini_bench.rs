use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use reasonforge::bench::load_benchmark;
use reasonforge::exec::{evaluate_batch, EvalJob, SandboxPolicy, Toolchain, VerdictStatus};
use reasonforge::postproc::ParsedSolution;
use reasonforge::{CodeLanguage, Question};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini_bench")
}

fn fraction(text: &str) -> (usize, usize) {
    let (a, b) = text.split_once('/').unwrap();
    (a.parse().unwrap(), b.parse().unwrap())
}

#[test]
fn variants_match_hand_derived_pass_rates() {
    let dir = fixtures();
    let records = load_benchmark(&dir.join("bench.jsonl"), false).unwrap().records;
    assert_eq!(records.len(), 12);
    let expected: BTreeMap<String, BTreeMap<String, String>> =
        toml::from_str(&std::fs::read_to_string(dir.join("expected.toml")).unwrap()).unwrap();
    let questions: Vec<Question> = records.iter().map(|r| r.to_question()).collect();

    let mut cases = Vec::new();
    for q in &questions {
        for label in expected[&q.id].keys() {
            for (lang, ext) in [(CodeLanguage::Python, "py"), (CodeLanguage::Cpp, "cpp")] {
                let path = dir.join("solutions").join(&q.id).join(format!("{label}.{ext}"));
                let src = std::fs::read_to_string(&path).unwrap();
                cases.push((q, label.clone(), ParsedSolution::from_source(lang, src)));
            }
        }
    }
    let jobs: Vec<EvalJob> = cases
        .iter()
        .enumerate()
        .map(|(i, (q, _, s))| EvalJob { question: q, solution: s, sample_index: i as u32 })
        .collect();
    let policy = SandboxPolicy { per_test_timeout: 2.0, ..SandboxPolicy::default() };
    let results = evaluate_batch(&jobs, &policy, &Toolchain::default(), 0, 8).unwrap();

    let mut failures = Vec::new();
    for ((q, label, s), r) in cases.iter().zip(results) {
        let r = r.unwrap();
        let (passed, total) = fraction(&expected[&q.id][label]);
        let got = r.statuses().iter().filter(|&&st| st == VerdictStatus::Pass).count();
        let mut ok = r.verdicts.len() == total && got == passed;
        match label.as_str() {
            "crash" => ok &= r.statuses().iter().all(|&st| st == VerdictStatus::RuntimeError),
            "infinite_loop" => ok &= r.statuses().iter().all(|&st| st == VerdictStatus::Timeout),
            "correct" => ok &= r.is_correct(),
            _ => ok &= !r.is_correct(),
        }
        if !ok {
            failures.push(format!(
                "{} {label} {}: expected {passed}/{total}, got {:?} {:?}",
                q.id,
                s.language,
                r.statuses(),
                r.compile_diagnostics.as_deref().or(r.verdicts.first().map(|v| v.stderr_excerpt.as_str()))
            ));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
