use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tempfile::TempDir;

use super::sandbox::{self, Gate, Limits};
use super::{select_tests, SandboxPolicy, Toolchain};
use crate::bench::build_harness_for;
use crate::postproc::ParsedSolution;
use crate::{CodeLanguage, Error, IoMode, Question, Result, TestCase};

const DIAGNOSTICS_KEEP: usize = 4096;
const STDERR_EXCERPT: usize = 2048;

static COMPILERS: Gate = Gate::new(2);

const CACHE_ENTRIES: usize = 4096;

/// Build results keyed by language, toolchain and source digest. Timed-out
/// builds are never stored.
static BUILDS: Lazy<Mutex<HashMap<String, Compiled>>> = Lazy::new(|| Mutex::new(HashMap::new()));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompileStatus {
    Ok,
    CompileError,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Pass,
    WrongAnswer,
    RuntimeError,
    Timeout,
    OutputLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub test_index: usize,
    pub status: VerdictStatus,
    /// Seconds.
    pub wall_time: f64,
    pub stderr_excerpt: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionResult {
    pub question_id: String,
    pub sample_index: u32,
    pub code_language: CodeLanguage,
    pub compile_status: CompileStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compile_diagnostics: Option<String>,
    /// Compiler or interpreter command line.
    pub runner: String,
    pub verdicts: Vec<TestVerdict>,
    pub pass_rate: f64,
}

impl ExecutionResult {
    /// Ground-truth label: every selected test passed.
    pub fn is_correct(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.status == VerdictStatus::Pass)
    }

    pub fn statuses(&self) -> Vec<VerdictStatus> {
        self.verdicts.iter().map(|v| v.status).collect()
    }
}

/// A runnable artifact; the directory lives as long as any clone.
#[derive(Debug, Clone)]
pub struct Program {
    argv: Vec<String>,
    dir: Arc<TempDir>,
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub status: CompileStatus,
    pub diagnostics: Option<String>,
    /// Present unless compilation failed.
    pub program: Option<Program>,
}

fn excerpt(bytes: &[u8], limit: usize) -> String {
    let text = String::from_utf8_lossy(bytes);
    if text.len() <= limit {
        return text.into_owned();
    }
    let mut end = limit;
    while !text.is_char_boundary(end) {
        end -= 1;
    }
    text[..end].to_string()
}

fn scratch() -> Result<TempDir> {
    tempfile::Builder::new()
        .prefix("forge-")
        .tempdir()
        .map_err(|e| Error::Sandbox(format!("cannot create scratch directory: {e}")))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Sandbox(format!("cannot write {}: {e}", path.display())))
}

fn compile_limits(policy: &SandboxPolicy) -> Limits {
    Limits { timeout: policy.compile_timeout(), memory: None, cpu_seconds: None, max_output: 1 << 20 }
}

/// Builds a runnable program from source.
///
/// C++ goes through the compiler; Python is only byte-compiled to catch
/// errors the grammar check lets through, and reports `not_applicable`.
///
/// Identical sources are built once per process.
pub fn compile_solution(
    source: &str,
    language: CodeLanguage,
    policy: &SandboxPolicy,
    toolchain: &Toolchain,
) -> Result<Compiled> {
    let mut h = Sha256::new();
    h.update(toolchain.describe(language).as_bytes());
    h.update([0]);
    h.update(source.as_bytes());
    let key = hex::encode(h.finalize());
    if let Some(hit) = BUILDS.lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let (compiled, timed_out) = build(source, language, policy, toolchain)?;
    if !timed_out {
        let mut cache = BUILDS.lock().unwrap();
        if cache.len() >= CACHE_ENTRIES {
            cache.clear();
        }
        cache.insert(key, compiled.clone());
    }
    Ok(compiled)
}

fn build(
    source: &str,
    language: CodeLanguage,
    policy: &SandboxPolicy,
    toolchain: &Toolchain,
) -> Result<(Compiled, bool)> {
    let dir = scratch()?;
    let (check, argv) = match language {
        CodeLanguage::Cpp => {
            let src = dir.path().join("main.cpp");
            let exe = dir.path().join("main");
            write_file(&src, source)?;
            let mut check = vec![toolchain.cxx.clone()];
            check.extend(toolchain.cxx_flags.iter().cloned());
            check.extend(["-o".into(), exe.display().to_string(), src.display().to_string()]);
            (check, vec![exe.display().to_string()])
        }
        CodeLanguage::Python => {
            let src = dir.path().join("main.py");
            write_file(&src, source)?;
            let mut check = vec![toolchain.python.clone()];
            check.extend(toolchain.python_flags.iter().cloned());
            check.extend([
                "-c".into(),
                "import sys\nwith open(sys.argv[1], encoding='utf-8') as f: compile(f.read(), sys.argv[1], 'exec')"
                    .into(),
                src.display().to_string(),
            ]);
            let mut argv = vec![toolchain.python.clone()];
            argv.extend(toolchain.python_flags.iter().cloned());
            argv.push(src.display().to_string());
            (check, argv)
        }
    };
    let outcome = {
        let _permit = COMPILERS.acquire();
        sandbox::run(&check, dir.path(), b"", &compile_limits(policy))?
    };
    if !outcome.success() {
        let mut diagnostics = excerpt(&outcome.stderr, DIAGNOSTICS_KEEP);
        if outcome.timed_out {
            diagnostics.insert_str(0, "compilation timed out\n");
        }
        let compiled = Compiled { status: CompileStatus::CompileError, diagnostics: Some(diagnostics), program: None };
        return Ok((compiled, outcome.timed_out));
    }
    let status = match language {
        CodeLanguage::Cpp => CompileStatus::Ok,
        CodeLanguage::Python => CompileStatus::NotApplicable,
    };
    let compiled = Compiled { status, diagnostics: None, program: Some(Program { argv, dir: Arc::new(dir) }) };
    Ok((compiled, false))
}

/// Strips trailing whitespace from every line and drops trailing blank lines.
pub fn normalize_output(text: &str) -> String {
    let mut lines: Vec<&str> = text.lines().map(str::trim_end).collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines.join("\n")
}

/// Runs one test in its own scratch directory.
pub fn run_one_test(
    program: &Program,
    test_index: usize,
    test: &TestCase,
    policy: &SandboxPolicy,
) -> Result<TestVerdict> {
    let dir = scratch()?;
    let limits = Limits {
        timeout: policy.test_timeout(),
        memory: Some(policy.memory_limit),
        cpu_seconds: Some(policy.per_test_timeout.ceil() as u64 + 1),
        max_output: policy.max_output,
    };
    let outcome = sandbox::run(&program.argv, dir.path(), test.input.as_bytes(), &limits)?;
    let status = if outcome.timed_out {
        VerdictStatus::Timeout
    } else if outcome.output_exceeded {
        VerdictStatus::OutputLimit
    } else if !outcome.success() {
        VerdictStatus::RuntimeError
    } else if normalize_output(&String::from_utf8_lossy(&outcome.stdout)) == normalize_output(&test.expected_output) {
        VerdictStatus::Pass
    } else {
        VerdictStatus::WrongAnswer
    };
    Ok(TestVerdict {
        test_index,
        status,
        wall_time: outcome.wall.as_secs_f64(),
        // build and scratch paths are random; keep excerpts reproducible
        stderr_excerpt: excerpt(&outcome.stderr, STDERR_EXCERPT)
            .replace(&program.dir.path().display().to_string(), ".")
            .replace(&dir.path().display().to_string(), "."),
    })
}

fn pass_rate(verdicts: &[TestVerdict]) -> f64 {
    if verdicts.is_empty() {
        return 0.0;
    }
    let passed = verdicts.iter().filter(|v| v.status == VerdictStatus::Pass).count();
    passed as f64 / verdicts.len() as f64
}

/// Selects tests, builds the program (through a generated driver for
/// starter-code questions) and runs every selected test.
pub fn evaluate_solution(
    question: &Question,
    solution: &ParsedSolution,
    sample_index: u32,
    policy: &SandboxPolicy,
    toolchain: &Toolchain,
    seed: u64,
) -> Result<ExecutionResult> {
    policy.validate()?;
    let tests = select_tests(question, seed)?;
    let language = solution.language;
    let mut result = ExecutionResult {
        question_id: question.id.clone(),
        sample_index,
        code_language: language,
        compile_status: CompileStatus::NotApplicable,
        compile_diagnostics: None,
        runner: toolchain.describe(language),
        verdicts: Vec::new(),
        pass_rate: 0.0,
    };

    let source = match question.io_mode {
        IoMode::StdinStdout => solution.final_source().to_string(),
        IoMode::FunctionCall => {
            let starter =
                question.starter_code.as_ref().and_then(|s| s.for_language(language)).ok_or_else(|| {
                    Error::Validation(format!("question {} has no {language} starter code", question.id))
                })?;
            let harness = build_harness_for(starter, solution.final_source(), language)?;
            if let Some(reason) = harness.invalid_reason {
                result.verdicts = (0..tests.len())
                    .map(|i| TestVerdict {
                        test_index: i,
                        status: VerdictStatus::RuntimeError,
                        wall_time: 0.0,
                        stderr_excerpt: format!("invalid harness: {reason}"),
                    })
                    .collect();
                return Ok(result);
            }
            harness.source
        }
    };

    let compiled = compile_solution(&source, language, policy, toolchain)?;
    result.compile_status = compiled.status;
    result.compile_diagnostics = compiled.diagnostics;
    let Some(program) = compiled.program else {
        return Ok(result);
    };
    result.verdicts =
        tests.par_iter().enumerate().map(|(i, t)| run_one_test(&program, i, t, policy)).collect::<Result<Vec<_>>>()?;
    result.pass_rate = pass_rate(&result.verdicts);
    Ok(result)
}

/// One solution to evaluate in a batch.
#[derive(Debug, Clone, Copy)]
pub struct EvalJob<'a> {
    pub question: &'a Question,
    pub solution: &'a ParsedSolution,
    pub sample_index: u32,
}

/// Evaluates jobs on a pool of `workers` threads; results keep job order.
pub fn evaluate_batch(
    jobs: &[EvalJob<'_>],
    policy: &SandboxPolicy,
    toolchain: &Toolchain,
    seed: u64,
    workers: usize,
) -> Result<Vec<Result<ExecutionResult>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Sandbox(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|job| evaluate_solution(job.question, job.solution, job.sample_index, policy, toolchain, seed))
            .collect()
    }))
}

/// Default worker count: one per logical core.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Difficulty, Source};

    fn policy(timeout: f64) -> SandboxPolicy {
        SandboxPolicy { per_test_timeout: timeout, ..SandboxPolicy::default() }
    }

    fn doubler_question(expected: &[&str]) -> Question {
        Question {
            id: "double".into(),
            source: Source::Other,
            statement: "print twice n".into(),
            difficulty: Difficulty::Easy,
            tests: expected.iter().enumerate().map(|(i, e)| TestCase::new(format!("{}\n", i + 1), *e)).collect(),
            io_mode: IoMode::StdinStdout,
            starter_code: None,
            date_tag: None,
        }
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_output("6  \n\n\n"), "6");
        assert_eq!(normalize_output("a \r\nb\t\n"), "a\nb");
        assert_eq!(normalize_output(""), "");
        assert_ne!(normalize_output(" 6"), normalize_output("6"));
    }

    #[test]
    fn cpp_compiles() {
        let tc = Toolchain::default();
        let ok = compile_solution("int main(){return 0;}", CodeLanguage::Cpp, &policy(10.0), &tc).unwrap();
        assert_eq!(ok.status, CompileStatus::Ok);
        let bad = compile_solution("int main({", CodeLanguage::Cpp, &policy(10.0), &tc).unwrap();
        assert_eq!(bad.status, CompileStatus::CompileError);
        assert!(bad.diagnostics.unwrap().len() <= DIAGNOSTICS_KEEP);
        let py = compile_solution("print(1)", CodeLanguage::Python, &policy(10.0), &tc).unwrap();
        assert_eq!(py.status, CompileStatus::NotApplicable);
    }

    #[test]
    fn run_verdicts() {
        let tc = Toolchain::default();
        let p = policy(2.0);
        let doubler =
            compile_solution("print(int(input()) * 2)", CodeLanguage::Python, &p, &tc).unwrap().program.unwrap();
        let v = run_one_test(&doubler, 0, &TestCase::new("3", "6"), &p).unwrap();
        assert_eq!(v.status, VerdictStatus::Pass);
        let v = run_one_test(&doubler, 0, &TestCase::new("3", "7"), &p).unwrap();
        assert_eq!(v.status, VerdictStatus::WrongAnswer);
        let v = run_one_test(&doubler, 0, &TestCase::new("x", "7"), &p).unwrap();
        assert_eq!(v.status, VerdictStatus::RuntimeError);
        assert!(v.stderr_excerpt.contains("ValueError"));

        let spin = compile_solution("while True:\n    pass", CodeLanguage::Python, &p, &tc).unwrap().program.unwrap();
        let v = run_one_test(&spin, 0, &TestCase::new("", ""), &p).unwrap();
        assert_eq!(v.status, VerdictStatus::Timeout);
        assert!(v.wall_time >= 2.0);

        let flood = compile_solution("while True:\n    print('x' * 1000)", CodeLanguage::Python, &p, &tc)
            .unwrap()
            .program
            .unwrap();
        let small = SandboxPolicy { max_output: 10_000, ..p.clone() };
        assert_eq!(run_one_test(&flood, 0, &TestCase::new("", ""), &small).unwrap().status, VerdictStatus::OutputLimit);
    }

    #[test]
    fn pass_rates() {
        let tc = Toolchain::default();
        let sol = ParsedSolution::from_source(CodeLanguage::Python, "print(int(input()) * 2)");
        let all =
            evaluate_solution(&doubler_question(&["2", "4", "6", "8", "10"]), &sol, 0, &policy(5.0), &tc, 1).unwrap();
        assert_eq!(all.pass_rate, 1.0);
        assert!(all.is_correct());
        let some =
            evaluate_solution(&doubler_question(&["2", "4", "6", "0", "0"]), &sol, 0, &policy(5.0), &tc, 1).unwrap();
        assert_eq!(some.pass_rate, 0.6);
        assert!(!some.is_correct());

        let broken = ParsedSolution::from_source(CodeLanguage::Cpp, "int main({");
        let r = evaluate_solution(&doubler_question(&["2"; 5]), &broken, 0, &policy(5.0), &tc, 1).unwrap();
        assert_eq!((r.compile_status, r.pass_rate, r.verdicts.len()), (CompileStatus::CompileError, 0.0, 0));

        assert!(matches!(
            evaluate_solution(&doubler_question(&["2"; 3]), &sol, 0, &policy(5.0), &tc, 1),
            Err(Error::NotEnoughTests { .. })
        ));
    }

    #[test]
    fn scratch_directories_are_isolated() {
        let tc = Toolchain::default();
        let p = policy(5.0);
        let src = "import os\nprint(len(os.listdir('.')))\nopen('junk', 'w').write('x')";
        let prog = compile_solution(src, CodeLanguage::Python, &p, &tc).unwrap().program.unwrap();
        for i in 0..3 {
            assert_eq!(run_one_test(&prog, i, &TestCase::new("", "0"), &p).unwrap().status, VerdictStatus::Pass);
        }
    }
}
