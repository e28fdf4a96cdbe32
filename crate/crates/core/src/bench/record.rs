use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Difficulty, Error, IoMode, Question, Result, Source, StarterCode, TestCase};

/// Identifier of the record layout accepted by [`load_benchmark`].
pub const BENCH_SCHEMA_ID: &str = "reasonforge.bench-record.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Venue {
    Atcoder,
    Leetcode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkRecord {
    pub problem_id: String,
    pub venue: Venue,
    /// Contest date as YYMM.
    pub date_tag: u32,
    pub difficulty: Difficulty,
    pub statement: String,
    pub io_mode: IoMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starter_code: Option<StarterCode>,
    pub tests: Vec<TestCase>,
}

impl BenchmarkRecord {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(format!("record {}: {msg}", self.problem_id)));
        if self.problem_id.is_empty() {
            return fail("empty problem_id".into());
        }
        if self.statement.trim().is_empty() {
            return fail("empty statement".into());
        }
        let month = self.date_tag % 100;
        if !(1..=12).contains(&month) || self.date_tag > 9999 {
            return fail(format!("date_tag {} is not a YYMM value", self.date_tag));
        }
        if self.difficulty == Difficulty::Unknown {
            return fail("difficulty must be easy, medium or hard".into());
        }
        match self.venue {
            Venue::Leetcode => {
                if self.io_mode != IoMode::FunctionCall {
                    return fail("leetcode records must use function_call".into());
                }
                if self.starter_code.as_ref().is_none_or(StarterCode::is_blank) {
                    return fail("leetcode records need starter_code".into());
                }
            }
            Venue::Atcoder => {
                if self.io_mode != IoMode::StdinStdout {
                    return fail("atcoder records must use stdin_stdout".into());
                }
            }
        }
        if self.tests.is_empty() {
            return fail("no tests".into());
        }
        Ok(())
    }

    pub fn to_question(&self) -> Question {
        Question {
            id: self.problem_id.clone(),
            source: match self.venue {
                Venue::Atcoder => Source::Atcoder,
                Venue::Leetcode => Source::Leetcode,
            },
            statement: self.statement.clone(),
            difficulty: self.difficulty,
            tests: self.tests.clone(),
            io_mode: self.io_mode,
            starter_code: self.starter_code.clone(),
            date_tag: Some(self.date_tag),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub records: Vec<BenchmarkRecord>,
    /// `(line number, problem)` for records skipped in lenient mode.
    pub skipped: Vec<(usize, String)>,
}

/// Reads and validates a benchmark JSONL file.
///
/// Strict mode fails on the first invalid record; lenient mode skips it and
/// reports the line number.
pub fn load_benchmark(path: &Path, lenient: bool) -> Result<LoadReport> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut report = LoadReport::default();
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let checked = serde_json::from_str::<BenchmarkRecord>(&line)
            .map_err(|e| e.to_string())
            .and_then(|r| r.validate().map(|_| r).map_err(|e| e.to_string()))
            .and_then(|r| {
                if seen.insert(r.problem_id.clone()) {
                    Ok(r)
                } else {
                    Err(format!("duplicate problem_id {}", r.problem_id))
                }
            });
        match checked {
            Ok(r) => report.records.push(r),
            Err(message) if lenient => {
                tracing::warn!(line = line_no, %message, "skipping invalid benchmark record");
                report.skipped.push((line_no, message));
            }
            Err(message) => return Err(Error::Parse { path: path.to_path_buf(), line: line_no, message }),
        }
    }
    Ok(report)
}

/// Keeps records with `from_tag <= date_tag <= to_tag`, preserving order.
pub fn filter_by_date(records: &[BenchmarkRecord], from_tag: u32, to_tag: u32) -> Vec<BenchmarkRecord> {
    records.iter().filter(|r| (from_tag..=to_tag).contains(&r.date_tag)).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, date: u32) -> BenchmarkRecord {
        BenchmarkRecord {
            problem_id: id.into(),
            venue: Venue::Atcoder,
            date_tag: date,
            difficulty: Difficulty::Easy,
            statement: "s".into(),
            io_mode: IoMode::StdinStdout,
            starter_code: None,
            tests: vec![TestCase::new("1", "1")],
        }
    }

    #[test]
    fn date_boundaries_inclusive() {
        let recs = [record("a", 2407), record("b", 2408), record("c", 2502), record("d", 2503)];
        let ids: Vec<_> = filter_by_date(&recs, 2408, 2502).into_iter().map(|r| r.problem_id).collect();
        assert_eq!(ids, ["b", "c"]);
    }

    #[test]
    fn coupling_rules() {
        let mut r = record("x", 2410);
        r.venue = Venue::Leetcode;
        assert!(r.validate().is_err());
        r.io_mode = IoMode::FunctionCall;
        assert!(r.validate().is_err(), "missing starter code");
        r.starter_code = Some("class Solution:\n    def f(self): pass".into());
        assert!(r.validate().is_ok());
        let mut r = record("y", 2413);
        assert!(r.validate().is_err());
        r.date_tag = 2412;
        r.io_mode = IoMode::FunctionCall;
        assert!(r.validate().is_err());
    }

    #[test]
    fn strict_and_lenient_loading() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.jsonl");
        let good = serde_json::to_string(&record("a", 2409)).unwrap();
        let bad = r#"{"problem_id":"lc1","venue":"leetcode","date_tag":2410,"difficulty":"easy","statement":"s","io_mode":"function_call","tests":[{"input":"1","expected_output":"1"}]}"#;
        std::fs::write(&path, format!("{good}\n{bad}\n")).unwrap();
        match load_benchmark(&path, false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected schema error, got {other:?}"),
        }
        let report = load_benchmark(&path, true).unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.skipped[0].0, 2);

        std::fs::write(&path, "").unwrap();
        assert!(load_benchmark(&path, false).unwrap().records.is_empty());
    }
}
