//! Scripted mock responses built from reference solution variants.
//!
//! A directory `<question id>/<label>.<py|cpp>` is turned into solution
//! responses (one per label, plus optionally one without a think span) for
//! each question's solution prompt, and into critique responses for the
//! critique prompt of every variant. Variants labelled `correct` get short
//! traces that mostly conclude right; the others get long traces that mostly
//! conclude wrong.

use std::path::Path;

use super::records::fenced;
use crate::llm::{render_critique_prompt, render_solution_prompt, MockScript, RawResponse};
use crate::{CodeLanguage, Error, Question, Result};

pub const CORRECT_LABEL: &str = "correct";

fn extension(language: CodeLanguage) -> &'static str {
    match language {
        CodeLanguage::Python => "py",
        CodeLanguage::Cpp => "cpp",
    }
}

fn solution_response(label: &str, language: CodeLanguage, source: &str) -> RawResponse {
    let trace = match label {
        CORRECT_LABEL => "Restate the task, work out the formula on the samples, then handle the boundary values before writing the final loop.",
        _ => "Restate the task and write the loop. The samples look fine, so the bounds are probably right.",
    };
    RawResponse::stop(format!(
        "<think>\n{trace}\n</think>\nThe solution follows the plan above.\n\n{}",
        fenced(language, source)
    ))
}

fn malformed_response(language: CodeLanguage, source: &str) -> RawResponse {
    RawResponse::stop(format!("Here is the code.\n\n{}", fenced(language, source)))
}

fn critique(trace: &str, judgment: &str) -> RawResponse {
    RawResponse::stop(format!(
        "<think>\n{trace}\n</think>\nSummary of the review above.\n\n<judgment>{judgment}</judgment>"
    ))
}

fn critique_responses(correct: bool) -> Vec<RawResponse> {
    if correct {
        vec![
            critique("The loop covers every value and the output format matches. Looks correct.", "right"),
            critique("Checked both samples and the smallest input; all agree with the expected output.", "right"),
            critique(
                "The logic matches the statement on the samples. I am not sure the smallest input is handled, \
                 since the loop bounds depend on the size and an empty range would print the initial value. \
                 Tracing it suggests the result is fine, but the reasoning is not conclusive, so I will flag it.",
                "wrong",
            ),
        ]
    } else {
        vec![
            critique(
                "Walk through the first sample. The loop starts at the right place, but the last index is never \
                 visited because the range stops one short. On the second sample that drops a value that changes \
                 the answer. The boundary case with the smallest input also gives the initial value instead of \
                 the real one. The approach is fine but the bounds are off by one, so the output is incorrect on \
                 several tests.",
                "wrong",
            ),
            critique(
                "Walk through the first sample step by step. The loop processes the values in order and the \
                 running result after each step matches what I compute by hand. The range bound looks suspicious \
                 at first, because it stops one position early, but on the provided sample the skipped position \
                 does not affect the answer. I also considered the case of the smallest possible input and the \
                 largest one, and the complexity is linear. I could not build a failing case quickly, so I will \
                 accept it, although the bound remains the weakest part of the code.",
                "right",
            ),
            critique(
                "Most of the logic is sound but one boundary is handled incorrectly; it works on some inputs only.",
                "partially correct",
            ),
        ]
    }
}

/// Builds the script for `questions` in `languages` from the variant
/// directory. Questions without variant files are left unscripted.
pub fn script_from_solutions(
    questions: &[Question],
    languages: &[CodeLanguage],
    dir: &Path,
    labels: &[String],
    malformed: bool,
) -> Result<MockScript> {
    if !dir.is_dir() {
        return Err(Error::Validation(format!("mock solution directory {} does not exist", dir.display())));
    }
    let mut script = MockScript::new();
    for q in questions {
        for &lang in languages {
            let mut variants = Vec::new();
            for label in labels {
                let path = dir.join(&q.id).join(format!("{label}.{}", extension(lang)));
                if path.is_file() {
                    let source = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                    variants.push((label.as_str(), source));
                }
            }
            if variants.is_empty() {
                continue;
            }
            let prompt = render_solution_prompt(q, lang)?;
            let mut responses: Vec<RawResponse> =
                variants.iter().map(|(label, src)| solution_response(label, lang, src)).collect();
            if malformed {
                responses.push(malformed_response(lang, &variants[0].1));
            }
            script.add(&prompt, responses);
            for (label, src) in &variants {
                let prompt = render_critique_prompt(q, &fenced(lang, src))?;
                script.add(&prompt, critique_responses(*label == CORRECT_LABEL));
            }
        }
    }
    Ok(script)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::postproc::{parse_critique_response, parse_solution_response, RejectReason};
    use crate::{Difficulty, IoMode, Judgment, Source, TestCase};

    #[test]
    fn builds_parseable_responses() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("q1")).unwrap();
        std::fs::write(dir.path().join("q1/correct.py"), "print(input())\n").unwrap();
        std::fs::write(dir.path().join("q1/off_by_one.py"), "print(input()[1:])\n").unwrap();
        let q = Question {
            id: "q1".into(),
            source: Source::Atcoder,
            statement: "Echo the line.".into(),
            difficulty: Difficulty::Easy,
            tests: vec![TestCase::new("a", "a")],
            io_mode: IoMode::StdinStdout,
            starter_code: None,
            date_tag: None,
        };
        let labels = vec!["correct".to_string(), "off_by_one".to_string()];
        let script = script_from_solutions(
            std::slice::from_ref(&q),
            &[CodeLanguage::Python, CodeLanguage::Cpp],
            dir.path(),
            &labels,
            true,
        )
        .unwrap();
        // one solution prompt and two critique prompts, python only
        assert_eq!(script.len(), 3);
        let sol = script.get(&render_solution_prompt(&q, CodeLanguage::Python).unwrap()).unwrap();
        assert_eq!(sol.len(), 3);
        let parsed = parse_solution_response(&sol[0], CodeLanguage::Python).unwrap();
        assert_eq!(parsed.final_source(), "print(input())");
        assert_eq!(parse_solution_response(&sol[2], CodeLanguage::Python).unwrap_err(), RejectReason::MissingThink);

        let crit = script
            .get(&render_critique_prompt(&q, &fenced(CodeLanguage::Python, parsed.final_source())).unwrap())
            .unwrap();
        let good: Vec<_> = crit.iter().map(parse_critique_response).collect();
        assert_eq!(good[0].as_ref().unwrap().judgment, Judgment::Right);
        let bad_prompt = render_critique_prompt(&q, &fenced(CodeLanguage::Python, "print(input()[1:])")).unwrap();
        let bad: Vec<_> = script.get(&bad_prompt).unwrap().iter().map(parse_critique_response).collect();
        assert_eq!(bad[2].as_ref().unwrap_err(), &RejectReason::NonBinaryJudgment);
        // wrong variants carry longer traces than right ones
        assert!(bad[0].as_ref().unwrap().trace_length > good[1].as_ref().unwrap().trace_length);
    }
}
