use serde::{Deserialize, Serialize};

use super::{extract_code_blocks, extract_think, validate_syntax, CodeBlock};
use crate::llm::{FinishReason, RawResponse};
use crate::{CodeLanguage, Judgment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    MissingThink,
    MissingCodeBlock,
    SyntaxInvalid,
    MissingJudgment,
    NonBinaryJudgment,
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reject_reason: Option<RejectReason>,
}

impl FilterOutcome {
    pub fn of<T>(result: &Result<T, RejectReason>) -> Self {
        match result {
            Ok(_) => Self { accepted: true, reject_reason: None },
            Err(reason) => Self { accepted: false, reject_reason: Some(*reason) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedSolution {
    pub language: CodeLanguage,
    pub reasoning_trace: String,
    /// Everything after `</think>`.
    pub answer_text: String,
    pub code_blocks: Vec<CodeBlock>,
    /// Parse verdict for the final block.
    pub syntax_valid: bool,
}

impl ParsedSolution {
    /// The last block in the wanted language.
    pub fn final_source(&self) -> &str {
        self.code_blocks.iter().rev().find(|b| b.language == self.language).map(|b| b.source.as_str()).unwrap_or("")
    }

    /// Builds an accepted solution directly from source code.
    pub fn from_source(language: CodeLanguage, source: impl Into<String>) -> Self {
        let source = source.into();
        Self {
            language,
            reasoning_trace: String::new(),
            answer_text: String::new(),
            syntax_valid: validate_syntax(&source, language),
            code_blocks: vec![CodeBlock { language, source }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Critique {
    pub reasoning_trace: String,
    pub judgment: Judgment,
    /// Length of the trace in unicode scalar values.
    pub trace_length: u64,
}

/// think span, then code fences in the answer, then a syntax check of the
/// final block of the wanted language.
pub fn parse_solution_response(raw: &RawResponse, wanted: CodeLanguage) -> Result<ParsedSolution, RejectReason> {
    if raw.finish_reason == FinishReason::Length {
        return Err(RejectReason::Truncated);
    }
    let (trace, answer) = extract_think(&raw.text)?;
    let code_blocks = extract_code_blocks(answer, wanted)?;
    let mut parsed = ParsedSolution {
        language: wanted,
        reasoning_trace: trace.to_string(),
        answer_text: answer.to_string(),
        code_blocks,
        syntax_valid: false,
    };
    parsed.syntax_valid = validate_syntax(parsed.final_source(), wanted);
    if parsed.syntax_valid {
        Ok(parsed)
    } else {
        Err(RejectReason::SyntaxInvalid)
    }
}

const JUDGMENT_OPEN: &str = "<judgment>";
const JUDGMENT_CLOSE: &str = "</judgment>";

// Content of the last closed judgment span.
fn last_judgment(text: &str) -> Option<&str> {
    let mut found = None;
    let mut rest = text;
    while let Some(open) = rest.find(JUDGMENT_OPEN) {
        let after = &rest[open + JUDGMENT_OPEN.len()..];
        match after.find(JUDGMENT_CLOSE) {
            Some(close) => {
                found = Some(&after[..close]);
                rest = &after[close + JUDGMENT_CLOSE.len()..];
            }
            None => break,
        }
    }
    found
}

/// Requires a binary `<judgment>` after the reasoning and a well-formed
/// think span. Judgment text is matched case-insensitively after trimming.
pub fn parse_critique_response(raw: &RawResponse) -> Result<Critique, RejectReason> {
    if raw.finish_reason == FinishReason::Length {
        return Err(RejectReason::Truncated);
    }
    let text = raw.text.as_str();
    let answer_region = text.rfind("</think>").map_or(text, |i| &text[i..]);
    let judgment =
        match last_judgment(answer_region).ok_or(RejectReason::MissingJudgment)?.trim().to_lowercase().as_str() {
            "right" => Judgment::Right,
            "wrong" => Judgment::Wrong,
            _ => return Err(RejectReason::NonBinaryJudgment),
        };
    let (trace, _) = extract_think(text)?;
    Ok(Critique { reasoning_trace: trace.to_string(), judgment, trace_length: trace.chars().count() as u64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GOOD_PY: &str = "<think>read n, print double</think>\nAnswer:\n```python\nprint(int(input()) * 2)\n```\n";

    #[test]
    fn accepts_well_formed_solution() {
        let parsed = parse_solution_response(&RawResponse::stop(GOOD_PY), CodeLanguage::Python).unwrap();
        assert_eq!(parsed.reasoning_trace, "read n, print double");
        assert_eq!(parsed.final_source(), "print(int(input()) * 2)");
        assert!(parsed.syntax_valid);
    }

    #[test]
    fn last_block_wins() {
        let text = "<think>t</think>```python\nscratch(\n```\n```python\nx = 1\n```";
        let parsed = parse_solution_response(&RawResponse::stop(text), CodeLanguage::Python).unwrap();
        assert_eq!(parsed.code_blocks.len(), 2);
        assert_eq!(parsed.final_source(), "x = 1");
    }

    #[test]
    fn rejects() {
        let cases = [
            (RawResponse::stop("<think>t</think>```python\ndef f(:\n```"), RejectReason::SyntaxInvalid),
            (RawResponse::truncated(GOOD_PY), RejectReason::Truncated),
            (RawResponse::stop("```python\nx=1\n```"), RejectReason::MissingThink),
            (RawResponse::stop("<think>t</think>```cpp\nint x;\n```"), RejectReason::MissingCodeBlock),
        ];
        for (raw, reason) in cases {
            assert_eq!(parse_solution_response(&raw, CodeLanguage::Python), Err(reason));
        }
    }

    #[test]
    fn critiques() {
        let c = parse_critique_response(&RawResponse::stop("<think>t</think>ok<judgment>right</judgment>")).unwrap();
        assert_eq!(c, Critique { reasoning_trace: "t".into(), judgment: Judgment::Right, trace_length: 1 });
        let c = parse_critique_response(&RawResponse::stop("<think>é€</think><judgment> Wrong \n</judgment>")).unwrap();
        assert_eq!((c.judgment, c.trace_length), (Judgment::Wrong, 2));
        assert_eq!(
            parse_critique_response(&RawResponse::stop("<judgment>partially correct</judgment>")),
            Err(RejectReason::NonBinaryJudgment)
        );
        assert_eq!(
            parse_critique_response(&RawResponse::stop("<think>t</think> no judgment")),
            Err(RejectReason::MissingJudgment)
        );
        // a judgment that only appears inside the reasoning does not count
        assert_eq!(
            parse_critique_response(&RawResponse::stop("<think><judgment>right</judgment></think>")),
            Err(RejectReason::MissingJudgment)
        );
        assert_eq!(
            parse_critique_response(&RawResponse::stop("no think <judgment>right</judgment>")),
            Err(RejectReason::MissingThink)
        );
        assert_eq!(
            parse_critique_response(&RawResponse::truncated("<think>t</think><judgment>right</judgment>")),
            Err(RejectReason::Truncated)
        );
    }

    #[test]
    fn outcome_partition() {
        let ok: Result<(), RejectReason> = Ok(());
        let bad: Result<(), RejectReason> = Err(RejectReason::Truncated);
        assert_eq!(FilterOutcome::of(&ok), FilterOutcome { accepted: true, reject_reason: None });
        assert_eq!(FilterOutcome::of(&bad).reject_reason, Some(RejectReason::Truncated));
    }

    proptest! {
        #[test]
        fn accepted_solutions_reassemble(trace in "[a-z \n<>/]{0,40}", prose in "[a-z \n]{0,20}") {
            let text = format!("<think>{trace}</think>{prose}\n```python\nx = 1\n```\n");
            if let Ok(p) = parse_solution_response(&RawResponse::stop(text.clone()), CodeLanguage::Python) {
                prop_assert_eq!(format!("<think>{}</think>{}", p.reasoning_trace, p.answer_text), text);
            }
        }

        #[test]
        fn judgments_are_binary(inner in "\\PC{0,12}") {
            let raw = RawResponse::stop(format!("<think>x</think><judgment>{inner}</judgment>"));
            match parse_critique_response(&raw) {
                Ok(c) => prop_assert!(matches!(inner.trim().to_lowercase().as_str(), "right" | "wrong")
                    && matches!(c.judgment, Judgment::Right | Judgment::Wrong)),
                Err(r) => prop_assert!(matches!(r, RejectReason::NonBinaryJudgment | RejectReason::MissingJudgment | RejectReason::MissingThink)),
            }
        }
    }
}
