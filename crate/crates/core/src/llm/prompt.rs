use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{CodeLanguage, Error, IoMode, Question, Result};

const SOLUTION_PYTHON: &str = include_str!("../../assets/prompts/solution_python.txt");
const SOLUTION_CPP: &str = include_str!("../../assets/prompts/solution_cpp.txt");
const CRITIQUE: &str = include_str!("../../assets/prompts/critique.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    SolutionPython,
    SolutionCpp,
    Critique,
}

/// Text with `{name}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub name: String,
    pub text: String,
}

impl PromptTemplate {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        Self { name: name.into(), text: text.into() }
    }

    pub fn builtin(kind: PromptKind) -> Self {
        let (name, text) = match kind {
            PromptKind::SolutionPython => ("solution_python", SOLUTION_PYTHON),
            PromptKind::SolutionCpp => ("solution_cpp", SOLUTION_CPP),
            PromptKind::Critique => ("critique", CRITIQUE),
        };
        Self::new(name, text)
    }

    pub fn for_solution(language: CodeLanguage) -> Self {
        match language {
            CodeLanguage::Python => Self::builtin(PromptKind::SolutionPython),
            CodeLanguage::Cpp => Self::builtin(PromptKind::SolutionCpp),
        }
    }

    /// Placeholder names in order of appearance.
    pub fn placeholders(&self) -> Vec<&str> {
        let mut out = Vec::new();
        let mut rest = self.text.as_str();
        while let Some(open) = rest.find('{') {
            let after = &rest[open + 1..];
            match placeholder_len(after) {
                Some(len) => {
                    out.push(&after[..len]);
                    rest = &after[len + 1..];
                }
                None => rest = after,
            }
        }
        out
    }

    /// Substitutes every placeholder in one pass. Values are inserted
    /// verbatim and never rescanned, so statements containing braces are safe.
    pub fn render(&self, values: &[(&str, &str)]) -> Result<String> {
        let map: HashMap<&str, &str> = values.iter().copied().collect();
        let mut out = String::with_capacity(self.text.len() + values.iter().map(|v| v.1.len()).sum::<usize>());
        let mut rest = self.text.as_str();
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            match placeholder_len(after) {
                Some(len) => {
                    let key = &after[..len];
                    let value = map.get(key).ok_or_else(|| Error::Template {
                        template: self.name.clone(),
                        message: format!("placeholder `{{{key}}}` has no value"),
                    })?;
                    out.push_str(value);
                    rest = &after[len + 1..];
                }
                None => {
                    out.push('{');
                    rest = after;
                }
            }
        }
        out.push_str(rest);
        Ok(out)
    }
}

// Length of `name` if `s` starts with `name}` where name is [a-z_]+.
fn placeholder_len(s: &str) -> Option<usize> {
    let len = s.bytes().take_while(|b| b.is_ascii_lowercase() || *b == b'_').count();
    (len > 0 && s.as_bytes().get(len) == Some(&b'}')).then_some(len)
}

pub fn render_solution_prompt(question: &Question, language: CodeLanguage) -> Result<String> {
    if question.statement.trim().is_empty() {
        return Err(Error::Validation(format!(
            "question {}: cannot render a prompt for an empty statement",
            question.id
        )));
    }
    let input = match question.starter_code.as_ref().and_then(|s| s.for_language(language)) {
        Some(starter) if question.io_mode == IoMode::FunctionCall => format!(
            "{}\n\nComplete the following starter code:\n```{}\n{}\n```",
            question.statement,
            language.fence_tag(),
            starter.trim_end()
        ),
        _ => question.statement.clone(),
    };
    PromptTemplate::for_solution(language).render(&[("input", &input)])
}

pub fn render_critique_prompt(question: &Question, solution_text: &str) -> Result<String> {
    if question.statement.trim().is_empty() {
        return Err(Error::Validation(format!("question {}: empty statement", question.id)));
    }
    if solution_text.trim().is_empty() {
        return Err(Error::Validation(format!("question {}: empty solution text", question.id)));
    }
    PromptTemplate::builtin(PromptKind::Critique)
        .render(&[("question", &question.statement), ("solution", solution_text)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Difficulty, Source};

    fn q(statement: &str) -> Question {
        Question {
            id: "q".into(),
            source: Source::Other,
            statement: statement.into(),
            difficulty: Difficulty::Unknown,
            tests: vec![],
            io_mode: IoMode::StdinStdout,
            starter_code: None,
            date_tag: None,
        }
    }

    #[test]
    fn solution_prompts() {
        let py = render_solution_prompt(&q("S"), CodeLanguage::Python).unwrap();
        assert!(py.ends_with("\n\nS"));
        assert!(py.contains("```python"));
        assert!(py.contains("Please use python programming language only."));
        let cpp = render_solution_prompt(&q("S"), CodeLanguage::Cpp).unwrap();
        assert!(cpp.contains("```cpp"));
        assert!(cpp.contains("Please use c++ programming language only."));
        assert!(render_solution_prompt(&q(""), CodeLanguage::Python).is_err());
        assert!("rust".parse::<CodeLanguage>().is_err());
    }

    #[test]
    fn starter_code_is_appended_for_function_call() {
        let mut question = q("S");
        question.io_mode = IoMode::FunctionCall;
        question.starter_code = Some(crate::StarterCode::PerLanguage(
            [(CodeLanguage::Python, "class Solution:\n    def f(self): ".to_string())].into(),
        ));
        let py = render_solution_prompt(&question, CodeLanguage::Python).unwrap();
        assert!(py
            .ends_with("S\n\nComplete the following starter code:\n```python\nclass Solution:\n    def f(self):\n```"));
        let cpp = render_solution_prompt(&question, CodeLanguage::Cpp).unwrap();
        assert!(cpp.ends_with("\n\nS"));
    }

    #[test]
    fn critique_prompt() {
        let text = render_critique_prompt(&q("Q"), "code").unwrap();
        assert!(text.contains("## Question\nQ\n"));
        assert!(text.contains("## Solution\ncode"));
        assert!(text.contains("<judgment>right/wrong</judgment>"));
        assert!(render_critique_prompt(&q("Q"), "").is_err());
    }

    #[test]
    fn braces_in_values_are_not_rescanned() {
        let text = render_solution_prompt(&q("print {input} and {x}"), CodeLanguage::Python).unwrap();
        assert!(text.ends_with("print {input} and {x}"));
    }

    #[test]
    fn unfilled_placeholder_is_an_error() {
        let t = PromptTemplate::new("t", "a {question} b {solution}");
        assert_eq!(t.placeholders(), vec!["question", "solution"]);
        assert!(matches!(t.render(&[("question", "x")]), Err(Error::Template { .. })));
        assert_eq!(t.render(&[("question", "x"), ("solution", "y")]).unwrap(), "a x b y");
        // literal braces that are not placeholders pass through
        let t = PromptTemplate::new("t", "{ } {A} {input}");
        assert_eq!(t.render(&[("input", "z")]).unwrap(), "{ } {A} z");
    }

    #[test]
    fn builtins_carry_expected_placeholders() {
        assert_eq!(PromptTemplate::builtin(PromptKind::SolutionPython).placeholders(), vec!["input"]);
        assert_eq!(PromptTemplate::builtin(PromptKind::SolutionCpp).placeholders(), vec!["input"]);
        assert_eq!(PromptTemplate::builtin(PromptKind::Critique).placeholders(), vec!["question", "solution"]);
    }
}
