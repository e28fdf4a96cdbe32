//! Driver synthesis for starter-code problems.
//!
//! A harness is the candidate's code followed by a generated `main` that
//! reads one argument record from stdin, calls the entry point named by the
//! starter code and prints the JSON-encoded return value on one line. An
//! argument record is the comma-separated JSON arguments of a single call,
//! e.g. `[2,7,11,15], 9`.

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::BenchmarkRecord;
use crate::{CodeLanguage, Error, IoMode, Result};

const CPP_PRELUDE: &str = include_str!("../../assets/harness/prelude.hpp");

const PYTHON_PRELUDE: &str = "\
from typing import *
import sys, json, math, bisect, heapq, itertools, functools, collections, string, re
from collections import Counter, defaultdict, deque, OrderedDict
from functools import lru_cache, cache, reduce
from heapq import heappush, heappop, heapify
from bisect import bisect_left, bisect_right
";

static PY_CLASS: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?m)^\s*class\s+([A-Za-z_]\w*)").unwrap());
static PY_DEF: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?m)^\s*def\s+([A-Za-z_]\w*)\s*\(").unwrap());
static CPP_CLASS: Lazy<Regex> = Lazy::new(|| Regex::new(r"\b(?:class|struct)\s+([A-Za-z_]\w*)\s*\{").unwrap());
static CPP_ACCESS: Lazy<Regex> = Lazy::new(|| Regex::new(r"\b(?:public|private|protected)\s*:").unwrap());
static IDENT_TAIL: Lazy<Regex> = Lazy::new(|| Regex::new(r"([A-Za-z_]\w*)\s*$").unwrap());

/// The function a starter-code problem is evaluated through.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryPoint {
    pub class_name: Option<String>,
    pub function: String,
    /// C++ parameter types with references and `const` stripped.
    pub param_types: Vec<String>,
    pub return_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarnessSource {
    pub language: CodeLanguage,
    pub source: String,
    pub entry_point: Option<EntryPoint>,
    /// Set when the candidate cannot be driven; such harnesses score as
    /// runtime errors.
    pub invalid_reason: Option<String>,
}

impl HarnessSource {
    pub fn is_valid(&self) -> bool {
        self.invalid_reason.is_none()
    }

    fn invalid(language: CodeLanguage, entry_point: Option<EntryPoint>, reason: String) -> Self {
        Self { language, source: String::new(), entry_point, invalid_reason: Some(reason) }
    }
}

pub fn build_harness(record: &BenchmarkRecord, solution_source: &str, language: CodeLanguage) -> Result<HarnessSource> {
    if record.io_mode != IoMode::FunctionCall {
        return Err(Error::Validation(format!(
            "record {} uses stdin_stdout; harnesses are only built for function_call records",
            record.problem_id
        )));
    }
    let starter = record
        .starter_code
        .as_ref()
        .and_then(|s| s.for_language(language))
        .ok_or_else(|| Error::Validation(format!("record {} has no {language} starter code", record.problem_id)))?;
    build_harness_for(starter, solution_source, language)
}

/// Builds a harness from raw starter code.
///
/// Errors mean the starter code itself is unusable; a candidate that lacks
/// the entry point yields an invalid harness instead.
pub fn build_harness_for(starter_code: &str, solution_source: &str, language: CodeLanguage) -> Result<HarnessSource> {
    let entry = match language {
        CodeLanguage::Python => python_entry(starter_code)?,
        CodeLanguage::Cpp => cpp_entry(starter_code)?,
    };
    if let Some(missing) = missing_definition(&entry, solution_source, language) {
        return Ok(HarnessSource::invalid(language, Some(entry), format!("solution does not define {missing}")));
    }
    let source = match language {
        CodeLanguage::Python => python_harness(starter_code, solution_source, &entry),
        CodeLanguage::Cpp => cpp_harness(starter_code, solution_source, &entry),
    };
    Ok(HarnessSource { language, source, entry_point: Some(entry), invalid_reason: None })
}

fn python_entry(starter: &str) -> Result<EntryPoint> {
    let function = PY_DEF
        .captures(starter)
        .map(|c| c[1].to_string())
        .ok_or_else(|| Error::Validation("python starter code has no function definition".into()))?;
    Ok(EntryPoint {
        class_name: PY_CLASS.captures(starter).map(|c| c[1].to_string()),
        function,
        param_types: Vec::new(),
        return_type: None,
    })
}

fn cpp_entry(starter: &str) -> Result<EntryPoint> {
    let (class_name, body) = match CPP_CLASS.captures(starter) {
        Some(c) => (Some(c[1].to_string()), &starter[c.get(0).unwrap().end()..]),
        None => (None, starter),
    };
    let body = CPP_ACCESS.replace_all(body, " ");
    let open = body.find('(').ok_or_else(|| Error::Validation("C++ starter code has no function signature".into()))?;
    let head = body[..open].trim_end();
    let name_match = IDENT_TAIL
        .captures(head)
        .and_then(|c| c.get(1))
        .ok_or_else(|| Error::Validation("cannot find the C++ entry point name".into()))?;
    let function = name_match.as_str().to_string();
    let return_type = normalize_type(&head[..name_match.start()]);
    if return_type.is_empty() || return_type == "void" {
        return Err(Error::Validation(format!("C++ entry point `{function}` must return a value")));
    }
    let close = matching_paren(&body, open)
        .ok_or_else(|| Error::Validation("unbalanced parentheses in C++ starter code".into()))?;
    let params = &body[open + 1..close];
    let param_types = split_top_level(params)
        .into_iter()
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let p = p.split('=').next().unwrap_or("").trim();
            let ty = match IDENT_TAIL.captures(p).and_then(|c| c.get(1)) {
                Some(name) => &p[..name.start()],
                None => p,
            };
            let ty = normalize_type(ty);
            if ty.is_empty() {
                Err(Error::Validation(format!("cannot read parameter `{p}`")))
            } else {
                Ok(ty)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntryPoint { class_name, function, param_types, return_type: Some(return_type) })
}

fn normalize_type(raw: &str) -> String {
    raw.replace('&', " ")
        .split_whitespace()
        .filter(|w| *w != "const" && *w != "inline" && *w != "static")
        .collect::<Vec<_>>()
        .join(" ")
        .replace(" <", "<")
        .replace("< ", "<")
        .replace(" >", ">")
}

fn matching_paren(s: &str, open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (i, c) in s[open..].char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(open + i);
                }
            }
            _ => {}
        }
    }
    None
}

fn split_top_level(params: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, c) in params.char_indices() {
        match c {
            '<' | '(' | '[' | '{' => depth += 1,
            '>' | ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&params[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&params[start..]);
    out
}

fn missing_definition(entry: &EntryPoint, solution: &str, language: CodeLanguage) -> Option<String> {
    let name = regex::escape(&entry.function);
    let func = match language {
        CodeLanguage::Python => Regex::new(&format!(r"\bdef\s+{name}\s*\(")),
        CodeLanguage::Cpp => Regex::new(&format!(r"\b{name}\s*\(")),
    }
    .expect("escaped identifier");
    if !func.is_match(solution) {
        return Some(format!("entry point `{}`", entry.function));
    }
    if let Some(class) = &entry.class_name {
        let class_re = match language {
            CodeLanguage::Python => format!(r"\bclass\s+{}\b", regex::escape(class)),
            CodeLanguage::Cpp => format!(r"\b(?:class|struct)\s+{}\b", regex::escape(class)),
        };
        if !Regex::new(&class_re).expect("escaped identifier").is_match(solution) {
            return Some(format!("class `{class}`"));
        }
    }
    None
}

fn commented(starter: &str, marker: &str) -> String {
    let mut out = format!("{marker} starter code:\n");
    for line in starter.lines() {
        out.push_str(marker);
        out.push(' ');
        out.push_str(line);
        out.push('\n');
    }
    out
}

fn python_harness(starter: &str, solution: &str, entry: &EntryPoint) -> String {
    let call = match &entry.class_name {
        Some(class) => format!("{class}().{}", entry.function),
        None => entry.function.clone(),
    };
    format!(
        "{header}{PYTHON_PRELUDE}\n{solution}\n\n\
def _rf_main():\n    \
_rf_args = json.loads(\"[\" + sys.stdin.read() + \"]\")\n    \
_rf_result = {call}(*_rf_args)\n    \
sys.stdout.write(json.dumps(_rf_result, separators=(\",\", \":\"), ensure_ascii=False) + \"\\n\")\n\n\n\
if __name__ == \"__main__\":\n    _rf_main()\n",
        header = commented(starter, "#"),
    )
}

fn cpp_harness(starter: &str, solution: &str, entry: &EntryPoint) -> String {
    let arity = entry.param_types.len();
    let mut args = String::new();
    for (i, ty) in entry.param_types.iter().enumerate() {
        args.push_str(&format!("    auto rf_a{i} = rf::from_json<{ty}>(rf_args.arr[{i}]);\n"));
    }
    let arg_list = (0..arity).map(|i| format!("rf_a{i}")).collect::<Vec<_>>().join(", ");
    let call = match &entry.class_name {
        Some(class) => format!("    {class} rf_obj;\n    auto rf_result = rf_obj.{}({arg_list});\n", entry.function),
        None => format!("    auto rf_result = {}({arg_list});\n", entry.function),
    };
    format!(
        "{header}{CPP_PRELUDE}\nusing namespace std;\n\n{solution}\n\n\
int main() {{\n    \
std::string rf_raw((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());\n    \
rf::Json rf_args = rf::parse(\"[\" + rf_raw + \"]\");\n    \
if (rf_args.arr.size() != {arity}) {{\n        \
std::cerr << \"expected {arity} arguments, got \" << rf_args.arr.size() << \"\\n\";\n        \
return 3;\n    }}\n\
{args}{call}    \
rf::write_json(std::cout, rf_result);\n    \
std::cout << \"\\n\";\n    \
return 0;\n}}\n",
        header = commented(starter, "//"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::postproc::validate_syntax;

    const PY_STARTER: &str =
        "class Solution:\n    def twoSum(self, nums: List[int], target: int) -> List[int]:\n        ";
    const CPP_STARTER: &str =
        "class Solution {\npublic:\n    vector<int> twoSum(const vector<int>& nums, int target) {\n        \n    }\n};";

    #[test]
    fn python_entry_point() {
        let e = python_entry(PY_STARTER).unwrap();
        assert_eq!(e.class_name.as_deref(), Some("Solution"));
        assert_eq!(e.function, "twoSum");
    }

    #[test]
    fn cpp_entry_point() {
        let e = cpp_entry(CPP_STARTER).unwrap();
        assert_eq!(e.class_name.as_deref(), Some("Solution"));
        assert_eq!(e.function, "twoSum");
        assert_eq!(e.param_types, ["vector<int>", "int"]);
        assert_eq!(e.return_type.as_deref(), Some("vector<int>"));

        let e = cpp_entry("class Solution {\npublic:\n    long long f(vector<vector<int>>& g, map<int, int> m, string s = \"\") {}\n};").unwrap();
        assert_eq!(e.param_types, ["vector<vector<int>>", "map<int, int>", "string"]);
        assert_eq!(e.return_type.as_deref(), Some("long long"));
        assert!(cpp_entry("class Solution {\npublic:\n    void f(int x) {}\n};").is_err());
    }

    #[test]
    fn harness_sources_parse() {
        let py = build_harness_for(
            PY_STARTER,
            "class Solution:\n    def twoSum(self, nums, target):\n        return [0, 1]\n",
            CodeLanguage::Python,
        )
        .unwrap();
        assert!(py.is_valid());
        assert!(validate_syntax(&py.source, CodeLanguage::Python));

        let cpp = build_harness_for(
            CPP_STARTER,
            "class Solution {\npublic:\n    vector<int> twoSum(vector<int>& nums, int target) { return {0, 1}; }\n};",
            CodeLanguage::Cpp,
        )
        .unwrap();
        assert!(cpp.is_valid());
        assert!(cpp.source.contains("rf::from_json<vector<int>>(rf_args.arr[0])"));
        assert!(validate_syntax(&cpp.source, CodeLanguage::Cpp));
    }

    #[test]
    fn missing_entry_point_is_invalid() {
        let h = build_harness_for(PY_STARTER, "class Solution:\n    def other(self): pass\n", CodeLanguage::Python)
            .unwrap();
        assert!(!h.is_valid());
        let h = build_harness_for(CPP_STARTER, "int twoSum(int a) { return a; }", CodeLanguage::Cpp).unwrap();
        assert!(h.invalid_reason.unwrap().contains("class"));
    }

    #[test]
    fn stdin_records_are_rejected() {
        let record = BenchmarkRecord {
            problem_id: "abc".into(),
            venue: super::super::Venue::Atcoder,
            date_tag: 2409,
            difficulty: crate::Difficulty::Easy,
            statement: "s".into(),
            io_mode: IoMode::StdinStdout,
            starter_code: None,
            tests: vec![],
        };
        assert!(build_harness(&record, "print(1)", CodeLanguage::Python).is_err());
    }
}
