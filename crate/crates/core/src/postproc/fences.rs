use serde::{Deserialize, Serialize};

use super::RejectReason;
use crate::CodeLanguage;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeBlock {
    pub language: CodeLanguage,
    pub source: String,
}

fn fence_language(tag: &str) -> Option<CodeLanguage> {
    match tag.trim() {
        "python" => Some(CodeLanguage::Python),
        "cpp" => Some(CodeLanguage::Cpp),
        _ => None,
    }
}

/// All closed ```` ```python ```` / ```` ```cpp ```` blocks in document order.
///
/// Fence lines are excluded from the source. Blocks with other tags are
/// skipped, and an unterminated block at the end of the text is ignored.
/// Fails with `MissingCodeBlock` when no block has the wanted language.
pub fn extract_code_blocks(text: &str, wanted: CodeLanguage) -> Result<Vec<CodeBlock>, RejectReason> {
    let mut blocks = Vec::new();
    let mut open: Option<(Option<CodeLanguage>, Vec<&str>)> = None;
    for line in text.lines() {
        let trimmed = line.trim_start();
        match open.take() {
            None => {
                if let Some(tag) = trimmed.strip_prefix("```") {
                    open = Some((fence_language(tag), Vec::new()));
                }
            }
            Some((lang, mut body)) => {
                if trimmed.trim_end() == "```" {
                    if let Some(language) = lang {
                        blocks.push(CodeBlock { language, source: body.join("\n") });
                    }
                } else {
                    body.push(line);
                    open = Some((lang, body));
                }
            }
        }
    }
    if blocks.iter().any(|b| b.language == wanted) {
        Ok(blocks)
    } else {
        Err(RejectReason::MissingCodeBlock)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_block() {
        let blocks = extract_code_blocks("```python\nx=1\n```", CodeLanguage::Python).unwrap();
        assert_eq!(blocks, vec![CodeBlock { language: CodeLanguage::Python, source: "x=1".into() }]);
    }

    #[test]
    fn language_mismatch() {
        assert_eq!(
            extract_code_blocks("```cpp\nint x;\n```", CodeLanguage::Python),
            Err(RejectReason::MissingCodeBlock)
        );
    }

    #[test]
    fn order_preserved_and_other_tags_skipped() {
        let text =
            "a\n```python\nfirst\n```\n```text\nnot code\n```\n```python\nsecond\nline\n```\n```python\nunterminated";
        let blocks = extract_code_blocks(text, CodeLanguage::Python).unwrap();
        let sources: Vec<_> = blocks.iter().map(|b| b.source.as_str()).collect();
        assert_eq!(sources, ["first", "second\nline"]);
    }

    #[test]
    fn untagged_fence_does_not_count() {
        assert!(extract_code_blocks("```\nprint(1)\n```", CodeLanguage::Python).is_err());
    }
}
