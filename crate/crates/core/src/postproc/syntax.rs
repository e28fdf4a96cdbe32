use std::cell::RefCell;

use tree_sitter::{Language, Parser};

use crate::CodeLanguage;

thread_local! {
    static PYTHON: RefCell<Parser> = RefCell::new(parser(tree_sitter_python::LANGUAGE.into()));
    static CPP: RefCell<Parser> = RefCell::new(parser(tree_sitter_cpp::LANGUAGE.into()));
}

fn parser(language: Language) -> Parser {
    let mut p = Parser::new();
    p.set_language(&language).expect("bundled grammar matches the tree-sitter ABI");
    p
}

/// True iff the tree-sitter grammar for `language` parses `source` without
/// ERROR or MISSING nodes. Blank sources are invalid.
pub fn validate_syntax(source: &str, language: CodeLanguage) -> bool {
    if source.trim().is_empty() {
        return false;
    }
    let cell = match language {
        CodeLanguage::Python => &PYTHON,
        CodeLanguage::Cpp => &CPP,
    };
    cell.with(|p| {
        let mut p = p.borrow_mut();
        p.reset();
        match p.parse(source, None) {
            Some(tree) => !tree.root_node().has_error(),
            None => false,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn python() {
        assert!(validate_syntax("def f():\n return 1", CodeLanguage::Python));
        assert!(!validate_syntax("def f(:", CodeLanguage::Python));
        assert!(!validate_syntax("", CodeLanguage::Python));
        assert!(!validate_syntax("x = (1,\n", CodeLanguage::Python));
    }

    #[test]
    fn cpp() {
        assert!(validate_syntax("int main(){return 0;}", CodeLanguage::Cpp));
        assert!(!validate_syntax("int main({", CodeLanguage::Cpp));
        assert!(!validate_syntax("", CodeLanguage::Cpp));
        assert!(!validate_syntax("   \n", CodeLanguage::Cpp));
    }
}
