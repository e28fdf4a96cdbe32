use unicode_normalization::UnicodeNormalization;

/// Canonical form used for fuzzy matching: NFC, lowercase, single spaces.
///
/// Lowercasing can produce decomposed sequences (`İ` lowers to `i` plus a
/// combining dot), so NFC is applied again afterwards to keep the function
/// idempotent.
pub fn normalize_statement(statement: &str) -> String {
    let lowered: String = statement.nfc().collect::<String>().to_lowercase();
    let recomposed: String = lowered.nfc().collect();
    recomposed.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn collapses_case_and_whitespace() {
        assert_eq!(normalize_statement("  Two   Sum\n"), "two sum");
        assert_eq!(normalize_statement(""), "");
        assert_eq!(normalize_statement("\t\n "), "");
    }

    #[test]
    fn composes_unicode() {
        assert_eq!(normalize_statement("Cafe\u{301}"), "caf\u{e9}");
        let once = normalize_statement("\u{130}stanbul");
        assert_eq!(normalize_statement(&once), once);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn idempotent(s in "\\PC*") {
            let once = normalize_statement(&s);
            prop_assert_eq!(normalize_statement(&once), once);
        }
    }
}
