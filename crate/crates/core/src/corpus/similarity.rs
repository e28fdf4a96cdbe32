/// Character-level edit distance (insert, delete, substitute; unit costs).
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub(crate) fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - lev(a, b) / max(|a|, |b|)` over unicode scalar values.
///
/// Inputs are expected to be normalized already. Two empty strings are
/// identical and score 1.0.
pub fn fuzzy_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    similarity_chars(&a, &b)
}

pub(crate) fn similarity_chars(a: &[char], b: &[char]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein_chars(a, b) as f64 / longest as f64
}

/// Upper bound of [`similarity_chars`] from lengths alone.
pub(crate) fn similarity_upper_bound(len_a: usize, len_b: usize) -> f64 {
    let longest = len_a.max(len_b);
    if longest == 0 {
        return 1.0;
    }
    len_a.min(len_b) as f64 / longest as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Exponential recursion; only usable on short strings.
    fn lev_oracle(a: &[char], b: &[char]) -> usize {
        match (a.split_first(), b.split_first()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((ha, ta)), Some((hb, tb))) => {
                let sub = lev_oracle(ta, tb) + usize::from(ha != hb);
                sub.min(lev_oracle(ta, b) + 1).min(lev_oracle(a, tb) + 1)
            }
        }
    }

    #[test]
    fn worked_values() {
        assert_eq!(fuzzy_similarity("abc", "abc"), 1.0);
        let oracle = lev_oracle(&['a', 'b', 'c', 'd'], &['a', 'b', 'c', 'e']);
        assert_eq!(oracle, 1);
        assert_eq!(fuzzy_similarity("abcd", "abce"), 1.0 - oracle as f64 / 4.0);
        assert_eq!(fuzzy_similarity("abcd", "abce"), 0.75);
        assert_eq!(fuzzy_similarity("", "abc"), 0.0);
        assert_eq!(fuzzy_similarity("", ""), 1.0);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
    }

    proptest! {
        #[test]
        fn matches_recursive_oracle(a in "[ab ]{0,6}", b in "[abc]{0,6}") {
            let ac: Vec<char> = a.chars().collect();
            let bc: Vec<char> = b.chars().collect();
            prop_assert_eq!(levenshtein(&a, &b), lev_oracle(&ac, &bc));
        }

        #[test]
        fn symmetric_and_identity(a in "\\PC{0,20}", b in "\\PC{0,20}") {
            let ab = fuzzy_similarity(&a, &b);
            prop_assert_eq!(ab, fuzzy_similarity(&b, &a));
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(ab == 1.0, a == b);
            let bound = similarity_upper_bound(a.chars().count(), b.chars().count());
            prop_assert!(ab <= bound + 1e-12);
        }
    }
}
