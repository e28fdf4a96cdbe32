use rand::seq::index::sample;

use crate::seed::{rng, str_hash};
use crate::{Error, Question, Result, TestCase};

pub const MIN_TESTS: usize = 5;
pub const MAX_TESTS: usize = 50;

/// Picks the unit tests a solution is judged on.
///
/// Fewer than five tests excludes the question. Up to fifty are used as-is;
/// larger suites are subsampled with a generator seeded by `seed` and the
/// question id, then put back in their original order.
pub fn select_tests(question: &Question, seed: u64) -> Result<Vec<TestCase>> {
    let n = question.tests.len();
    if n < MIN_TESTS {
        return Err(Error::NotEnoughTests { question_id: question.id.clone(), available: n, required: MIN_TESTS });
    }
    if n <= MAX_TESTS {
        return Ok(question.tests.clone());
    }
    let mut rng = rng(&[seed, str_hash(&question.id)]);
    let mut picked = sample(&mut rng, n, MAX_TESTS).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| question.tests[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{IoMode, Source};

    fn question(n: usize) -> Question {
        Question {
            id: "q".into(),
            source: Source::Other,
            statement: "s".into(),
            difficulty: Default::default(),
            tests: (0..n).map(|i| TestCase::new(i.to_string(), i.to_string())).collect(),
            io_mode: IoMode::StdinStdout,
            starter_code: None,
            date_tag: None,
        }
    }

    #[test]
    fn too_few() {
        assert!(matches!(select_tests(&question(3), 1), Err(Error::NotEnoughTests { available: 3, required: 5, .. })));
    }

    #[test]
    fn passthrough() {
        let q = question(7);
        assert_eq!(select_tests(&q, 1).unwrap(), q.tests);
        let q = question(50);
        assert_eq!(select_tests(&q, 9).unwrap(), q.tests);
    }

    #[test]
    fn subsample_is_seeded_and_ordered() {
        let q = question(80);
        let a = select_tests(&q, 42).unwrap();
        assert_eq!(a.len(), 50);
        assert_eq!(a, select_tests(&q, 42).unwrap());
        assert_ne!(a, select_tests(&q, 43).unwrap());
        let idx: Vec<usize> = a.iter().map(|t| t.input.parse().unwrap()).collect();
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }
}
