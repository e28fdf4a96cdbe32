use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::normalize::normalize_statement;
use super::similarity::{similarity_chars, similarity_upper_bound};
use crate::{Error, Question, Result};

pub const DEFAULT_DEDUP_THRESHOLD: f64 = 0.9;

/// Above this corpus size, candidate pairs come from rare-token blocking
/// instead of the full pairwise comparison.
pub const EXACT_PAIRWISE_LIMIT: usize = 2000;

/// Tokens whose document frequency is below this fraction drive blocking.
const RARE_TOKEN_DF: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupCluster {
    pub canonical_id: String,
    pub member_ids: Vec<String>,
    pub pairwise_scores: Vec<(String, String, f64)>,
}

#[derive(Debug, Clone)]
pub struct DedupOutput {
    /// One representative per cluster plus every singleton, sorted by id.
    pub retained: Vec<Question>,
    /// Clusters with at least two members, sorted by canonical id.
    pub clusters: Vec<DedupCluster>,
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    // The smaller index always becomes the root, so roots do not depend on
    // the order in which edges are merged.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Single-linkage clustering of questions whose normalized statements have
/// fuzzy similarity at or above `threshold`.
///
/// Questions are sorted by id before anything else happens, which makes the
/// result independent of input order. The lexicographically smallest id of a
/// cluster is its canonical representative.
pub fn dedup(questions: &[Question], threshold: f64) -> Result<DedupOutput> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Validation(format!("dedup threshold must be in (0, 1], got {threshold}")));
    }
    let mut sorted: Vec<&Question> = questions.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(w) = sorted.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(Error::DuplicateKey(format!("question id {}", w[0].id)));
    }

    let normalized: Vec<Vec<char>> =
        sorted.par_iter().map(|q| normalize_statement(&q.statement).chars().collect()).collect();

    let candidates = if sorted.len() <= EXACT_PAIRWISE_LIMIT {
        all_pairs(sorted.len())
    } else {
        let texts: Vec<String> = normalized.iter().map(|c| c.iter().collect()).collect();
        blocked_pairs(&texts)
    };

    let mut edges: Vec<(usize, usize, f64)> = candidates
        .into_par_iter()
        .filter_map(|(i, j)| {
            let (a, b) = (&normalized[i], &normalized[j]);
            if similarity_upper_bound(a.len(), b.len()) < threshold {
                return None;
            }
            let score = similarity_chars(a, b);
            (score >= threshold).then_some((i, j, score))
        })
        .collect();
    edges.sort_by_key(|x| (x.0, x.1));

    let mut sets = DisjointSet::new(sorted.len());
    for &(i, j, _) in &edges {
        sets.union(i, j);
    }

    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..sorted.len() {
        members.entry(sets.find(i)).or_default().push(i);
    }
    let mut scores: HashMap<usize, Vec<(String, String, f64)>> = HashMap::new();
    for &(i, j, score) in &edges {
        scores.entry(sets.find(i)).or_default().push((sorted[i].id.clone(), sorted[j].id.clone(), score));
    }

    let mut retained = Vec::with_capacity(members.len());
    let mut clusters = Vec::new();
    for (root, idxs) in members {
        // root is the smallest index, i.e. the smallest id
        retained.push(sorted[root].clone());
        if idxs.len() > 1 {
            clusters.push(DedupCluster {
                canonical_id: sorted[root].id.clone(),
                member_ids: idxs.iter().map(|&i| sorted[i].id.clone()).collect(),
                pairwise_scores: scores.remove(&root).unwrap_or_default(),
            });
        }
    }
    Ok(DedupOutput { retained, clusters })
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Pairs of documents sharing at least one rare token. Documents with no
/// rare token at all fall back to their own exact-text bucket so identical
/// statements are always compared.
fn blocked_pairs(texts: &[String]) -> Vec<(usize, usize)> {
    let n = texts.len();
    let token_sets: Vec<BTreeSet<&str>> =
        texts.iter().map(|t| t.split(' ').filter(|w| !w.is_empty()).collect()).collect();
    let mut df: HashMap<&str, usize> = HashMap::new();
    for set in &token_sets {
        for &tok in set {
            *df.entry(tok).or_default() += 1;
        }
    }
    let limit = RARE_TOKEN_DF * n as f64;
    let mut postings: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (doc, set) in token_sets.iter().enumerate() {
        let mut any_rare = false;
        for &tok in set {
            if (df[tok] as f64) < limit {
                postings.entry(tok).or_default().push(doc);
                any_rare = true;
            }
        }
        if !any_rare {
            postings.entry(texts[doc].as_str()).or_default().push(doc);
        }
    }
    let mut pairs: HashSet<(usize, usize)> = HashSet::new();
    for docs in postings.values() {
        for (a, &i) in docs.iter().enumerate() {
            for &j in &docs[a + 1..] {
                pairs.insert((i.min(j), i.max(j)));
            }
        }
    }
    let mut pairs: Vec<_> = pairs.into_iter().collect();
    pairs.sort_unstable();
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Difficulty, IoMode, Source};

    fn q(id: &str, statement: &str) -> Question {
        Question {
            id: id.into(),
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
    fn identical_statements_merge() {
        let out = dedup(&[q("b", "Sum two numbers"), q("a", "Sum two numbers")], 0.9).unwrap();
        assert_eq!(out.retained.len(), 1);
        assert_eq!(out.retained[0].id, "a");
        assert_eq!(out.clusters.len(), 1);
        assert_eq!(out.clusters[0].member_ids, vec!["a", "b"]);
        assert_eq!(out.clusters[0].pairwise_scores, vec![("a".into(), "b".into(), 1.0)]);
    }

    #[test]
    fn whitespace_and_case_variants_merge() {
        let out = dedup(&[q("x1", "Reverse the  STRING"), q("x2", "  reverse the string\n")], 0.9).unwrap();
        assert_eq!(out.retained.len(), 1);
        assert_eq!(out.clusters[0].member_ids.len(), 2);
    }

    #[test]
    fn dissimilar_statements_stay_apart() {
        let items = [
            q("1", "count vowels in a word"),
            q("2", "shortest path on grid graph"),
            q("3", "maximum subarray product"),
        ];
        let norm: Vec<String> = items.iter().map(|x| normalize_statement(&x.statement)).collect();
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(super::super::fuzzy_similarity(&norm[i], &norm[j]) < 0.2);
            }
        }
        let out = dedup(&items, 0.9).unwrap();
        assert_eq!(out.retained.len(), 3);
        assert!(out.clusters.is_empty());
    }

    #[test]
    fn chain_is_single_linkage() {
        // a~b and b~c above threshold while a~c is not
        let a = "aaaaaaaaaa";
        let b = "aaaaaaaaab";
        let c = "aaaaaaaabb";
        let out = dedup(&[q("a", a), q("b", b), q("c", c)], 0.9).unwrap();
        assert_eq!(out.retained.len(), 1);
        assert_eq!(out.clusters[0].member_ids, vec!["a", "b", "c"]);
        assert_eq!(out.clusters[0].pairwise_scores.len(), 2);
    }

    #[test]
    fn rejects_bad_threshold_and_duplicate_ids() {
        assert!(dedup(&[], 0.0).is_err());
        assert!(dedup(&[], 1.5).is_err());
        assert!(matches!(dedup(&[q("a", "x"), q("a", "y")], 0.9), Err(Error::DuplicateKey(_))));
    }

    #[test]
    fn blocking_finds_rare_token_duplicates() {
        let texts: Vec<String> = (0..100)
            .map(|i| format!("common words here token{i} zz{i}"))
            .chain(["common words here token7 zz7".to_string()])
            .collect();
        let pairs = blocked_pairs(&texts);
        assert!(pairs.contains(&(7, 100)));
        assert!(!pairs.contains(&(1, 2)));
    }
}
