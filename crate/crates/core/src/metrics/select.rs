use std::collections::HashSet;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seed::{combine, rng, str_hash};
use crate::{Difficulty, Error, Judgment, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub sample_index: u32,
    pub is_correct: bool,
    #[serde(default)]
    pub judgment: Option<Judgment>,
    #[serde(default)]
    pub critique_trace_length: Option<u64>,
}

/// All evaluated samples of one question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePool {
    pub question_id: String,
    #[serde(default)]
    pub difficulty: Difficulty,
    pub samples: Vec<Sample>,
}

impl SamplePool {
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for s in &self.samples {
            if !seen.insert(s.sample_index) {
                return Err(Error::DuplicateKey(format!("{}#{}", self.question_id, s.sample_index)));
            }
        }
        Ok(())
    }

    pub fn n_correct(&self) -> usize {
        self.samples.iter().filter(|s| s.is_correct).count()
    }

    fn judged(&self, pos: usize) -> Result<(Judgment, u64)> {
        let s = self
            .samples
            .get(pos)
            .ok_or_else(|| Error::Metric(format!("question {}: no sample at position {pos}", self.question_id)))?;
        match (s.judgment, s.critique_trace_length) {
            (Some(j), Some(len)) => Ok((j, len)),
            _ => {
                Err(Error::Metric(format!("question {}: sample {} has no critique", self.question_id, s.sample_index)))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Shortest critique trace among right-judged samples.
    Shortest,
    /// Uniform among right-judged samples.
    Random,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shortest" => Ok(Strategy::Shortest),
            "random" => Ok(Strategy::Random),
            other => {
                Err(Error::Validation(format!("unknown selection strategy `{other}` (expected shortest or random)")))
            }
        }
    }
}

/// A chosen sample and whether the no-right-judgment fallback was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub position: usize,
    pub sample_index: u32,
    pub fallback: bool,
}

fn candidates(pool: &SamplePool, positions: &[usize]) -> Result<(Vec<(usize, u64)>, bool)> {
    if positions.is_empty() {
        return Err(Error::Metric(format!("question {}: nothing to select from", pool.question_id)));
    }
    let judged = positions.iter().map(|&p| pool.judged(p).map(|(j, len)| (p, j, len))).collect::<Result<Vec<_>>>()?;
    let right: Vec<(usize, u64)> =
        judged.iter().filter(|(_, j, _)| *j == Judgment::Right).map(|&(p, _, len)| (p, len)).collect();
    if right.is_empty() {
        Ok((judged.iter().map(|&(p, _, len)| (p, len)).collect(), true))
    } else {
        Ok((right, false))
    }
}

fn selection(pool: &SamplePool, position: usize, fallback: bool) -> Selection {
    Selection { position, sample_index: pool.samples[position].sample_index, fallback }
}

/// Shortest critique trace among right-judged samples at `positions`;
/// ties go to the smaller sample index. With no right judgment the
/// shortest trace over all of them is taken.
pub fn select_candidate(pool: &SamplePool, positions: &[usize]) -> Result<Selection> {
    let (cands, fallback) = candidates(pool, positions)?;
    let &(position, _) =
        cands.iter().min_by_key(|&&(p, len)| (len, pool.samples[p].sample_index)).expect("candidates are non-empty");
    Ok(selection(pool, position, fallback))
}

/// Uniform pick among right-judged samples, or among all when none is.
pub fn select_random(pool: &SamplePool, positions: &[usize], seed: u64) -> Result<Selection> {
    let (cands, fallback) = candidates(pool, positions)?;
    let mut rng = rng(&[seed, str_hash(&pool.question_id)]);
    let (position, _) = cands[rng.gen_range(0..cands.len())];
    Ok(selection(pool, position, fallback))
}

/// Which k-subsets of a pool are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawPlan {
    /// Draw 0 is the first k samples; later draws are seeded random subsets.
    Resample { n_resamples: usize, seed: u64 },
    /// Every k-subset once.
    Exhaustive,
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] != i + n - k) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// The subsets (as sorted positions) scored for one pool.
pub fn draws(pool: &SamplePool, k: usize, plan: DrawPlan) -> Result<Vec<Vec<usize>>> {
    let n = pool.samples.len();
    if k == 0 || k > n {
        return Err(Error::Metric(format!("question {} has {n} samples, fewer than k = {k}", pool.question_id)));
    }
    match plan {
        DrawPlan::Exhaustive => Ok(combinations(n, k)),
        DrawPlan::Resample { n_resamples, seed } => {
            if n_resamples == 0 {
                return Err(Error::Metric("at least one draw is required".into()));
            }
            let qid = str_hash(&pool.question_id);
            Ok((0..n_resamples)
                .map(|d| {
                    if d == 0 {
                        return (0..k).collect();
                    }
                    let mut r = rng(&[seed, qid, d as u64]);
                    let mut picked = sample(&mut r, n, k).into_vec();
                    picked.sort_unstable();
                    picked
                })
                .collect())
        }
    }
}

/// Per-question selection outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionSelection {
    pub question_id: String,
    pub difficulty: Difficulty,
    /// Fraction of draws whose selected sample is correct.
    pub score: f64,
    pub draws: usize,
    pub fallback_draws: usize,
}

fn draw_seed(seed: u64, draw: usize) -> u64 {
    combine(&[seed, draw as u64, 0x5e1e_c7ed])
}

pub fn select_per_question(
    pools: &[SamplePool],
    k: usize,
    strategy: Strategy,
    plan: DrawPlan,
) -> Result<Vec<QuestionSelection>> {
    let random_seed = match plan {
        DrawPlan::Resample { seed, .. } => seed,
        DrawPlan::Exhaustive => 0,
    };
    pools
        .par_iter()
        .map(|pool| {
            let subsets = draws(pool, k, plan)?;
            let (mut hits, mut fallback_draws) = (0usize, 0usize);
            for (d, subset) in subsets.iter().enumerate() {
                let chosen = match strategy {
                    Strategy::Shortest => select_candidate(pool, subset)?,
                    Strategy::Random => select_random(pool, subset, draw_seed(random_seed, d))?,
                };
                hits += usize::from(pool.samples[chosen.position].is_correct);
                fallback_draws += usize::from(chosen.fallback);
            }
            Ok(QuestionSelection {
                question_id: pool.question_id.clone(),
                difficulty: pool.difficulty,
                score: hits as f64 / subsets.len() as f64,
                draws: subsets.len(),
                fallback_draws,
            })
        })
        .collect()
}

pub(crate) fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// pass@1|select@k: mean over questions of the fraction of draws whose
/// selected sample is correct.
pub fn pass1_select_at_k(
    pools: &[SamplePool],
    k: usize,
    strategy: Strategy,
    n_resamples: usize,
    seed: u64,
) -> Result<f64> {
    if pools.is_empty() {
        return Err(Error::Metric("no sample pools".into()));
    }
    let per = select_per_question(pools, k, strategy, DrawPlan::Resample { n_resamples, seed })?;
    Ok(mean(per.iter().map(|q| q.score)))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn pool(id: &str, samples: &[(bool, Judgment, u64)]) -> SamplePool {
        SamplePool {
            question_id: id.into(),
            difficulty: Difficulty::Easy,
            samples: samples
                .iter()
                .enumerate()
                .map(|(i, &(ok, j, len))| Sample {
                    sample_index: i as u32,
                    is_correct: ok,
                    judgment: Some(j),
                    critique_trace_length: Some(len),
                })
                .collect(),
        }
    }

    use Judgment::{Right as R, Wrong as W};

    #[test]
    fn shortest_right() {
        let p = pool("q", &[(true, R, 300), (false, W, 50), (true, R, 120)]);
        let s = select_candidate(&p, &[0, 1, 2]).unwrap();
        assert_eq!((s.sample_index, s.fallback), (2, false));
    }

    #[test]
    fn fallback_to_shortest_overall() {
        let p = pool("q", &[(false, W, 90), (false, W, 40), (false, W, 200)]);
        let s = select_candidate(&p, &[0, 1, 2]).unwrap();
        assert_eq!((s.sample_index, s.fallback), (1, true));
    }

    #[test]
    fn ties_go_to_smaller_index() {
        let p = pool("q", &[(false, W, 1), (true, R, 70), (true, R, 70)]);
        assert_eq!(select_candidate(&p, &[2, 1, 0]).unwrap().sample_index, 1);
        assert!(select_candidate(&p, &[]).is_err());
    }

    #[test]
    fn missing_critique_is_an_error() {
        let mut p = pool("q", &[(true, R, 1)]);
        p.samples[0].judgment = None;
        assert!(select_candidate(&p, &[0]).is_err());
    }

    #[test]
    fn random_single_right() {
        let p = pool("q", &[(false, W, 1), (true, R, 70), (false, W, 2)]);
        for seed in 0..50 {
            assert_eq!(select_random(&p, &[0, 1, 2], seed).unwrap().sample_index, 1);
        }
        assert_eq!(select_random(&p, &[0, 1, 2], 9).unwrap(), select_random(&p, &[0, 1, 2], 9).unwrap());
    }

    #[test]
    fn random_is_uniform() {
        let p = pool("q", &[(true, R, 1), (false, W, 1), (true, R, 1), (true, R, 1)]);
        let mut counts = [0usize; 4];
        let n = 100_000u64;
        for seed in 0..n {
            counts[select_random(&p, &[0, 1, 2, 3], seed).unwrap().position] += 1;
        }
        assert_eq!(counts[1], 0);
        for c in [counts[0], counts[2], counts[3]] {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn first_draw_is_prefix() {
        let p = pool("q", &[(true, R, 1); 6]);
        let d = draws(&p, 3, DrawPlan::Resample { n_resamples: 5, seed: 3 }).unwrap();
        assert_eq!(d[0], vec![0, 1, 2]);
        assert_eq!(d.len(), 5);
        assert!(d.iter().all(|s| s.len() == 3 && s.windows(2).all(|w| w[0] < w[1])));
        assert_eq!(draws(&p, 3, DrawPlan::Exhaustive).unwrap().len(), 20);
        assert!(draws(&p, 7, DrawPlan::Exhaustive).is_err());
        assert_eq!(binomial(6, 3), 20.0);
    }

    #[test]
    fn hand_built_two_thirds() {
        // q1: the shortest right-judged sample is correct.
        // q2: the shortest right-judged sample is wrong.
        // q3: nothing judged right; the shortest trace overall is correct.
        let pools = [
            pool("q1", &[(true, R, 10), (false, R, 20), (false, W, 5)]),
            pool("q2", &[(true, R, 30), (false, R, 20), (true, W, 5)]),
            pool("q3", &[(false, W, 30), (true, W, 2), (false, W, 5)]),
        ];
        let v = pass1_select_at_k(&pools, 3, Strategy::Shortest, 1, 0).unwrap();
        assert_eq!(v, 2.0 / 3.0);
    }

    #[test]
    fn all_wrong_scores_zero() {
        let pools = [pool("a", &[(false, W, 3), (false, W, 4)]), pool("b", &[(false, W, 1), (false, W, 1)])];
        assert_eq!(pass1_select_at_k(&pools, 2, Strategy::Shortest, 10, 1).unwrap(), 0.0);
        assert!(pass1_select_at_k(&pools, 3, Strategy::Shortest, 1, 1).is_err());
    }

    #[test]
    fn duplicate_sample_indices() {
        let mut p = pool("q", &[(true, R, 1), (true, R, 1)]);
        p.samples[1].sample_index = 0;
        assert!(matches!(p.validate(), Err(Error::DuplicateKey(_))));
    }
}
