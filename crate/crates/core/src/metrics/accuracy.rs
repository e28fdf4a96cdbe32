use serde::{Deserialize, Serialize};

use super::select::mean;
use super::SamplePool;
use crate::{Error, Judgment, Result};

fn agrees(judgment: Judgment, is_correct: bool) -> bool {
    (judgment == Judgment::Right) == is_correct
}

/// Share of questions whose first `k` judgments all agree with the ground
/// truth.
pub fn critique_accuracy_all_k(pools: &[SamplePool], k: usize) -> Result<f64> {
    if pools.is_empty() {
        return Err(Error::Metric("no sample pools".into()));
    }
    if k == 0 {
        return Err(Error::Metric("k must be positive".into()));
    }
    let scores = pools
        .iter()
        .map(|pool| {
            if pool.samples.len() < k {
                return Err(Error::Metric(format!(
                    "question {} has {} samples, fewer than k = {k}",
                    pool.question_id,
                    pool.samples.len()
                )));
            }
            let mut all = true;
            for s in &pool.samples[..k] {
                let j = s.judgment.ok_or_else(|| {
                    Error::Metric(format!("question {}: sample {} has no judgment", pool.question_id, s.sample_index))
                })?;
                all &= agrees(j, s.is_correct);
            }
            Ok(if all { 1.0 } else { 0.0 })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean(scores))
}

/// A critic's verdict on a solution with known correctness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledJudgment {
    pub judgment: Judgment,
    /// True when the solution is correct.
    pub ground_truth: bool,
}

/// Per-solution accuracy over pooled correct/incorrect pairs.
pub fn pairwise_critique_accuracy(labeled: &[LabeledJudgment]) -> Result<f64> {
    if labeled.is_empty() {
        return Err(Error::Metric("no labeled judgments".into()));
    }
    let hits = labeled.iter().filter(|l| agrees(l.judgment, l.ground_truth)).count();
    Ok(hits as f64 / labeled.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Sample;
    use crate::Difficulty;
    use Judgment::{Right as R, Wrong as W};

    fn pool(id: &str, s: &[(bool, Judgment)]) -> SamplePool {
        SamplePool {
            question_id: id.into(),
            difficulty: Difficulty::Medium,
            samples: s
                .iter()
                .enumerate()
                .map(|(i, &(ok, j))| Sample {
                    sample_index: i as u32,
                    is_correct: ok,
                    judgment: Some(j),
                    critique_trace_length: Some(1),
                })
                .collect(),
        }
    }

    #[test]
    fn all_k() {
        let good = [pool("a", &[(true, R), (false, W)]), pool("b", &[(false, W), (true, R)])];
        assert_eq!(critique_accuracy_all_k(&good, 2).unwrap(), 1.0);
        let one_off = [pool("a", &[(true, R), (false, R)]), pool("b", &[(false, W), (true, R)])];
        assert_eq!(critique_accuracy_all_k(&one_off, 2).unwrap(), 0.5);
        // only the first sample counts at k = 1
        assert_eq!(critique_accuracy_all_k(&one_off, 1).unwrap(), 1.0);
        assert!(critique_accuracy_all_k(&one_off, 3).is_err());
        let mut missing = one_off.clone();
        missing[0].samples[0].judgment = None;
        assert!(critique_accuracy_all_k(&missing, 1).is_err());
    }

    #[test]
    fn pairwise() {
        let l = |judgment, ground_truth| LabeledJudgment { judgment, ground_truth };
        assert_eq!(pairwise_critique_accuracy(&[l(R, true), l(W, false)]).unwrap(), 1.0);
        assert_eq!(pairwise_critique_accuracy(&[l(R, false)]).unwrap(), 0.0);
        assert_eq!(pairwise_critique_accuracy(&[l(R, true), l(W, false), l(W, true), l(R, true)]).unwrap(), 0.75);
        assert!(pairwise_critique_accuracy(&[]).is_err());
    }
}
