use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::select::{binomial, mean, select_per_question, DrawPlan, QuestionSelection};
use super::{critique_accuracy_all_k, pass_at_k, SamplePool, Strategy};
use crate::{Difficulty, Error, Result};

pub const REPORT_SCHEMA_ID: &str = "reasonforge.eval-report.v1";

/// Subset count up to which curves enumerate every k-subset.
pub const EXHAUSTIVE_CAP: f64 = 20_000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n_questions: usize,
    pub n_samples: usize,
    pub pass_at_1: f64,
    pub pass_at_k: f64,
    pub pass1_select_at_k: f64,
    pub critique_accuracy_all_k: f64,
    /// Draws in which no sample was judged right and the fallback chose.
    pub selection_fallback_draws: usize,
    pub selection_draws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema: String,
    pub k: usize,
    pub strategy: Strategy,
    pub n_resamples: usize,
    pub seeds: Vec<u64>,
    /// easy / medium / hard; questions without a difficulty only count
    /// towards `overall`.
    pub per_difficulty: BTreeMap<String, ReportRow>,
    pub overall: ReportRow,
}

fn pass1(pool: &SamplePool) -> f64 {
    pool.n_correct() as f64 / pool.samples.len() as f64
}

fn check_pools(pools: &[SamplePool], k: usize) -> Result<()> {
    if pools.is_empty() {
        return Err(Error::Metric("no sample pools".into()));
    }
    let mut ids = HashSet::new();
    for p in pools {
        p.validate()?;
        if !ids.insert(p.question_id.as_str()) {
            return Err(Error::DuplicateKey(p.question_id.clone()));
        }
        if p.samples.len() < k {
            return Err(Error::Metric(format!(
                "question {} has {} samples, fewer than k = {k}",
                p.question_id,
                p.samples.len()
            )));
        }
    }
    Ok(())
}

fn row(pools: &[&SamplePool], selections: &[&QuestionSelection], k: usize) -> Result<ReportRow> {
    let owned: Vec<SamplePool> = pools.iter().map(|p| (*p).clone()).collect();
    Ok(ReportRow {
        n_questions: pools.len(),
        n_samples: pools.iter().map(|p| p.samples.len()).sum(),
        pass_at_1: mean(pools.iter().map(|p| pass1(p))),
        pass_at_k: mean(
            pools.iter().map(|p| pass_at_k(p.samples.len(), p.n_correct(), k)).collect::<Result<Vec<_>>>()?,
        ),
        pass1_select_at_k: mean(selections.iter().map(|s| s.score)),
        critique_accuracy_all_k: critique_accuracy_all_k(&owned, k)?,
        selection_fallback_draws: selections.iter().map(|s| s.fallback_draws).sum(),
        selection_draws: selections.iter().map(|s| s.draws).sum(),
    })
}

pub fn build_report(
    pools: &[SamplePool],
    k: usize,
    strategy: Strategy,
    n_resamples: usize,
    seed: u64,
) -> Result<EvalReport> {
    check_pools(pools, k)?;
    let selections = select_per_question(pools, k, strategy, DrawPlan::Resample { n_resamples, seed })?;
    let mut per_difficulty = BTreeMap::new();
    for d in [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard] {
        let (ps, ss): (Vec<&SamplePool>, Vec<&QuestionSelection>) =
            pools.iter().zip(&selections).filter(|(p, _)| p.difficulty == d).unzip();
        if !ps.is_empty() {
            per_difficulty.insert(d.as_str().to_string(), row(&ps, &ss, k)?);
        }
    }
    let all: Vec<&SamplePool> = pools.iter().collect();
    let sel: Vec<&QuestionSelection> = selections.iter().collect();
    Ok(EvalReport {
        schema: REPORT_SCHEMA_ID.into(),
        k,
        strategy,
        n_resamples,
        seeds: vec![seed],
        per_difficulty,
        overall: row(&all, &sel, k)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub k: usize,
    pub pass_at_1: f64,
    pub pass1_select_at_k: f64,
    pub pass_at_k: f64,
}

/// pass@1, pass@1|select@k and pass@k for k = 1..=k_max.
///
/// Selection is scored over every k-subset when that is at most
/// [`EXHAUSTIVE_CAP`] subsets per pool, otherwise over seeded draws.
pub fn gap_curves(
    pools: &[SamplePool],
    k_max: usize,
    strategy: Strategy,
    n_resamples: usize,
    seed: u64,
) -> Result<Vec<GapRow>> {
    if k_max == 0 {
        return Err(Error::Metric("k_max must be positive".into()));
    }
    check_pools(pools, k_max)?;
    let p1 = mean(pools.iter().map(pass1));
    (1..=k_max)
        .map(|k| {
            let plan = if pools.iter().all(|p| binomial(p.samples.len(), k) <= EXHAUSTIVE_CAP) {
                DrawPlan::Exhaustive
            } else {
                DrawPlan::Resample { n_resamples, seed }
            };
            let sel = select_per_question(pools, k, strategy, plan)?;
            Ok(GapRow {
                k,
                pass_at_1: p1,
                pass1_select_at_k: mean(sel.iter().map(|s| s.score)),
                pass_at_k: mean(
                    pools.iter().map(|p| pass_at_k(p.samples.len(), p.n_correct(), k)).collect::<Result<Vec<_>>>()?,
                ),
            })
        })
        .collect()
}

pub fn curves_csv(rows: &[GapRow]) -> String {
    let mut out = String::from("k,pass_at_1,pass1_select_at_k,pass_at_k\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.k, r.pass_at_1, r.pass1_select_at_k, r.pass_at_k));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Sample;
    use crate::Judgment;

    fn pool(id: &str, difficulty: Difficulty, correct: &[bool], oracle: bool) -> SamplePool {
        SamplePool {
            question_id: id.into(),
            difficulty,
            samples: correct
                .iter()
                .enumerate()
                .map(|(i, &ok)| Sample {
                    sample_index: i as u32,
                    is_correct: ok,
                    judgment: Some(if ok == oracle { Judgment::Right } else { Judgment::Wrong }),
                    critique_trace_length: Some(100 - i as u64),
                })
                .collect(),
        }
    }

    #[test]
    fn all_correct_curves_are_flat() {
        let pools = vec![pool("a", Difficulty::Easy, &[true; 5], true)];
        for r in gap_curves(&pools, 4, Strategy::Shortest, 10, 1).unwrap() {
            assert_eq!((r.pass_at_1, r.pass1_select_at_k, r.pass_at_k), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn oracle_selection_tracks_coverage() {
        let pools = vec![
            pool("a", Difficulty::Easy, &[true, false, false, false, true], true),
            pool("b", Difficulty::Hard, &[false, false, true, false, false], true),
        ];
        for r in gap_curves(&pools, 5, Strategy::Shortest, 10, 1).unwrap() {
            assert!((r.pass1_select_at_k - r.pass_at_k).abs() < 1e-12, "{r:?}");
            assert!(r.pass_at_1 <= r.pass1_select_at_k + 1e-12);
        }
        let csv = curves_csv(&gap_curves(&pools, 2, Strategy::Shortest, 10, 1).unwrap());
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("k,pass_at_1,"));
    }

    #[test]
    fn report_buckets() {
        let mut unknown = pool("c", Difficulty::Unknown, &[false, true], true);
        unknown.samples[0].judgment = Some(Judgment::Right);
        let pools = vec![
            pool("a", Difficulty::Easy, &[true, false], true),
            pool("b", Difficulty::Hard, &[false, false], true),
            unknown,
        ];
        let r = build_report(&pools, 2, Strategy::Shortest, 5, 7).unwrap();
        assert_eq!(r.schema, REPORT_SCHEMA_ID);
        assert_eq!(r.per_difficulty.keys().collect::<Vec<_>>(), ["easy", "hard"]);
        assert_eq!(r.overall.n_questions, 3);
        assert_eq!(r.overall.n_samples, 6);
        assert_eq!(r.per_difficulty["easy"].pass_at_1, 0.5);
        assert_eq!(r.per_difficulty["hard"].pass_at_k, 0.0);
        assert!((r.overall.critique_accuracy_all_k - 2.0 / 3.0).abs() < 1e-12);
        assert!(build_report(&pools, 3, Strategy::Shortest, 5, 7).is_err());
    }
}
