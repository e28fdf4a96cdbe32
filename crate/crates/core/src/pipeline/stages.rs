use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::{EmbedderKind, JudgeKind, ProviderKind};
use super::manifest::{now, ArtifactDigest, RunManifest, StageStatus, Step, MANIFEST_SCHEMA_ID};
use super::records::{fenced, unique_keys};
use super::{
    script_from_solutions, CritiqueRecord, DatasetTriple, PipelineConfig, RawRecord, Rejection, SolutionRecord,
    StageCounts,
};
use crate::corpus::{
    decontaminate, dedup, BenchmarkItem, ContaminationVerdict, DecontamOptions, EmbeddingProvider, FuzzyJudge,
    HashingEmbedder, HttpEmbedder, JudgeProvider, LlmJudge,
};
use crate::exec::{default_workers, evaluate_solution, select_tests, ExecutionResult};
use crate::llm::{
    generate, render_critique_prompt, render_solution_prompt, CompletionProvider, HttpProvider, MockProvider,
    MockScript, RawResponse, RetryPolicy, SamplingParams,
};
use crate::metrics::{build_report, curves_csv, gap_curves, EvalReport, Sample, SamplePool};
use crate::postproc::{parse_critique_response, parse_solution_response, ParsedSolution};
use crate::seed::{combine, sha256_hex};
use crate::{jsonl, CodeLanguage, Error, Question, Result};

pub const RUN_REPORT_SCHEMA_ID: &str = "reasonforge.run-report.v1";

/// A solution that was not executed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecExclusion {
    pub question_id: String,
    pub sample_index: u32,
    pub code_language: CodeLanguage,
    pub reason: String,
}

/// A question left out of the metrics for one language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedPool {
    pub question_id: String,
    pub code_language: CodeLanguage,
    /// Samples with both an execution result and an accepted critique.
    pub n_samples: usize,
}

/// Evaluation output of a run: one report per solution language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub reports: BTreeMap<CodeLanguage, EvalReport>,
    /// Pools with fewer than k usable samples.
    pub excluded_pools: Vec<ExcludedPool>,
}

/// Progress of a step, filled in as it goes so failures can still be
/// recorded.
#[derive(Debug, Default)]
struct Progress {
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    counts: StageCounts,
    resumed: usize,
    toolchain: BTreeMap<String, String>,
    content_digest: Option<String>,
}

/// A configured run: the config plus the completion provider it names.
pub struct Pipeline {
    config: PipelineConfig,
    provider: Arc<dyn CompletionProvider>,
}

impl Pipeline {
    /// Builds the provider described by the config.
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let provider: Arc<dyn CompletionProvider> = match config.provider.kind {
            ProviderKind::Http => Arc::new(HttpProvider::new(config.http_profile()?)?),
            ProviderKind::Mock => {
                let p = &config.provider;
                let mut script = match &p.mock_script {
                    Some(path) => MockScript::load(path)?,
                    None => MockScript::new(),
                };
                if let Some(dir) = &p.mock_solutions {
                    let questions = read_questions(&config.input.questions)?;
                    script.merge(script_from_solutions(
                        &questions,
                        &config.generate.languages,
                        dir,
                        &p.mock_labels,
                        p.mock_malformed,
                    )?);
                }
                Arc::new(MockProvider::new(script))
            }
        };
        Ok(Self { config, provider })
    }

    pub fn with_provider(config: PipelineConfig, provider: Arc<dyn CompletionProvider>) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, provider })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn out_dir(&self) -> &Path {
        &self.config.run.out_dir
    }

    pub fn path(&self, step: Step, file: &str) -> PathBuf {
        self.out_dir().join(step.label()).join(file)
    }

    pub fn manifest_path(&self, step: Step) -> PathBuf {
        self.out_dir().join("manifests").join(format!("{}.json", step.label()))
    }

    /// Questions that survive dedup and decontamination.
    pub fn questions_path(&self) -> PathBuf {
        self.path(Step::Decontaminate, "questions.jsonl")
    }

    pub fn solutions_path(&self) -> PathBuf {
        self.path(Step::PostprocessSolutions, "solutions.jsonl")
    }

    pub fn critiques_path(&self) -> PathBuf {
        self.path(Step::PostprocessCritiques, "critiques.jsonl")
    }

    pub fn results_path(&self) -> PathBuf {
        self.path(Step::Execute, "results.jsonl")
    }

    pub fn report_path(&self) -> PathBuf {
        self.path(Step::Evaluate, "report.json")
    }

    pub fn dataset_path(&self) -> PathBuf {
        self.path(Step::Evaluate, "dataset.jsonl")
    }

    /// Runs every step in order. Steps whose manifest is still valid are
    /// skipped unless `fresh` is set; interrupted steps resume from their
    /// checkpoints.
    pub fn run(&self, fresh: bool) -> Result<Vec<RunManifest>> {
        let mut manifests = Vec::new();
        for step in Step::ALL {
            if !fresh {
                if let Some(m) = self.reusable(step) {
                    tracing::info!(step = step.label(), "unchanged, skipping");
                    manifests.push(m);
                    continue;
                }
            }
            manifests.push(self.run_step(step)?);
        }
        Ok(manifests)
    }

    fn reusable(&self, step: Step) -> Option<RunManifest> {
        let m = RunManifest::load(&self.manifest_path(step)).ok()?;
        m.still_valid(&self.config.run_id(), &self.step_inputs(step)).then_some(m)
    }

    fn step_inputs(&self, step: Step) -> Vec<PathBuf> {
        let c = &self.config;
        match step {
            Step::Dedup => vec![c.input.questions.clone()],
            Step::Decontaminate => {
                let mut v = vec![self.path(Step::Dedup, "questions.jsonl")];
                if c.decontaminate.enabled {
                    v.extend(c.input.benchmark_items.clone());
                }
                v
            }
            Step::Generate => vec![self.questions_path()],
            Step::PostprocessSolutions => vec![self.path(Step::Generate, "raw.jsonl")],
            Step::Critique => vec![self.questions_path(), self.solutions_path()],
            Step::PostprocessCritiques => vec![self.path(Step::Critique, "raw.jsonl")],
            Step::Execute => vec![self.questions_path(), self.solutions_path()],
            Step::Evaluate => vec![
                self.questions_path(),
                self.solutions_path(),
                self.critiques_path(),
                self.results_path(),
                self.path(Step::Execute, "excluded.jsonl"),
            ],
        }
    }

    /// Runs one step and writes its manifest, also on failure.
    pub fn run_step(&self, step: Step) -> Result<RunManifest> {
        let started_at = now();
        let mut progress = Progress { inputs: self.step_inputs(step), ..Progress::default() };
        let result = match step {
            Step::Dedup => self.dedup_step(&mut progress),
            Step::Decontaminate => self.decontaminate_step(&mut progress),
            Step::Generate => self.generate_step(&mut progress),
            Step::PostprocessSolutions => self.postprocess_solutions_step(&mut progress),
            Step::Critique => self.critique_step(&mut progress),
            Step::PostprocessCritiques => self.postprocess_critiques_step(&mut progress),
            Step::Execute => self.execute_step(&mut progress),
            Step::Evaluate => self.evaluate_step(&mut progress),
        }
        .and_then(|()| progress.counts.check(step.label()));
        if result.is_ok() {
            remove_checkpoints(&self.out_dir().join(step.label()))?;
        }

        let digests = |paths: &[PathBuf]| -> Result<Vec<ArtifactDigest>> {
            paths.iter().filter(|p| p.exists()).map(|p| ArtifactDigest::of(p)).collect()
        };
        let mut seeds = BTreeMap::from([("run".to_string(), self.config.run.seed)]);
        match step {
            Step::Generate | Step::Critique if self.config.provider.kind == ProviderKind::Mock => {
                seeds.insert("mock_provider".into(), self.config.run.seed);
            }
            Step::Execute => {
                seeds.insert("test_selection".into(), self.config.run.seed);
            }
            Step::Evaluate => {
                seeds.insert("selection_resample".into(), self.config.run.seed);
            }
            _ => {}
        }
        let manifest = RunManifest {
            schema: MANIFEST_SCHEMA_ID.into(),
            run_id: self.config.run_id(),
            stage: step.stage(),
            step,
            status: if result.is_ok() { StageStatus::Completed } else { StageStatus::Failed },
            config: self.config.snapshot(),
            inputs: digests(&progress.inputs)?,
            outputs: if result.is_ok() { digests(&progress.outputs)? } else { Vec::new() },
            seeds,
            started_at,
            finished_at: now(),
            provider_profile: self.config.provider_profile_name(),
            counts: progress.counts,
            resumed: progress.resumed,
            toolchain: progress.toolchain,
            content_digest: progress.content_digest,
            error: result.as_ref().err().map(ToString::to_string),
        };
        manifest.save(&self.manifest_path(step))?;
        result.map(|()| manifest)
    }

    /// Checkpoint file for a step, specific to this config and these input
    /// contents so a changed run never resumes from stale records.
    fn checkpoint(&self, step: Step, progress: &Progress) -> Result<PathBuf> {
        let mut key = self.config.run_id();
        for p in &progress.inputs {
            key.push_str(&ArtifactDigest::of(p)?.sha256);
        }
        Ok(self.path(step, &format!("checkpoint-{}.jsonl", &sha256_hex(key.as_bytes())[..16])))
    }

    fn require(&self, path: &Path) -> Result<()> {
        if path.exists() {
            Ok(())
        } else {
            Err(Error::Validation(format!("{} is missing; run the earlier stages first", path.display())))
        }
    }

    fn write<T: Serialize>(&self, progress: &mut Progress, path: PathBuf, items: &[T]) -> Result<()> {
        jsonl::write(&path, items)?;
        progress.outputs.push(path);
        Ok(())
    }

    fn dedup_step(&self, progress: &mut Progress) -> Result<()> {
        let questions = read_questions(&self.config.input.questions)?;
        progress.counts.input = questions.len();
        let (kept, clusters) = if self.config.dedup.enabled {
            let out = dedup(&questions, self.config.dedup.threshold)?;
            (out.retained, out.clusters)
        } else {
            let mut all = questions.clone();
            all.sort_by(|a, b| a.id.cmp(&b.id));
            unique_keys(all.iter().map(|q| (q.id.as_str(), 0)), "question")?;
            (all, Vec::new())
        };
        progress.counts.accepted = kept.len();
        for _ in kept.len()..questions.len() {
            progress.counts.reject("duplicate");
        }
        self.write(progress, self.path(Step::Dedup, "questions.jsonl"), &kept)?;
        self.write(progress, self.path(Step::Dedup, "clusters.jsonl"), &clusters)
    }

    fn decontaminate_step(&self, progress: &mut Progress) -> Result<()> {
        let input = self.path(Step::Dedup, "questions.jsonl");
        self.require(&input)?;
        let questions: Vec<Question> = jsonl::read(&input)?;
        progress.counts.input = questions.len();
        let c = &self.config.decontaminate;
        let (kept, verdicts) = if c.enabled {
            let items_path = self.config.input.benchmark_items.as_ref().expect("validated");
            let items: Vec<BenchmarkItem> = jsonl::read(items_path)?;
            let embedder: Box<dyn EmbeddingProvider> = match c.embedder {
                EmbedderKind::Hashing => Box::new(HashingEmbedder::default()),
                EmbedderKind::Http => Box::new(HttpEmbedder::new(
                    crate::llm::ProviderProfile::load(c.embedder_profile.as_ref().expect("validated"))?,
                    self.config.provider.retry.clone(),
                )?),
            };
            let judge: Box<dyn JudgeProvider> = match c.judge {
                JudgeKind::Fuzzy => Box::new(FuzzyJudge::default()),
                JudgeKind::Llm => Box::new(LlmJudge::new(self.provider.clone(), self.config.provider.retry.clone())),
            };
            let checkpoint = self.checkpoint(Step::Decontaminate, progress)?;
            let resume: Vec<ContaminationVerdict> = read_checkpoint(&checkpoint)?;
            progress.resumed = resume.len();
            let options = DecontamOptions { screen_threshold: c.screen_threshold, in_flight: c.in_flight, resume };
            match decontaminate(&questions, &items, embedder.as_ref(), judge.as_ref(), &options) {
                Ok(out) => out,
                Err(failure) => {
                    progress.counts.accepted = failure.completed.iter().filter(|v| !v.removed).count();
                    jsonl::write(&checkpoint, &failure.completed)?;
                    return Err(failure.error);
                }
            }
        } else {
            (questions.clone(), Vec::new())
        };
        progress.counts.accepted = kept.len();
        for _ in kept.len()..questions.len() {
            progress.counts.reject("contaminated");
        }
        self.write(progress, self.questions_path(), &kept)?;
        self.write(progress, self.path(Step::Decontaminate, "verdicts.jsonl"), &verdicts)
    }

    fn generate_step(&self, progress: &mut Progress) -> Result<()> {
        let input = self.questions_path();
        self.require(&input)?;
        let questions: Vec<Question> = jsonl::read(&input)?;
        let params = self.config.solution_params();
        let n = params.n_samples;
        let mut jobs = Vec::new();
        for q in &questions {
            for &language in &self.config.generate.languages {
                jobs.push(SolutionJob { question: q, language, first_index: self.config.sample_offset(language) });
            }
        }
        progress.counts.input = jobs.len() * n as usize;

        let checkpoint = self.checkpoint(Step::Generate, progress)?;
        let mut by_key = keyed(read_checkpoint::<RawRecord>(&checkpoint)?, |r| (r.question_id.clone(), r.sample_index));
        progress.resumed = by_key.len();
        let pending: Vec<SolutionJob> = jobs
            .into_iter()
            .filter(|j| (j.first_index..j.first_index + n).any(|i| !by_key.contains_key(&(j.question.id.clone(), i))))
            .collect();
        let outcome = with_checkpoint(&checkpoint, |on_record| {
            generate_solutions(
                &pending,
                &params,
                self.provider.as_ref(),
                &self.config.provider.retry,
                self.config.generate.in_flight,
                on_record,
            )
        })?;
        by_key.extend(outcome.records.into_iter().map(|r| ((r.question_id.clone(), r.sample_index), r)));
        progress.counts.accepted = by_key.len();
        outcome.error.map_or(Ok(()), Err)?;
        let records: Vec<RawRecord> = by_key.into_values().collect();
        self.write(progress, self.path(Step::Generate, "raw.jsonl"), &records)
    }

    fn postprocess_solutions_step(&self, progress: &mut Progress) -> Result<()> {
        let input = self.path(Step::Generate, "raw.jsonl");
        self.require(&input)?;
        let raw: Vec<RawRecord> = jsonl::read(&input)?;
        progress.counts.input = raw.len();
        let (accepted, rejected) = postprocess_solutions(&raw)?;
        progress.counts.accepted = accepted.len();
        for r in &rejected {
            progress.counts.reject(&r.reason);
        }
        self.write(progress, self.solutions_path(), &accepted)?;
        self.write(progress, self.path(Step::PostprocessSolutions, "rejections.jsonl"), &rejected)
    }

    fn critique_step(&self, progress: &mut Progress) -> Result<()> {
        self.require(&self.questions_path())?;
        self.require(&self.solutions_path())?;
        let questions = question_map(jsonl::read(&self.questions_path())?);
        let solutions: Vec<SolutionRecord> = jsonl::read(&self.solutions_path())?;
        progress.counts.input = solutions.len();

        let checkpoint = self.checkpoint(Step::Critique, progress)?;
        let mut by_key = keyed(read_checkpoint::<RawRecord>(&checkpoint)?, |r| (r.question_id.clone(), r.sample_index));
        progress.resumed = by_key.len();
        let mut pending = Vec::new();
        for s in &solutions {
            let q = questions.get(&s.question_id).ok_or_else(|| unknown_question(&s.question_id))?;
            if !by_key.contains_key(&(s.question_id.clone(), s.sample_index)) {
                pending.push((q, s));
            }
        }
        let outcome = with_checkpoint(&checkpoint, |on_record| {
            generate_critiques(
                &pending,
                &self.config.critique_params(),
                self.provider.as_ref(),
                &self.config.provider.retry,
                self.config.critique.in_flight,
                on_record,
            )
        })?;
        by_key.extend(outcome.records.into_iter().map(|r| ((r.question_id.clone(), r.sample_index), r)));
        progress.counts.accepted = by_key.len();
        outcome.error.map_or(Ok(()), Err)?;
        let records: Vec<RawRecord> = by_key.into_values().collect();
        self.write(progress, self.path(Step::Critique, "raw.jsonl"), &records)
    }

    fn postprocess_critiques_step(&self, progress: &mut Progress) -> Result<()> {
        let input = self.path(Step::Critique, "raw.jsonl");
        self.require(&input)?;
        let raw: Vec<RawRecord> = jsonl::read(&input)?;
        progress.counts.input = raw.len();
        let (accepted, rejected) = postprocess_critiques(&raw)?;
        progress.counts.accepted = accepted.len();
        for r in &rejected {
            progress.counts.reject(&r.reason);
        }
        self.write(progress, self.critiques_path(), &accepted)?;
        self.write(progress, self.path(Step::PostprocessCritiques, "rejections.jsonl"), &rejected)
    }

    fn execute_step(&self, progress: &mut Progress) -> Result<()> {
        self.require(&self.questions_path())?;
        self.require(&self.solutions_path())?;
        let questions = question_map(jsonl::read(&self.questions_path())?);
        let solutions: Vec<SolutionRecord> = jsonl::read(&self.solutions_path())?;
        unique_keys(solutions.iter().map(|s| (s.question_id.as_str(), s.sample_index)), "solution")?;
        progress.counts.input = solutions.len();
        let exec = &self.config.execute;
        let seed = self.config.run.seed;
        for (tool, version) in exec.toolchain.versions()? {
            progress.toolchain.insert(tool, version);
        }
        for lang in CodeLanguage::ALL {
            progress.toolchain.insert(format!("{lang}_command"), exec.toolchain.describe(lang));
        }

        let mut runnable = Vec::new();
        let mut excluded = Vec::new();
        for s in &solutions {
            let q = questions.get(&s.question_id).ok_or_else(|| unknown_question(&s.question_id))?;
            match select_tests(q, seed) {
                Ok(_) => runnable.push((q, s)),
                Err(Error::NotEnoughTests { .. }) => {
                    progress.counts.reject("not_enough_tests");
                    excluded.push(ExecExclusion {
                        question_id: s.question_id.clone(),
                        sample_index: s.sample_index,
                        code_language: s.code_language,
                        reason: "not_enough_tests".into(),
                    });
                }
                Err(e) => return Err(e),
            }
        }

        let checkpoint = self.checkpoint(Step::Execute, progress)?;
        let done: Vec<ExecutionResult> = read_checkpoint(&checkpoint)?;
        let mut by_key: BTreeMap<(String, u32), ExecutionResult> =
            done.into_iter().map(|r| ((r.question_id.clone(), r.sample_index), r)).collect();
        let pending: Vec<_> =
            runnable.iter().filter(|(_, s)| !by_key.contains_key(&(s.question_id.clone(), s.sample_index))).collect();
        progress.resumed = by_key.len();

        let workers = if exec.jobs == 0 { default_workers() } else { exec.jobs };
        let appender = Mutex::new(jsonl::Appender::open(&checkpoint)?);
        let fresh = Mutex::new(Vec::new());
        let outcome = run_pool(workers, &pending, |(q, s)| {
            let solution = ParsedSolution::from_source(s.code_language, s.solution_source.clone());
            let result = evaluate_solution(q, &solution, s.sample_index, &exec.policy, &exec.toolchain, seed)?;
            appender.lock().unwrap().append(&result)?;
            fresh.lock().unwrap().push(result);
            Ok(())
        });
        for r in fresh.into_inner().unwrap() {
            by_key.insert((r.question_id.clone(), r.sample_index), r);
        }
        progress.counts.accepted = by_key.len();
        outcome?;
        let results: Vec<ExecutionResult> = by_key.into_values().collect();
        progress.content_digest = Some(verdict_digest(&results)?);
        self.write(progress, self.results_path(), &results)?;
        self.write(progress, self.path(Step::Execute, "excluded.jsonl"), &excluded)
    }

    fn evaluate_step(&self, progress: &mut Progress) -> Result<()> {
        for p in self.step_inputs(Step::Evaluate) {
            self.require(&p)?;
        }
        let questions: Vec<Question> = jsonl::read(&self.questions_path())?;
        let solutions: Vec<SolutionRecord> = jsonl::read(&self.solutions_path())?;
        let critiques: Vec<CritiqueRecord> = jsonl::read(&self.critiques_path())?;
        let results: Vec<ExecutionResult> = jsonl::read(&self.results_path())?;
        progress.counts.input = results.len();

        let ev = &self.config.evaluate;
        let seed = self.config.run.seed;
        let (pools, excluded_pools) =
            build_pools(&questions, &solutions, &critiques, &results, ev.k, &mut progress.counts)?;
        let mut reports = BTreeMap::new();
        for (lang, lang_pools) in &pools {
            if lang_pools.is_empty() {
                continue;
            }
            let path = self.path(Step::Evaluate, &format!("pools_{lang}.jsonl"));
            self.write(progress, path, lang_pools)?;
            reports.insert(*lang, build_report(lang_pools, ev.k, ev.strategy, ev.n_resamples, seed)?);
            if let Some(k_max) = ev.curves_k_max {
                let usable: Vec<SamplePool> = lang_pools.iter().filter(|p| p.samples.len() >= k_max).cloned().collect();
                if !usable.is_empty() {
                    let rows = gap_curves(&usable, k_max, ev.strategy, ev.n_resamples, seed)?;
                    let path = self.path(Step::Evaluate, &format!("curves_{lang}.csv"));
                    std::fs::write(&path, curves_csv(&rows)).map_err(|e| Error::io(&path, e))?;
                    progress.outputs.push(path);
                }
            }
        }
        if reports.is_empty() {
            return Err(Error::Metric(format!(
                "no question has {} samples with both an execution result and a critique",
                ev.k
            )));
        }
        let report = RunReport { schema: RUN_REPORT_SCHEMA_ID.into(), reports, excluded_pools };
        let path = self.report_path();
        let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        progress.outputs.push(path);

        let triples = emit_dataset(&questions, &solutions, &critiques, &results)?;
        self.write(progress, self.dataset_path(), &triples)
    }

    /// Re-emits the dataset from the stage outputs into `out`.
    pub fn write_dataset(&self, out: &Path) -> Result<usize> {
        for p in [self.questions_path(), self.solutions_path(), self.critiques_path(), self.results_path()] {
            self.require(&p)?;
        }
        let triples = emit_dataset(
            &jsonl::read(&self.questions_path())?,
            &jsonl::read(&self.solutions_path())?,
            &jsonl::read(&self.critiques_path())?,
            &jsonl::read(&self.results_path())?,
        )?;
        jsonl::write(out, &triples)?;
        Ok(triples.len())
    }
}

/// Records produced by a batch, plus the first error if any job failed.
/// Jobs that succeeded are kept either way.
#[derive(Debug)]
pub struct BatchOutcome {
    pub records: Vec<RawRecord>,
    pub error: Option<Error>,
}

impl BatchOutcome {
    pub fn into_result(self) -> Result<Vec<RawRecord>> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self.records),
        }
    }
}

/// Samples for one question in one language, stored under
/// `first_index..first_index + n_samples`.
#[derive(Debug, Clone, Copy)]
pub struct SolutionJob<'a> {
    pub question: &'a Question,
    pub language: CodeLanguage,
    pub first_index: u32,
}

type OnRecord<'a> = &'a (dyn Fn(&RawRecord) -> Result<()> + Sync);

fn collect_batch<T: Sync>(
    threads: usize,
    items: &[T],
    on_record: OnRecord<'_>,
    work: impl Fn(&T) -> Result<Vec<RawRecord>> + Sync,
) -> Result<BatchOutcome> {
    let records = Mutex::new(Vec::new());
    let outcome = run_pool(threads, items, |item| {
        let batch = work(item)?;
        for r in &batch {
            on_record(r)?;
        }
        records.lock().unwrap().extend(batch);
        Ok(())
    });
    let mut records = records.into_inner().unwrap();
    records.sort_by(|a, b| (&a.question_id, a.sample_index).cmp(&(&b.question_id, b.sample_index)));
    Ok(BatchOutcome { records, error: outcome.err() })
}

/// Draws `params.n_samples` solutions per job with at most `in_flight`
/// requests at a time. `on_record` sees every record as soon as its job
/// finishes.
pub fn generate_solutions(
    jobs: &[SolutionJob<'_>],
    params: &SamplingParams,
    provider: &dyn CompletionProvider,
    retry: &RetryPolicy,
    in_flight: usize,
    on_record: OnRecord<'_>,
) -> Result<BatchOutcome> {
    params.validate()?;
    let prompts = jobs.iter().map(|j| render_solution_prompt(j.question, j.language)).collect::<Result<Vec<_>>>()?;
    let indexed: Vec<(usize, &SolutionJob)> = jobs.iter().enumerate().collect();
    collect_batch(in_flight, &indexed, on_record, |(i, job)| {
        let responses = generate(&prompts[*i], params, provider, retry)?;
        Ok(raw_records(&job.question.id, job.language, job.first_index, &prompts[*i], responses))
    })
}

/// Seed of the critique for one sample, so identical solutions still get
/// independent critiques.
pub fn critique_seed(run_seed: u64, sample_index: u32) -> u64 {
    combine(&[run_seed, u64::from(sample_index)])
}

/// One critique per solution; the critic sees the final code block fenced
/// in its language.
pub fn generate_critiques(
    jobs: &[(&Question, &SolutionRecord)],
    params: &SamplingParams,
    provider: &dyn CompletionProvider,
    retry: &RetryPolicy,
    in_flight: usize,
    on_record: OnRecord<'_>,
) -> Result<BatchOutcome> {
    let base = SamplingParams { n_samples: 1, ..params.clone() };
    base.validate()?;
    let run_seed = base.seed.unwrap_or(0);
    collect_batch(in_flight, jobs, on_record, |(q, s)| {
        let prompt = render_critique_prompt(q, &fenced(s.code_language, &s.solution_source))?;
        let params = base.clone().with_seed(critique_seed(run_seed, s.sample_index));
        let responses = generate(&prompt, &params, provider, retry)?;
        Ok(raw_records(&s.question_id, s.code_language, s.sample_index, &prompt, responses))
    })
}

/// Parses raw solutions; accepted ones keep their final code block.
pub fn postprocess_solutions(raw: &[RawRecord]) -> Result<(Vec<SolutionRecord>, Vec<Rejection>)> {
    unique_keys(raw.iter().map(|r| (r.question_id.as_str(), r.sample_index)), "raw solution")?;
    let parsed: Vec<_> = raw.par_iter().map(|r| parse_solution_response(&r.response, r.code_language)).collect();
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for (r, p) in raw.iter().zip(parsed) {
        match p {
            Ok(sol) => accepted.push(SolutionRecord {
                question_id: r.question_id.clone(),
                sample_index: r.sample_index,
                code_language: r.code_language,
                solution_source: sol.final_source().to_string(),
                reasoning_trace: sol.reasoning_trace,
            }),
            Err(reason) => rejected.push(Rejection::postproc(&r.question_id, r.sample_index, r.code_language, reason)),
        }
    }
    Ok((accepted, rejected))
}

pub fn postprocess_critiques(raw: &[RawRecord]) -> Result<(Vec<CritiqueRecord>, Vec<Rejection>)> {
    unique_keys(raw.iter().map(|r| (r.question_id.as_str(), r.sample_index)), "raw critique")?;
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for r in raw {
        match parse_critique_response(&r.response) {
            Ok(c) => accepted.push(CritiqueRecord {
                question_id: r.question_id.clone(),
                sample_index: r.sample_index,
                code_language: r.code_language,
                judgment: c.judgment,
                critique_trace: c.reasoning_trace,
                trace_length: c.trace_length,
            }),
            Err(reason) => rejected.push(Rejection::postproc(&r.question_id, r.sample_index, r.code_language, reason)),
        }
    }
    Ok((accepted, rejected))
}

fn keyed<T>(items: Vec<T>, key: impl Fn(&T) -> (String, u32)) -> BTreeMap<(String, u32), T> {
    items.into_iter().map(|t| (key(&t), t)).collect()
}

/// Runs `f` with a callback that appends each record to `path`.
fn with_checkpoint<R>(path: &Path, f: impl FnOnce(OnRecord<'_>) -> Result<R>) -> Result<R> {
    let appender = Mutex::new(jsonl::Appender::open(path)?);
    let on_record = |r: &RawRecord| appender.lock().unwrap().append(r);
    f(&on_record)
}

fn unknown_question(id: &str) -> Error {
    Error::Validation(format!("record refers to unknown question {id}"))
}

/// Reads and validates question JSONL; ids must be unique.
pub fn read_questions(path: &Path) -> Result<Vec<Question>> {
    let questions: Vec<Question> = jsonl::read(path)?;
    for q in &questions {
        q.validate()?;
    }
    unique_keys(questions.iter().map(|q| (q.id.as_str(), 0)), "question")?;
    Ok(questions)
}

fn question_map(questions: Vec<Question>) -> HashMap<String, Question> {
    questions.into_iter().map(|q| (q.id.clone(), q)).collect()
}

/// Checkpoint lines; a torn final line from an interrupted write is ignored.
fn read_checkpoint<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let lines: Vec<String> =
        BufReader::new(file).lines().collect::<std::io::Result<_>>().map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(v) => out.push(v),
            Err(_) if i + 1 == lines.len() => {
                // drop the torn line so later appends start on a clean line
                tracing::warn!(path = %path.display(), "ignoring torn checkpoint line");
                let kept: String = lines[..i].iter().map(|l| format!("{l}\n")).collect();
                std::fs::write(path, kept).map_err(|e| Error::io(path, e))?;
            }
            Err(e) => return Err(Error::Parse { path: path.to_path_buf(), line: i + 1, message: e.to_string() }),
        }
    }
    Ok(out)
}

fn remove_checkpoints(dir: &Path) -> Result<()> {
    let Ok(entries) = std::fs::read_dir(dir) else {
        return Ok(());
    };
    for entry in entries.flatten() {
        let path = entry.path();
        if path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("checkpoint-")) {
            std::fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}

fn raw_records(
    question_id: &str,
    code_language: CodeLanguage,
    first_index: u32,
    prompt: &str,
    responses: Vec<RawResponse>,
) -> Vec<RawRecord> {
    let prompt_sha256 = sha256_hex(prompt.as_bytes());
    responses
        .into_iter()
        .enumerate()
        .map(|(i, response)| RawRecord {
            question_id: question_id.into(),
            sample_index: first_index + i as u32,
            code_language,
            prompt_sha256: prompt_sha256.clone(),
            response,
        })
        .collect()
}

/// Runs `work` over `items` on `threads` threads. Every item is attempted;
/// the first error in item order is returned.
fn run_pool<T: Sync>(threads: usize, items: &[T], work: impl Fn(&T) -> Result<()> + Sync) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Validation(format!("cannot build worker pool: {e}")))?;
    let results: Vec<Result<()>> = pool.install(|| items.par_iter().map(&work).collect());
    results.into_iter().collect()
}

/// Digest of execution outcomes without timings or stderr.
fn verdict_digest(results: &[ExecutionResult]) -> Result<String> {
    let lines: Vec<_> = results
        .iter()
        .map(|r| (&r.question_id, r.sample_index, r.code_language, r.compile_status, r.statuses(), r.pass_rate))
        .collect();
    Ok(sha256_hex(jsonl::to_string(&lines)?.as_bytes()))
}

/// Groups executed samples with accepted critiques into per-language pools.
///
/// Samples without a critique count as `no_critique`; pools with fewer than
/// `k` samples are excluded and their samples count as `pool_below_k`.
pub fn build_pools(
    questions: &[Question],
    solutions: &[SolutionRecord],
    critiques: &[CritiqueRecord],
    results: &[ExecutionResult],
    k: usize,
    counts: &mut StageCounts,
) -> Result<(BTreeMap<CodeLanguage, Vec<SamplePool>>, Vec<ExcludedPool>)> {
    unique_keys(critiques.iter().map(|c| (c.question_id.as_str(), c.sample_index)), "critique")?;
    unique_keys(results.iter().map(|r| (r.question_id.as_str(), r.sample_index)), "execution result")?;
    let difficulty: HashMap<&str, _> = questions.iter().map(|q| (q.id.as_str(), q.difficulty)).collect();
    let critique: HashMap<(&str, u32), &CritiqueRecord> =
        critiques.iter().map(|c| ((c.question_id.as_str(), c.sample_index), c)).collect();
    let language: HashMap<(&str, u32), CodeLanguage> =
        solutions.iter().map(|s| ((s.question_id.as_str(), s.sample_index), s.code_language)).collect();

    let mut grouped: BTreeMap<(CodeLanguage, &str), Vec<Sample>> = BTreeMap::new();
    for r in results {
        let key = (r.question_id.as_str(), r.sample_index);
        if language.get(&key) != Some(&r.code_language) {
            return Err(Error::Validation(format!(
                "execution result ({}, {}) has no matching solution",
                r.question_id, r.sample_index
            )));
        }
        let Some(c) = critique.get(&key) else {
            counts.reject("no_critique");
            continue;
        };
        grouped.entry((r.code_language, r.question_id.as_str())).or_default().push(Sample {
            sample_index: r.sample_index,
            is_correct: r.is_correct(),
            judgment: Some(c.judgment),
            critique_trace_length: Some(c.trace_length),
        });
    }

    let mut pools: BTreeMap<CodeLanguage, Vec<SamplePool>> = BTreeMap::new();
    let mut excluded = Vec::new();
    for ((lang, qid), mut samples) in grouped {
        samples.sort_by_key(|s| s.sample_index);
        if samples.len() < k {
            for _ in &samples {
                counts.reject("pool_below_k");
            }
            excluded.push(ExcludedPool { question_id: qid.to_string(), code_language: lang, n_samples: samples.len() });
            continue;
        }
        counts.accepted += samples.len();
        pools.entry(lang).or_default().push(SamplePool {
            question_id: qid.to_string(),
            difficulty: difficulty.get(qid).copied().ok_or_else(|| unknown_question(qid))?,
            samples,
        });
    }
    Ok((pools, excluded))
}

/// Joins solutions with their critiques and execution results, one triple
/// per accepted solution, sorted by `(question_id, sample_index)`.
pub fn emit_dataset(
    questions: &[Question],
    solutions: &[SolutionRecord],
    critiques: &[CritiqueRecord],
    results: &[ExecutionResult],
) -> Result<Vec<DatasetTriple>> {
    unique_keys(solutions.iter().map(|s| (s.question_id.as_str(), s.sample_index)), "solution")?;
    unique_keys(critiques.iter().map(|c| (c.question_id.as_str(), c.sample_index)), "critique")?;
    unique_keys(results.iter().map(|r| (r.question_id.as_str(), r.sample_index)), "execution result")?;
    let source: HashMap<&str, _> = questions.iter().map(|q| (q.id.as_str(), q.source)).collect();
    let critique: HashMap<(&str, u32), &CritiqueRecord> =
        critiques.iter().map(|c| ((c.question_id.as_str(), c.sample_index), c)).collect();
    let result: HashMap<(&str, u32), &ExecutionResult> =
        results.iter().map(|r| ((r.question_id.as_str(), r.sample_index), r)).collect();

    let mut triples = solutions
        .iter()
        .map(|s| {
            let key = (s.question_id.as_str(), s.sample_index);
            let c = critique.get(&key);
            Ok(DatasetTriple {
                question_id: s.question_id.clone(),
                sample_index: s.sample_index,
                source: *source.get(key.0).ok_or_else(|| unknown_question(key.0))?,
                code_language: s.code_language,
                solution_reasoning: s.reasoning_trace.clone(),
                solution_source: s.solution_source.clone(),
                critique_reasoning: c.map(|c| c.critique_trace.clone()),
                judgment: c.map(|c| c.judgment),
                pass_rate: result.get(&key).map(|r| r.pass_rate),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    triples.sort_by(|a, b| (&a.question_id, a.sample_index).cmp(&(&b.question_id, b.sample_index)));
    Ok(triples)
}
