use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use reasonforge::bench::{build_harness, filter_by_date, load_benchmark};
use reasonforge::corpus::{decontaminate, dedup, BenchmarkItem, DecontamOptions, FuzzyJudge, HashingEmbedder};
use reasonforge::exec::{default_workers, evaluate_batch, select_tests, EvalJob, SandboxPolicy, Toolchain};
use reasonforge::llm::{
    CompletionProvider, HttpProvider, MockProvider, MockScript, ProviderProfile, RetryPolicy, SamplingParams,
};
use reasonforge::metrics::{build_report, curves_csv, gap_curves, SamplePool};
use reasonforge::pipeline::{
    generate_critiques, generate_solutions, postprocess_critiques, postprocess_solutions, read_questions, Pipeline,
    PipelineConfig, RawRecord, RunManifest, SolutionJob, SolutionRecord, Step,
};
use reasonforge::postproc::ParsedSolution;
use reasonforge::{jsonl, Error, Result};

use crate::{
    BenchCommand, BenchValidateFlags, Command, CorpusCommand, CritiqueFlags, CurvesFlags, DecontamFlags, DedupFlags,
    ExecCommand, ExecFlags, GenerateFlags, HarnessFlags, MetricsCommand, PostprocessFlags, PostprocessKind,
    ProviderFlags, ReportFlags, StageArgs,
};

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Pipeline { config, fresh } => {
            let manifests = pipeline(&config)?.run(fresh)?;
            for m in &manifests {
                print_manifest(m);
            }
            Ok(())
        }
        Command::Dedup(a) => staged(a, |_| Step::Dedup, run_dedup),
        Command::Decontaminate(a) => staged(a, |_| Step::Decontaminate, run_decontaminate),
        Command::Generate(a) => staged(a, |_| Step::Generate, run_generate),
        Command::Postprocess(a) => staged(
            a,
            |f| match f.kind {
                PostprocessKind::Solutions => Step::PostprocessSolutions,
                PostprocessKind::Critiques => Step::PostprocessCritiques,
            },
            run_postprocess,
        ),
        Command::Critique(a) => staged(a, |_| Step::Critique, run_critique),
        Command::Execute(a) => staged(a, |_| Step::Execute, run_exec),
        Command::Evaluate(a) => staged(a, |_| Step::Evaluate, run_report),
        Command::Dataset { config, out } => {
            let p = pipeline(&config)?;
            let out = out.unwrap_or_else(|| p.dataset_path());
            let n = p.write_dataset(&out)?;
            println!("wrote {n} triples to {}", out.display());
            Ok(())
        }
        Command::Corpus(CorpusCommand::Dedup(f)) => run_dedup(f),
        Command::Corpus(CorpusCommand::Decontaminate(f)) => run_decontaminate(f),
        Command::Exec(ExecCommand::Run(f)) => run_exec(f),
        Command::Metrics(MetricsCommand::Report(f)) => run_report(f),
        Command::Metrics(MetricsCommand::Curves(f)) => run_curves(f),
        Command::Bench(BenchCommand::Validate(f)) => run_bench_validate(f),
        Command::Bench(BenchCommand::Harness(f)) => run_harness(f),
    }
}

fn pipeline(config: &Path) -> Result<Pipeline> {
    Pipeline::new(PipelineConfig::load(config)?)
}

/// With `--config` the step runs inside the configured pipeline; otherwise
/// the explicit flags are used.
fn staged<T: clap::Args>(
    args: StageArgs<T>,
    step: impl Fn(&T) -> Step,
    explicit: impl Fn(T) -> Result<()>,
) -> Result<()> {
    match args.config {
        Some(config) => {
            let m = pipeline(&config)?.run_step(step(&args.flags))?;
            print_manifest(&m);
            Ok(())
        }
        None => explicit(args.flags),
    }
}

fn print_manifest(m: &RunManifest) {
    let rejected: Vec<String> = m.counts.rejected.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!(
        "{:<22} {:?} input={} accepted={} rejected=[{}] resumed={}",
        m.step.label(),
        m.status,
        m.counts.input,
        m.counts.accepted,
        rejected.join(" "),
        m.resumed
    );
}

fn required(value: Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    value.ok_or_else(|| Error::Validation(format!("--{flag} is required without --config")))
}

fn run_dedup(f: DedupFlags) -> Result<()> {
    let input = required(f.input, "in")?;
    let out = required(f.out, "out")?;
    let questions = read_questions(&input)?;
    let result = dedup(&questions, f.threshold)?;
    jsonl::write(&out, &result.retained)?;
    if let Some(path) = f.clusters {
        jsonl::write(&path, &result.clusters)?;
    }
    println!("kept {} of {} questions, {} clusters", result.retained.len(), questions.len(), result.clusters.len());
    Ok(())
}

fn run_decontaminate(f: DecontamFlags) -> Result<()> {
    let input = required(f.input, "in")?;
    let bench = required(f.bench, "bench")?;
    let out = required(f.out, "out")?;
    let questions = read_questions(&input)?;
    let items: Vec<BenchmarkItem> = jsonl::read(&bench)?;
    let options = DecontamOptions { screen_threshold: f.screen, ..DecontamOptions::default() };
    let (kept, verdicts) =
        decontaminate(&questions, &items, &HashingEmbedder::default(), &FuzzyJudge::default(), &options)
            .map_err(|failure| failure.error)?;
    jsonl::write(&out, &kept)?;
    if let Some(path) = f.verdicts {
        jsonl::write(&path, &verdicts)?;
    }
    let screened = verdicts.iter().filter(|v| v.matched_benchmark_item.is_some() && v.cosine_score >= f.screen).count();
    println!(
        "kept {} of {} questions ({} screened, {} removed)",
        kept.len(),
        questions.len(),
        screened,
        questions.len() - kept.len()
    );
    Ok(())
}

fn provider(flags: &ProviderFlags) -> Result<Arc<dyn CompletionProvider>> {
    if let Some(profile) = &flags.profile {
        return Ok(Arc::new(HttpProvider::new(ProviderProfile::load(profile)?)?));
    }
    let script = match &flags.mock_script {
        Some(path) => MockScript::load(path)?,
        None => MockScript::new(),
    };
    Ok(Arc::new(MockProvider::new(script)))
}

fn write_raw(out: &Path, records: Vec<RawRecord>, error: Option<Error>) -> Result<()> {
    jsonl::write(out, &records)?;
    println!("wrote {} raw records to {}", records.len(), out.display());
    error.map_or(Ok(()), Err)
}

fn run_generate(f: GenerateFlags) -> Result<()> {
    let input = required(f.questions, "questions")?;
    let out = required(f.out, "out")?;
    if f.languages.is_empty() {
        return Err(Error::Validation("--lang needs at least one language".into()));
    }
    let questions = read_questions(&input)?;
    let params = SamplingParams::solution().with_samples(f.n_samples).with_seed(f.provider.seed);
    let mut jobs = Vec::new();
    for q in &questions {
        for (pos, &language) in f.languages.iter().enumerate() {
            jobs.push(SolutionJob { question: q, language, first_index: pos as u32 * f.n_samples });
        }
    }
    let provider = provider(&f.provider)?;
    let outcome =
        generate_solutions(&jobs, &params, provider.as_ref(), &RetryPolicy::default(), f.provider.in_flight, &|_| {
            Ok(())
        })?;
    write_raw(&out, outcome.records, outcome.error)
}

fn run_critique(f: CritiqueFlags) -> Result<()> {
    let questions = read_questions(&required(f.questions, "questions")?)?;
    let solutions: Vec<SolutionRecord> = jsonl::read(&required(f.solutions, "solutions")?)?;
    let out = required(f.out, "out")?;
    let by_id: BTreeMap<&str, _> = questions.iter().map(|q| (q.id.as_str(), q)).collect();
    let jobs = solutions
        .iter()
        .map(|s| {
            by_id
                .get(s.question_id.as_str())
                .map(|q| (*q, s))
                .ok_or_else(|| Error::Validation(format!("solution for unknown question {}", s.question_id)))
        })
        .collect::<Result<Vec<_>>>()?;
    let params = SamplingParams::critique().with_seed(f.provider.seed);
    let provider = provider(&f.provider)?;
    let outcome =
        generate_critiques(&jobs, &params, provider.as_ref(), &RetryPolicy::default(), f.provider.in_flight, &|_| {
            Ok(())
        })?;
    write_raw(&out, outcome.records, outcome.error)
}

fn run_postprocess(f: PostprocessFlags) -> Result<()> {
    let raw: Vec<RawRecord> = jsonl::read(&required(f.input, "in")?)?;
    let out = required(f.out, "out")?;
    let (accepted, rejected) = match f.kind {
        PostprocessKind::Solutions => {
            let (a, r) = postprocess_solutions(&raw)?;
            jsonl::write(&out, &a)?;
            (a.len(), r)
        }
        PostprocessKind::Critiques => {
            let (a, r) = postprocess_critiques(&raw)?;
            jsonl::write(&out, &a)?;
            (a.len(), r)
        }
    };
    if let Some(path) = f.rejections {
        jsonl::write(&path, &rejected)?;
    }
    let mut reasons: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &rejected {
        *reasons.entry(r.reason.as_str()).or_default() += 1;
    }
    let reasons: Vec<String> = reasons.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("accepted {accepted} of {}, rejected [{}]", raw.len(), reasons.join(" "));
    Ok(())
}

fn run_exec(f: ExecFlags) -> Result<()> {
    let questions = read_questions(&required(f.questions, "questions")?)?;
    let solutions: Vec<SolutionRecord> = jsonl::read(&required(f.solutions, "solutions")?)?;
    let out = required(f.out, "out")?;
    let policy = SandboxPolicy { per_test_timeout: f.timeout, ..SandboxPolicy::default() };
    policy.validate()?;
    let by_id: BTreeMap<&str, _> = questions.iter().map(|q| (q.id.as_str(), q)).collect();
    let mut parsed = Vec::new();
    let mut skipped = 0usize;
    for s in &solutions {
        let q = by_id
            .get(s.question_id.as_str())
            .ok_or_else(|| Error::Validation(format!("solution for unknown question {}", s.question_id)))?;
        match select_tests(q, f.seed) {
            Ok(_) => parsed.push((
                *q,
                ParsedSolution::from_source(s.code_language, s.solution_source.clone()),
                s.sample_index,
            )),
            Err(Error::NotEnoughTests { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let jobs: Vec<EvalJob> = parsed
        .iter()
        .map(|(q, solution, sample_index)| EvalJob { question: q, solution, sample_index: *sample_index })
        .collect();
    let workers = if f.jobs == 0 { default_workers() } else { f.jobs };
    let results = evaluate_batch(&jobs, &policy, &Toolchain::default(), f.seed, workers)?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    jsonl::write(&out, &results)?;
    let correct = results.iter().filter(|r| r.is_correct()).count();
    println!("executed {} solutions, {} fully correct, {} skipped for too few tests", results.len(), correct, skipped);
    Ok(())
}

fn run_report(f: ReportFlags) -> Result<()> {
    let pools: Vec<SamplePool> = jsonl::read(&required(f.pools, "pools")?)?;
    let report = build_report(&pools, f.k, f.strategy.into(), f.resamples, f.seed)?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match f.out {
        Some(out) => {
            std::fs::write(&out, text).map_err(|e| Error::io(&out, e))?;
            let o = &report.overall;
            println!(
                "k={} pass@1={:.4} pass@k={:.4} pass@1|select@k={:.4} critique_accuracy={:.4}",
                report.k, o.pass_at_1, o.pass_at_k, o.pass1_select_at_k, o.critique_accuracy_all_k
            );
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run_curves(f: CurvesFlags) -> Result<()> {
    let pools: Vec<SamplePool> = jsonl::read(&f.pools)?;
    let rows = gap_curves(&pools, f.k_max, f.strategy.into(), f.resamples, f.seed)?;
    std::fs::write(&f.out, curves_csv(&rows)).map_err(|e| Error::io(&f.out, e))?;
    println!("wrote {} rows to {}", rows.len(), f.out.display());
    Ok(())
}

fn run_bench_validate(f: BenchValidateFlags) -> Result<()> {
    let report = load_benchmark(&f.input, f.lenient)?;
    let records = match (f.from, f.to) {
        (Some(from), Some(to)) => filter_by_date(&report.records, from, to),
        _ => report.records.clone(),
    };
    let mut venues: BTreeMap<String, usize> = BTreeMap::new();
    let mut difficulties: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &records {
        *venues.entry(format!("{:?}", r.venue).to_lowercase()).or_default() += 1;
        *difficulties.entry(r.difficulty.as_str()).or_default() += 1;
    }
    println!("records {}", records.len());
    for (k, v) in venues.iter() {
        println!("venue {k} {v}");
    }
    for (k, v) in difficulties.iter() {
        println!("difficulty {k} {v}");
    }
    println!("skipped {}", report.skipped.len());
    for (line, message) in &report.skipped {
        println!("  line {line}: {message}");
    }
    Ok(())
}

fn run_harness(f: HarnessFlags) -> Result<()> {
    let report = load_benchmark(&f.bench, false)?;
    let record = report
        .records
        .iter()
        .find(|r| r.problem_id == f.record)
        .ok_or_else(|| Error::Validation(format!("no record {} in {}", f.record, f.bench.display())))?;
    let solution = std::fs::read_to_string(&f.solution).map_err(|e| Error::io(&f.solution, e))?;
    let harness = build_harness(record, &solution, f.lang)?;
    if let Some(reason) = harness.invalid_reason {
        return Err(Error::Validation(format!("cannot drive the solution: {reason}")));
    }
    std::fs::write(&f.out, &harness.source).map_err(|e| Error::io(&f.out, e))?;
    println!("wrote {} harness to {}", f.lang, f.out.display());
    Ok(())
}
