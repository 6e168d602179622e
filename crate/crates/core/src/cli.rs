//! Command-line front end. Every number printed or written here comes
//! straight from the library calls; this layer only parses, dispatches and
//! writes files.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::align::align_tokens;
use crate::analysis::{
    evaluation_of, evaluate_strata_with, parse_grid, remove_stratum, score_corpus, sweep_threshold_with, Dimension,
    EvalOptions, Evaluation, Objective, StratifiedReport, SystemSpec, ThresholdSweepResult,
};
use crate::classify::write_label_csv;
use crate::corpus::{filter_recordings, load_corpus, tokenize, Corpus, ExerciseKind, FunctionLexicon, RecordingStatus, TaskType};
use crate::error::{Error, Result};
use crate::metrics::{fmt_coef, fmt_pct, wer_counts, wer_interval};
use crate::protocol::{
    run_accuracy_item, run_fluency_session, write_events, AlwaysAccept, AlwaysReject, Judge, MiscueReader, PerfectJudge,
    RateJudge, SessionEvent, ThresholdJudge,
};
use crate::report::{
    evaluations_csv, evaluations_svg, strata_csv, strata_svg, strata_wide_csv, sweep_csv, sweep_svg, SavedReport,
};
use crate::synth::{generate_corpus, GeneratorConfig};

#[derive(Debug, Parser)]
#[command(name = "readscore", version, about = "Word-level evaluation of ASR-based reading tutors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pooled agreement and diagnostic metrics for one system.
    Evaluate(EvaluateArgs),
    /// Kappa (or MCC) over a grid of confidence thresholds.
    Sweep(SweepArgs),
    /// Metrics per reading task or per word category.
    Strata(StrataArgs),
    /// Simulate tutor sessions over a corpus.
    Simulate(SimulateArgs),
    /// Render saved JSON reports as CSV/SVG.
    Report(ReportArgs),
    /// Write a seeded synthetic corpus with ground truth.
    Generate(GenerateArgs),
    /// Print the alignment of a reading against a prompt.
    Align(AlignArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Recording statuses that take part, comma separated.
    #[arg(long, default_value = "ok")]
    pub keep_status: String,
    /// Leave out recordings of this task.
    #[arg(long)]
    pub drop_task: Option<String>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma separated subset of json,csv,svg.
    #[arg(long, default_value = "json,csv")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Hypothesis name, or `threshold:T` over confidences.
    #[arg(long)]
    pub system: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, default_value = "0:100:1")]
    pub grid: String,
    /// kappa or mcc.
    #[arg(long, default_value = "kappa")]
    pub objective: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct StrataArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub system: String,
    /// task or category.
    #[arg(long)]
    pub by: String,
    #[arg(long)]
    pub function_lexicon: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Corpus whose prompts are practised; a default synthetic corpus when absent.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// accept, reject, perfect, threshold:T or rates:P_CORRECT:P_MISCUE.
    #[arg(long, default_value = "perfect")]
    pub judge: String,
    /// Chance that the simulated pupil misreads a word.
    #[arg(long, default_value_t = 0.15)]
    pub miscue_prob: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Saved JSON reports.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "csv")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// JSON generator configuration; defaults apply to missing fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[arg(long)]
    pub prompt: String,
    #[arg(long)]
    pub observed: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Formats {
    json: bool,
    csv: bool,
    svg: bool,
}

fn parse_formats(spec: &str) -> Result<Formats> {
    let mut f = Formats::default();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match part {
            "json" => f.json = true,
            "csv" => f.csv = true,
            "svg" => f.svg = true,
            other => return Err(Error::InvalidArgument(format!("unknown output format `{other}`"))),
        }
    }
    Ok(f)
}

fn parse_statuses(spec: &str) -> Result<BTreeSet<RecordingStatus>> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

/// Loads the corpus and applies status filtering and task removal.
fn prepare(args: &CorpusArgs) -> Result<(Corpus, EvalOptions)> {
    let statuses = parse_statuses(&args.keep_status)?;
    let drop = args.drop_task.as_deref().map(str::parse::<TaskType>).transpose()?;
    let mut corpus = filter_recordings(&load_corpus(&args.corpus)?, &statuses);
    if let Some(task) = drop {
        corpus = remove_stratum(&corpus, task);
    }
    Ok((corpus, EvalOptions { statuses }))
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

/// Runs a parsed command, returning what it prints to stdout.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Strata(a) => cmd_strata(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Report(a) => cmd_report(&a),
        Command::Generate(a) => cmd_generate(&a),
        Command::Align(a) => cmd_align(&a),
    }
}

fn summary_table(evals: &[Evaluation]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<16} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>7}",
        "system", "kappa", "mcc", "CA%", "CR%", "FA%", "FR%", "P(CA)", "P(CR)", "R(CA)", "R(CR)", "F(CA)", "F(CR)", "words"
    );
    for e in evals {
        let m = &e.metrics;
        let _ = writeln!(
            s,
            "{:<16} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>7}",
            e.system,
            fmt_coef(m.kappa),
            fmt_coef(m.mcc),
            fmt_pct(Some(m.rates.car)),
            fmt_pct(Some(m.rates.crr)),
            fmt_pct(Some(m.rates.far)),
            fmt_pct(Some(m.rates.frr)),
            fmt_pct(m.ca.precision),
            fmt_pct(m.cr.precision),
            fmt_pct(m.ca.recall),
            fmt_pct(m.cr.recall),
            fmt_pct(m.ca.f1),
            fmt_pct(m.cr.f1),
            m.words
        );
        let _ = writeln!(s, "recordings used {}, skipped {}", e.recordings_used, e.recordings_skipped);
    }
    s
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<String> {
    let formats = parse_formats(&a.output.format)?;
    let system: SystemSpec = a.system.parse()?;
    let (corpus, opts) = prepare(&a.corpus)?;
    let scored = score_corpus(&corpus, &system, &opts)?;
    let eval = evaluation_of(&scored)?;
    if let Some(dir) = &a.output.out {
        if formats.json {
            write_out(dir, "evaluate.json", &SavedReport::Evaluate(eval.clone()).to_json()?)?;
        }
        if formats.csv {
            write_out(dir, "evaluate.csv", &evaluations_csv(std::slice::from_ref(&eval))?)?;
            let mut buf = Vec::new();
            write_label_csv(&scored.label_rows(), &mut buf)?;
            write_out(dir, "labels.csv", &String::from_utf8_lossy(&buf))?;
        }
        if formats.svg {
            write_out(dir, "evaluate.svg", &evaluations_svg(std::slice::from_ref(&eval)))?;
        }
    }
    Ok(summary_table(&[eval]))
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<String> {
    let formats = parse_formats(&a.output.format)?;
    let grid = parse_grid(&a.grid)?;
    let objective: Objective = a.objective.parse()?;
    let (corpus, opts) = prepare(&a.corpus)?;
    let sweep = sweep_threshold_with(&corpus, &grid, objective, &opts)?;
    if let Some(dir) = &a.output.out {
        if formats.json {
            write_out(dir, "sweep.json", &SavedReport::Sweep(sweep.clone()).to_json()?)?;
        }
        if formats.csv {
            write_out(dir, "sweep.csv", &sweep_csv(&sweep)?)?;
        }
        if formats.svg {
            write_out(dir, "sweep.svg", &sweep_svg(&sweep))?;
        }
    }
    Ok(sweep_summary(&sweep))
}

fn sweep_summary(s: &ThresholdSweepResult) -> String {
    format!(
        "grid points {}, recordings used {}, skipped {}\nbest threshold {} (kappa {}, mcc {})\n",
        s.points.len(),
        s.recordings_used,
        s.recordings_skipped,
        s.best_threshold,
        fmt_coef(s.best_kappa),
        fmt_coef(s.best_mcc)
    )
}

pub fn cmd_strata(a: &StrataArgs) -> Result<String> {
    let formats = parse_formats(&a.output.format)?;
    let system: SystemSpec = a.system.parse()?;
    let dimension: Dimension = a.by.parse()?;
    let lexicon = a.function_lexicon.as_deref().map(FunctionLexicon::load).transpose()?;
    let (corpus, opts) = prepare(&a.corpus)?;
    let report = evaluate_strata_with(&corpus, &system, dimension, lexicon.as_ref(), &opts)?;
    if let Some(dir) = &a.output.out {
        if formats.json {
            write_out(dir, "strata.json", &SavedReport::Strata(report.clone()).to_json()?)?;
        }
        if formats.csv {
            write_out(dir, "strata.csv", &strata_csv(&report)?)?;
        }
        if formats.svg {
            write_out(dir, "strata.svg", &strata_svg(&report))?;
        }
    }
    Ok(strata_summary(&report))
}

fn strata_summary(r: &StratifiedReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<14} {:>7} {:>6} {:>6}", "stratum", "words", "kappa", "mcc");
    for row in &r.strata {
        let m = row.metrics.as_ref();
        let _ = writeln!(
            s,
            "{:<14} {:>7} {:>6} {:>6}",
            row.key.value(),
            row.words,
            fmt_coef(m.and_then(|m| m.kappa)),
            fmt_coef(m.and_then(|m| m.mcc))
        );
    }
    let _ = writeln!(
        s,
        "{:<14} {:>7} {:>6} {:>6}",
        "all",
        r.overall.words,
        fmt_coef(r.overall.kappa),
        fmt_coef(r.overall.mcc)
    );
    s
}

fn parse_judge(spec: &str, seed: u64) -> Result<Box<dyn Judge>> {
    let bad = || Error::InvalidArgument(format!("unknown judge `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    Ok(match parts.as_slice() {
        ["accept"] => Box::new(AlwaysAccept),
        ["reject"] => Box::new(AlwaysReject),
        ["perfect"] => Box::new(PerfectJudge),
        ["threshold", t] => Box::new(ThresholdJudge(t.parse().map_err(|_| bad())?)),
        ["rates", pc, pm] => Box::new(RateJudge::new(
            pc.parse().map_err(|_| bad())?,
            pm.parse().map_err(|_| bad())?,
            seed,
        )?),
        _ => return Err(bad()),
    })
}

#[derive(Debug, Serialize)]
struct SimulationSummary {
    judge: String,
    seed: u64,
    miscue_prob: f64,
    accuracy_items: usize,
    accuracy_accepted: usize,
    accuracy_attempts: usize,
    fluency_sessions: usize,
    fluency_words: usize,
    fluency_retries: usize,
    fluency_sessions_with_retries: usize,
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<String> {
    let corpus = match &a.corpus {
        Some(path) => load_corpus(path)?,
        None => {
            generate_corpus(&GeneratorConfig {
                seed: a.seed,
                ..GeneratorConfig::default()
            })?
            .corpus
        }
    };
    let mut judge = parse_judge(&a.judge, a.seed)?;
    let model = GeneratorConfig::default().confidence;
    let mut reader = MiscueReader::new(a.miscue_prob, model, a.seed.wrapping_add(1))?;

    let mut events: Vec<SessionEvent> = Vec::new();
    let mut summary = SimulationSummary {
        judge: a.judge.clone(),
        seed: a.seed,
        miscue_prob: a.miscue_prob,
        accuracy_items: 0,
        accuracy_accepted: 0,
        accuracy_attempts: 0,
        fluency_sessions: 0,
        fluency_words: 0,
        fluency_retries: 0,
        fluency_sessions_with_retries: 0,
    };
    for (n, prompt) in corpus.prompts().iter().enumerate() {
        let session = format!("session{n:05}");
        match prompt.exercise {
            ExerciseKind::Accuracy => {
                let o = run_accuracy_item(prompt, judge.as_mut(), &mut reader)?;
                summary.accuracy_items += 1;
                summary.accuracy_attempts += o.attempts_used;
                summary.accuracy_accepted += usize::from(o.final_accepted);
                events.extend(o.events(&session));
            }
            ExerciseKind::Fluency => {
                let log = run_fluency_session(prompt, judge.as_mut(), &mut reader)?;
                summary.fluency_sessions += 1;
                summary.fluency_words += log.round1.len();
                summary.fluency_retries += log.retry_set.len();
                summary.fluency_sessions_with_retries += usize::from(!log.retry_set.is_empty());
                events.extend(log.events(&session));
            }
        }
    }
    if let Some(dir) = &a.output.out {
        let mut buf = Vec::new();
        write_events(&events, &mut buf)?;
        write_out(dir, "sessions.jsonl", &String::from_utf8_lossy(&buf))?;
        let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Serialize(e.to_string()))?;
        write_out(dir, "simulate.json", &(json + "\n"))?;
    }
    Ok(format!(
        "accuracy items {} (accepted {}, attempts {})\nfluency sessions {} (words {}, retries {}, sessions with retries {})\n",
        summary.accuracy_items,
        summary.accuracy_accepted,
        summary.accuracy_attempts,
        summary.fluency_sessions,
        summary.fluency_words,
        summary.fluency_retries,
        summary.fluency_sessions_with_retries
    ))
}

pub fn cmd_report(a: &ReportArgs) -> Result<String> {
    let formats = parse_formats(&a.format)?;
    let mut evals = Vec::new();
    let mut strata = Vec::new();
    let mut sweeps = Vec::new();
    for path in &a.inputs {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        match SavedReport::from_json(&text).map_err(|e| Error::Parse {
            path: path.clone(),
            message: e.to_string(),
        })? {
            SavedReport::Evaluate(e) => evals.push(e),
            SavedReport::Strata(s) => strata.push(s),
            SavedReport::Sweep(s) => sweeps.push(s),
        }
    }
    let mut written = Vec::new();
    let mut emit = |name: String, contents: String| -> Result<()> {
        write_out(&a.out, &name, &contents)?;
        written.push(name);
        Ok(())
    };
    if !evals.is_empty() {
        if formats.csv {
            emit("report.csv".into(), evaluations_csv(&evals)?)?;
        }
        if formats.svg {
            emit("report.svg".into(), evaluations_svg(&evals))?;
        }
    }
    for dim in [Dimension::Task, Dimension::WordCategory] {
        let group: Vec<StratifiedReport> = strata.iter().filter(|s| s.dimension == dim).cloned().collect();
        if group.is_empty() {
            continue;
        }
        let name = match dim {
            Dimension::Task => "strata_task",
            Dimension::WordCategory => "strata_category",
        };
        if formats.csv {
            emit(format!("{name}.csv"), strata_wide_csv(&group)?)?;
        }
        if formats.svg {
            for (i, s) in group.iter().enumerate() {
                emit(format!("{name}_{i}.svg"), strata_svg(s))?;
            }
        }
    }
    for (i, s) in sweeps.iter().enumerate() {
        if formats.csv {
            emit(format!("sweep_{i}.csv"), sweep_csv(s)?)?;
        }
        if formats.svg {
            emit(format!("sweep_{i}.svg"), sweep_svg(s))?;
        }
    }
    Ok(written.iter().map(|w| format!("wrote {w}\n")).collect())
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<String> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str::<GeneratorConfig>(&text).map_err(|e| Error::Parse {
                path: path.clone(),
                message: e.to_string(),
            })?
        }
        None => GeneratorConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let synthetic = generate_corpus(&cfg)?;
    write_out(&a.out, "corpus.json", &(synthetic.corpus.to_json()? + "\n"))?;
    let mut buf = Vec::new();
    synthetic.write_truth_csv(&mut buf)?;
    write_out(&a.out, "truth.csv", &String::from_utf8_lossy(&buf))?;
    let lexicon: String = synthetic.lexicon.iter().map(|w| format!("{w}\n")).collect();
    write_out(&a.out, "function_words.txt", &lexicon)?;
    Ok(format!(
        "prompts {}, recordings {}, words {}\n",
        synthetic.corpus.prompts().len(),
        synthetic.corpus.recordings().len(),
        synthetic.corpus.word_count()
    ))
}

pub fn cmd_align(a: &AlignArgs) -> Result<String> {
    let prompt = tokenize(&a.prompt);
    if prompt.is_empty() {
        return Err(Error::InvalidArgument("prompt has no words".into()));
    }
    let observed = tokenize(&a.observed);
    let alignment = align_tokens(&observed, &prompt);
    let counts = wer_counts(&prompt, &observed)?;
    let (lo, hi) = wer_interval(counts.rate(), prompt.len() as u64, 0.95)?;
    Ok(format!(
        "{}\ncost {} (S {}, D {}, I {}), WER {:.2}% [95% CI {:.2}, {:.2}]\n",
        alignment.diagram(&prompt, &observed),
        alignment.cost,
        counts.substitutions,
        counts.deletions,
        counts.insertions,
        counts.rate() * 100.0,
        lo * 100.0,
        hi * 100.0
    ))
}
