//! Command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use varlab_core::avagrpo::{train_with, StepRecord};
use varlab_core::corpus::{generate_corpus, uniform_sample, weak_view, SyntheticVideo, WeakExample};
use varlab_core::cot::parse_report;
use varlab_core::eval::{evaluate, reference_text, JudgeReference, MetricsReport, OutputRecord};
use varlab_core::policy::{decode_greedy, sample, sft_fit, Observation, PolicyConfig, PolicyParams};
use varlab_core::rng::{self, site};

use crate::config::RunConfig;
use crate::corpus::{label_split, max_token, read_corpus, read_weak_corpus, write_corpus, write_weak_corpus};
use crate::error::{read_text, write_text};
use crate::judge::{JudgeClient, JudgeItem};
use crate::log::{LogHeader, LogWriter};
use crate::outputs::{read_outputs, write_outputs};
use crate::run::RunDir;
use crate::{checkpoint, jsonl, Error, Result};

#[derive(Debug, Parser)]
#[command(name = "varlab", version, about = "Desk-scale video anomaly reasoning lab")]
pub struct Cli {
    /// TOML settings file; missing keys take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the seed in the settings file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Run directory (default: runs/<command>).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus.
    GenCorpus(GenCorpusArgs),
    /// Supervised pre-fit on an annotated corpus.
    Sft(SftArgs),
    /// Reinforcement learning on weak labels.
    Train(TrainArgs),
    /// Decode a corpus with a checkpoint and score the outputs.
    Eval(EvalArgs),
    /// Check completions against the output grammar.
    Parse(ParseArgs),
    /// Grade outputs with an external judge model.
    Judge(JudgeArgs),
}

#[derive(Debug, Args)]
pub struct GenCorpusArgs {
    #[arg(long)]
    pub n_videos: Option<usize>,
    /// Drop category and interval annotations.
    #[arg(long)]
    pub weak: bool,
}

#[derive(Debug, Args)]
pub struct SftArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Leave the segment head unsupervised.
    #[arg(long)]
    pub no_segment: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ablation {
    NoAno,
    NoLen,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Starting checkpoint; training starts from zeros when absent.
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub reward_ablation: Vec<Ablation>,
    #[arg(long)]
    pub ckpt_every: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Annotated test corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Sample instead of greedy decoding.
    #[arg(long)]
    pub stochastic: bool,
    /// Score an existing outputs file instead of decoding.
    #[arg(long, conflicts_with_all = ["checkpoint", "oracle"])]
    pub outputs: Option<PathBuf>,
    /// Score the reference renderings themselves.
    #[arg(long, conflicts_with = "checkpoint")]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// Completions separated by blank lines, or a `.jsonl` outputs file.
    pub file: PathBuf,
}

#[derive(Debug, Args)]
pub struct JudgeArgs {
    #[arg(long)]
    pub outputs: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub base_url: Option<String>,
    #[arg(long)]
    pub concurrency: Option<usize>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::GenCorpus(_) => "gen-corpus",
            Command::Sft(_) => "sft",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::Parse(_) => "parse",
            Command::Judge(_) => "judge",
        }
    }

    /// Commands that never draw random numbers run without a seed.
    fn needs_seed(&self) -> bool {
        !matches!(self, Command::Parse(_) | Command::Judge(_))
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let name = cli.command.name();
    let seed = if cli.command.needs_seed() {
        cli.seed
    } else {
        cli.seed.or(config.seed).or(Some(0))
    };
    apply_overrides(&mut config, &cli.command);
    let config = config.resolve(seed)?;
    let out = cli.out.clone().unwrap_or_else(|| Path::new("runs").join(name));
    let invocation = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    let mut run = RunDir::create(&out, &config, if invocation.is_empty() { name } else { &invocation })?;
    match &cli.command {
        Command::GenCorpus(a) => gen_corpus(&mut run, &config, a),
        Command::Sft(_) => sft(&mut run, &config),
        Command::Train(a) => train(&mut run, &config, a),
        Command::Eval(a) => eval(&mut run, &config, a),
        Command::Parse(a) => parse(&mut run, a),
        Command::Judge(a) => judge(&mut run, &config, a),
    }
}

/// Folds command-line flags into the settings so the snapshot shows what
/// actually ran.
fn apply_overrides(c: &mut RunConfig, command: &Command) {
    match command {
        Command::GenCorpus(a) => {
            if let Some(n) = a.n_videos {
                c.corpus.n_videos = n;
            }
        }
        Command::Sft(a) => {
            set(&mut c.paths.corpus, &a.corpus);
            c.sft.steps = a.steps.unwrap_or(c.sft.steps);
            c.sft.lr = a.lr.unwrap_or(c.sft.lr);
            if a.no_segment {
                c.sft.supervise_segment = false;
            }
        }
        Command::Train(a) => {
            set(&mut c.paths.corpus, &a.corpus);
            set(&mut c.paths.init, &a.init);
            for ab in &a.reward_ablation {
                match ab {
                    Ablation::NoAno => c.train.rewards.verification = false,
                    Ablation::NoLen => c.train.rewards.length = false,
                }
            }
            c.ckpt_every = a.ckpt_every.unwrap_or(c.ckpt_every);
            if a.max_steps.is_some() {
                c.train.max_steps = a.max_steps;
            }
            c.train.epochs = a.epochs.unwrap_or(c.train.epochs);
            c.train.lr = a.lr.unwrap_or(c.train.lr);
        }
        Command::Eval(a) => {
            set(&mut c.paths.checkpoint, &a.checkpoint);
            set(&mut c.paths.corpus, &a.corpus);
            set(&mut c.paths.outputs, &a.outputs);
            if a.stochastic {
                c.eval.stochastic = true;
            }
        }
        Command::Parse(_) => {}
        Command::Judge(a) => {
            set(&mut c.paths.outputs, &a.outputs);
            set(&mut c.paths.corpus, &a.corpus);
            if let Some(u) = &a.base_url {
                c.judge.base_url = u.clone();
            }
            c.judge.concurrency = a.concurrency.unwrap_or(c.judge.concurrency);
        }
    }
}

fn set(slot: &mut Option<PathBuf>, flag: &Option<PathBuf>) {
    if flag.is_some() {
        *slot = flag.clone();
    }
}

fn required<'a>(path: &'a Option<PathBuf>, field: &str) -> Result<&'a Path> {
    let p = path
        .as_deref()
        .ok_or_else(|| Error::config(format!("paths.{field}"), "is required for this command"))?;
    if !p.exists() {
        return Err(Error::config(format!("paths.{field}"), format!("{} does not exist", p.display())));
    }
    Ok(p)
}

fn gen_corpus(run: &mut RunDir, config: &RunConfig, a: &GenCorpusArgs) -> Result<ExitCode> {
    let videos = generate_corpus(&config.corpus)?;
    let path = run.path("corpus.jsonl");
    if a.weak {
        let weak: Vec<WeakExample> = videos.iter().map(WeakExample::from).collect();
        write_weak_corpus(&path, &weak)?;
    } else {
        write_corpus(&path, &videos)?;
    }
    let (normal, abnormal) = label_split(videos.iter().map(weak_view));
    let n = videos.len();
    run.say(&format!(
        "wrote {} videos to {}{}",
        n,
        path.display(),
        if a.weak { " (weak labels)" } else { "" }
    ))?;
    run.say(&format!(
        "labels: {normal} normal, {abnormal} abnormal (abnormal fraction {:.3}, requested {:.3})",
        abnormal as f64 / n as f64,
        config.corpus.abnormal_fraction
    ))?;
    run.say("duration histogram:")?;
    for line in duration_histogram(videos.iter().map(SyntheticVideo::duration), 8) {
        run.say(&line)?;
    }
    Ok(ExitCode::SUCCESS)
}

/// Equal-width buckets between the shortest and longest duration.
pub fn duration_histogram(durations: impl IntoIterator<Item = usize>, buckets: usize) -> Vec<String> {
    let d: Vec<usize> = durations.into_iter().collect();
    let (Some(&lo), Some(&hi)) = (d.iter().min(), d.iter().max()) else {
        return Vec::new();
    };
    let span = hi - lo + 1;
    let buckets = buckets.clamp(1, span);
    let mut counts = vec![0usize; buckets];
    for x in &d {
        counts[(x - lo) * buckets / span] += 1;
    }
    let peak = counts.iter().copied().max().unwrap_or(1).max(1);
    counts
        .iter()
        .enumerate()
        .map(|(b, &c)| {
            let from = lo + (b * span).div_ceil(buckets);
            let to = lo + ((b + 1) * span).div_ceil(buckets) - 1;
            format!("  {from:>5}-{to:<5} {c:>6} {}", "#".repeat((c * 40).div_ceil(peak)))
        })
        .collect()
}

/// Deterministic interleaved split: video `i` is held out when the running
/// count `floor((i + 1) * fraction)` steps up.
pub fn holdout_split<T: Clone>(items: &[T], fraction: f64) -> (Vec<T>, Vec<T>) {
    let mut fit = Vec::new();
    let mut held = Vec::new();
    for (i, x) in items.iter().enumerate() {
        let step = ((i + 1) as f64 * fraction).floor() > (i as f64 * fraction).floor();
        if step {
            held.push(x.clone());
        } else {
            fit.push(x.clone());
        }
    }
    (fit, held)
}

fn check_tokens<'a>(config: &PolicyConfig, frames: impl IntoIterator<Item = &'a [u32]>) -> Result<()> {
    if let Some(m) = max_token(frames) {
        if m as usize >= config.vocab_size {
            return Err(Error::Mismatch(format!(
                "corpus uses token {m} but the policy vocabulary has {} tokens",
                config.vocab_size
            )));
        }
    }
    Ok(())
}

/// Greedy (or seeded sampled) completion per video.
pub fn decode_outputs(params: &PolicyParams, videos: &[SyntheticVideo], stochastic: bool, seed: u64) -> Vec<OutputRecord> {
    let pc = params.config();
    videos
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let obs = Observation::new(pc, &uniform_sample(v.frames(), pc.frames));
            let c = if stochastic {
                sample(params, &obs, &mut rng::stream(seed, &[site::DECODE, i as u64]))
            } else {
                decode_greedy(params, &obs)
            };
            OutputRecord {
                video_id: v.id().into(),
                text: c.text,
            }
        })
        .collect()
}

fn sft(run: &mut RunDir, config: &RunConfig) -> Result<ExitCode> {
    let corpus_path = required(&config.paths.corpus, "corpus")?;
    let videos = read_corpus(corpus_path)?;
    let pc = config.policy_config();
    check_tokens(&pc, videos.iter().map(SyntheticVideo::frames))?;
    let (fit, held) = holdout_split(&videos, config.sft.holdout);
    let init = PolicyParams::zeros(pc);
    let cfg = config.sft_config();
    run.say(&format!(
        "fitting on {} videos ({} held out), {} steps at lr {}",
        fit.len(),
        held.len(),
        cfg.steps,
        cfg.lr
    ))?;
    let outcome = sft_fit(&init, &fit, &cfg)?;
    #[derive(serde::Serialize)]
    struct Loss {
        step: usize,
        loss: f64,
    }
    jsonl::write(
        &run.path("sft.log.jsonl"),
        outcome.losses.iter().enumerate().map(|(step, &loss)| Loss { step, loss }),
    )?;
    let ckpt = run.path("checkpoint.txt");
    checkpoint::save(
        &ckpt,
        &outcome.params,
        &[format!(
            "sft seed={} steps={} lr={} supervise_segment={} corpus={}",
            config.seed(),
            cfg.steps,
            cfg.lr,
            cfg.supervise_segment,
            corpus_path.display()
        )],
    )?;
    if let (Some(first), Some(last)) = (outcome.losses.first(), outcome.losses.last()) {
        run.say(&format!("loss {first:.4} -> {last:.4}"))?;
    }
    if !held.is_empty() {
        let outputs = decode_outputs(&outcome.params, &held, false, config.seed());
        let report = evaluate(&outputs, &held, &config.eval_settings(pc))?;
        run.say(&format!("held-out accuracy {:.4} on {} videos", report.accuracy, held.len()))?;
    }
    run.say(&format!("checkpoint {}", ckpt.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn train(run: &mut RunDir, config: &RunConfig, a: &TrainArgs) -> Result<ExitCode> {
    let corpus_path = required(&config.paths.corpus, "corpus")?;
    let corpus = read_weak_corpus(corpus_path)?;
    let (init, provenance) = match &config.paths.init {
        Some(_) => {
            let p = required(&config.paths.init, "init")?;
            (checkpoint::load(p)?, p.display().to_string())
        }
        None => (PolicyParams::zeros(config.policy_config()), "scratch".to_string()),
    };
    check_tokens(init.config(), corpus.iter().map(WeakExample::frames))?;
    let cfg = &config.train;
    let mut rewards = vec!["acc".to_string(), "fmt".to_string()];
    if cfg.rewards.verification {
        rewards.push("ano".into());
    }
    if cfg.rewards.length {
        rewards.push("len".into());
    }
    let header = LogHeader {
        tool: crate::TOOL.into(),
        command: "train".into(),
        seed: config.seed(),
        init: provenance.clone(),
        corpus: corpus_path.display().to_string(),
        rewards: rewards.clone(),
    };
    let log_path = run.path("train.log.jsonl");
    let mut log = LogWriter::create(&log_path, &header)?;
    run.say(&format!(
        "training on {} videos from {provenance}; rewards {}; ablation {:?}",
        corpus.len(),
        rewards.join("+"),
        a.reward_ablation
    ))?;
    let every = config.ckpt_every;
    let report_every = (corpus.len() * cfg.epochs).div_ceil(10).max(1);
    let mut failure: Option<Error> = None;
    let mut window: Vec<f64> = Vec::new();
    let ckpt_dir = run.path("ckpt");
    let mut progress = Vec::new();
    let result = {
        let mut hook = |r: &StepRecord, p: &PolicyParams| {
            if failure.is_some() {
                return;
            }
            if let Err(e) = log.record(r) {
                failure = Some(e);
                return;
            }
            window.push(r.mean_total);
            if (r.step + 1).is_multiple_of(report_every) {
                let m = window.iter().sum::<f64>() / window.len() as f64;
                progress.push(format!("step {:>6}  mean reward {m:.4}", r.step + 1));
                window.clear();
            }
            if every > 0 && (r.step + 1).is_multiple_of(every) {
                let path = ckpt_dir.join(format!("step-{:06}.txt", r.step + 1));
                if let Err(e) = checkpoint::save(&path, p, &[format!("train step {}", r.step + 1)]) {
                    failure = Some(e);
                }
            }
        };
        train_with(&init, &corpus, cfg, &mut hook)
    };
    for line in progress {
        run.say(&line)?;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    log.finish()?;
    let (params, tlog) = match result {
        Ok(x) => x,
        Err(e) => {
            run.say(&format!("aborted: {e}; log kept at {}", log_path.display()))?;
            return Err(e.into());
        }
    };
    let ckpt = run.path("checkpoint.txt");
    checkpoint::save(
        &ckpt,
        &params,
        &[format!(
            "train seed={} init={provenance} steps={} rewards={}",
            config.seed(),
            tlog.records.len(),
            rewards.join("+")
        )],
    )?;
    run.say(&format!("{} updates; checkpoint {}", tlog.records.len(), ckpt.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn eval(run: &mut RunDir, config: &RunConfig, a: &EvalArgs) -> Result<ExitCode> {
    let corpus_path = required(&config.paths.corpus, "corpus")?;
    let videos = read_corpus(corpus_path)?;
    let (outputs, pc) = if a.oracle {
        let pc = config.policy_config();
        let outs = videos
            .iter()
            .map(|v| OutputRecord {
                video_id: v.id().into(),
                text: reference_text(&pc, v),
            })
            .collect();
        (outs, pc)
    } else if config.paths.outputs.is_some() && config.paths.checkpoint.is_none() {
        (read_outputs(required(&config.paths.outputs, "outputs")?)?, config.policy_config())
    } else {
        let params = checkpoint::load(required(&config.paths.checkpoint, "checkpoint")?)?;
        check_tokens(params.config(), videos.iter().map(SyntheticVideo::frames))?;
        let outs = decode_outputs(&params, &videos, config.eval.stochastic, config.seed());
        (outs, *params.config())
    };
    write_outputs(&run.path("outputs.jsonl"), &outputs)?;
    let report = evaluate(&outputs, &videos, &config.eval_settings(pc))?;
    write_report(run.root(), &report)?;
    for line in report.to_table().lines() {
        run.say(line)?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn write_report(dir: &Path, report: &MetricsReport) -> Result<()> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    write_text(&dir.join("report.json"), &(json + "\n"))?;
    write_text(&dir.join("report.txt"), &report.to_table())
}

pub fn read_report(path: &Path) -> Result<MetricsReport> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::Format {
        path: path.display().to_string(),
        line: e.line(),
        offset: e.column(),
        message: e.to_string(),
    })
}

/// Splits on blank lines; each record carries its 1-based first line.
pub fn split_records(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut cur: Option<(usize, String)> = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            out.extend(cur.take());
        } else {
            let (_, body) = cur.get_or_insert_with(|| (i + 1, String::new()));
            if !body.is_empty() {
                body.push('\n');
            }
            body.push_str(line);
        }
    }
    out.extend(cur);
    out
}

fn parse(run: &mut RunDir, a: &ParseArgs) -> Result<ExitCode> {
    let records: Vec<(String, String)> = if a.file.extension().is_some_and(|e| e == "jsonl") {
        read_outputs(&a.file)?
            .into_iter()
            .map(|r| (r.video_id, r.text))
            .collect()
    } else {
        split_records(&read_text(&a.file)?)
            .into_iter()
            .map(|(line, text)| (format!("line {line}"), text))
            .collect()
    };
    if records.is_empty() {
        run.say(&format!("warning: {} holds no records", a.file.display()))?;
        return Ok(ExitCode::SUCCESS);
    }
    let mut malformed = 0;
    let mut report = String::new();
    for (k, (origin, text)) in records.iter().enumerate() {
        let r = parse_report(text);
        let status = if r.doc.is_none() {
            malformed += 1;
            "malformed"
        } else if r.diagnostics.is_empty() {
            "ok"
        } else {
            "ok (non-canonical)"
        };
        let line = format!("record {} ({origin}): {status}", k + 1);
        run.say(&line)?;
        report.push_str(&line);
        report.push('\n');
        for d in r.diagnostics.iter() {
            let line = format!("  {}{d}", if d.strict { "strict: " } else { "" });
            run.say(&line)?;
            report.push_str(&line);
            report.push('\n');
        }
    }
    let summary = format!("{} records, {malformed} malformed", records.len());
    run.say(&summary)?;
    report.push_str(&summary);
    report.push('\n');
    write_text(&run.path("diagnostics.txt"), &report)?;
    Ok(if malformed > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn judge(run: &mut RunDir, config: &RunConfig, _a: &JudgeArgs) -> Result<ExitCode> {
    let outputs = read_outputs(required(&config.paths.outputs, "outputs")?)?;
    let videos = read_corpus(required(&config.paths.corpus, "corpus")?)?;
    let by_id: std::collections::HashMap<&str, &SyntheticVideo> = videos.iter().map(|v| (v.id(), v)).collect();
    let items = outputs
        .iter()
        .map(|o| {
            let v = by_id
                .get(o.video_id.as_str())
                .ok_or_else(|| Error::Mismatch(format!("output for unknown video {}", o.video_id)))?;
            Ok(JudgeItem {
                video_id: o.video_id.clone(),
                answer: o.text.clone(),
                reference: JudgeReference::from(*v),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let client = JudgeClient::from_env(config.judge.clone())?;
    let result = client.run(&items);
    let json = serde_json::to_string_pretty(&result).expect("judge run serializes");
    write_text(&run.path("judge.json"), &(json + "\n"))?;
    if let Some(m) = &result.mean {
        run.say(&format!(
            "reasonability {:.4}  detail {:.4}  consistency {:.4}  ({} of {} videos)",
            m.reasonability,
            m.detail,
            m.consistency,
            result.scored,
            result.videos.len()
        ))?;
    }
    if result.complete {
        Ok(ExitCode::SUCCESS)
    } else {
        for v in result.videos.iter().filter(|v| v.score.is_none()) {
            run.say(&format!("{}: {}", v.video_id, v.errors.join("; ")))?;
        }
        run.say("judge run INCOMPLETE")?;
        Ok(ExitCode::from(1))
    }
}
