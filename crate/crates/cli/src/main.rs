use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hyperwalk::datagen::{
    inject_bursty, inject_unexpected, synth_base, t_setup_at, InjectionBParams, InjectionUParams,
};
use hyperwalk::detector::{run_stream, DetectorParams};
use hyperwalk::eval::{complementarity_report, LabeledScores};
use hyperwalk::harness::{bench, parse_powers, sweep, SweepSettings, BENCH_HEADER, SWEEP_HEADER};
use hyperwalk::io::{
    dense_labels, read_labels, read_scores, read_stream, write_labeled, write_score, StreamReader,
};
use hyperwalk::stream::LabeledEvent;

/// Streaming anomaly detection for hyperedge streams.
#[derive(Parser)]
#[command(name = "hyperwalk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every hyperedge of a stream file.
    Score(ScoreArgs),
    /// Inject labeled anomalies into a stream file.
    Inject {
        #[command(subcommand)]
        kind: InjectKind,
    },
    /// Generate a synthetic community-structured stream.
    Synth(SynthArgs),
    /// Evaluate a score file against labels.
    Eval(EvalArgs),
    /// Measure throughput over timestamp-shifted replicas of a stream.
    Bench(BenchArgs),
    /// Score and evaluate a labeled stream over a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct DetectorArgs {
    /// Number of supernodes.
    #[arg(long = "M", default_value_t = 64)]
    m: usize,
    /// Number of hash functions.
    #[arg(long = "K", default_value_t = 4)]
    k: usize,
    /// Time-decay factor in [0, 1).
    #[arg(long, default_value_t = 0.98)]
    alpha: f64,
    /// Hash seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Floor applied to the expected proximity.
    #[arg(long, default_value_t = 1e-12)]
    delta: f64,
}

impl DetectorArgs {
    fn params(&self) -> DetectorParams {
        DetectorParams::new(self.m, self.k, self.alpha)
            .with_seed(self.seed)
            .with_floor(self.delta)
    }
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    detector: DetectorArgs,
    /// Score file to write; standard output if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Check every snapshot against a from-scratch recomputation.
    #[arg(long)]
    oracle_check: bool,
}

#[derive(Args)]
struct InjectCommon {
    #[arg(long)]
    input: PathBuf,
    /// Only events after the event at this 0-based index are affected.
    #[arg(long, default_value_t = 100)]
    t_setup_index: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out_stream: PathBuf,
    #[arg(long)]
    out_labels: PathBuf,
}

#[derive(Subcommand)]
enum InjectKind {
    /// Replace half of the nodes of randomly chosen hyperedges.
    Unexpected {
        #[command(flatten)]
        common: InjectCommon,
        /// Number of injected hyperedges.
        #[arg(long, default_value_t = 200)]
        g: usize,
    },
    /// Add bursts of hyperedges over small random node groups.
    Bursty {
        #[command(flatten)]
        common: InjectCommon,
        #[arg(long, default_value_t = 10)]
        bursts: usize,
        #[arg(long, default_value_t = 20)]
        per_burst: usize,
        #[arg(long, default_value_t = 5)]
        group_size: usize,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    nodes: usize,
    #[arg(long, default_value_t = 5000)]
    events: usize,
    #[arg(long, default_value_t = 10)]
    communities: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out_stream: PathBuf,
    /// Optional all-zero label file.
    #[arg(long)]
    out_labels: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    scores: PathBuf,
    /// Labels for listed indices; unlisted events count as normal.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 100)]
    k: usize,
    /// Events before this index are excluded from evaluation.
    #[arg(long, default_value_t = 100)]
    eval_from_index: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    input: PathBuf,
    /// Replication factors 2^p for p in the range: `P` (0..=P) or `A..B`.
    #[arg(long, default_value = "0..6")]
    replicate_powers: String,
    #[command(flatten)]
    detector: DetectorArgs,
    /// Runs per factor; the fastest is reported.
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Comma-separated supernode counts.
    #[arg(long = "M-list")]
    m_list: String,
    /// Comma-separated hash function counts.
    #[arg(long = "K-list")]
    k_list: String,
    /// Comma-separated decay factors.
    #[arg(long = "alpha-list")]
    alpha_list: String,
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long, default_value_t = 100)]
    eval_from_index: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    delta: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Bad flag values, reported with exit code 2 like parse-time flag errors.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(err: hyperwalk::Error) -> anyhow::Error {
    UsageError(err.to_string()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<hyperwalk::Error>() {
        Some(hyperwalk::Error::InvalidConfig(_) | hyperwalk::Error::KTooLarge { .. }) => 2,
        _ => 1,
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse_list<T: std::str::FromStr>(name: &str, text: &str) -> Result<Vec<T>> {
    let items: Vec<&str> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(UsageError(format!("{name} is empty")).into());
    }
    items
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|_| UsageError(format!("invalid value {s:?} in {name}")).into())
        })
        .collect()
}

fn cmd_score(args: &ScoreArgs) -> Result<()> {
    let mut detector = args.detector.params().build().map_err(usage)?;
    if args.oracle_check {
        detector = detector.with_oracle_check();
    }
    let events = StreamReader::new(open(&args.input)?);
    let mut out = output(args.output.as_deref())?;
    let start = Instant::now();
    let n = run_stream(&mut detector, events, |s| write_score(&mut out, &s))
        .with_context(|| format!("while scoring {}", args.input.display()))?;
    out.flush()?;
    eprintln!("scored {n} events in {:.2}s", start.elapsed().as_secs_f64());
    Ok(())
}

fn read_base(path: &Path) -> Result<Vec<LabeledEvent>> {
    let events =
        read_stream(open(path)?).with_context(|| format!("while reading {}", path.display()))?;
    Ok(events.into_iter().map(LabeledEvent::normal).collect())
}

fn cmd_inject(kind: &InjectKind) -> Result<()> {
    let common = match kind {
        InjectKind::Unexpected { common, .. } | InjectKind::Bursty { common, .. } => common,
    };
    let base = read_base(&common.input)?;
    let t_setup = t_setup_at(&base, common.t_setup_index).map_err(usage)?;
    let injected = match kind {
        InjectKind::Unexpected { g, .. } => inject_unexpected(
            &base,
            &InjectionUParams {
                count: *g,
                t_setup,
                rng_seed: common.seed,
            },
        ),
        InjectKind::Bursty {
            bursts,
            per_burst,
            group_size,
            ..
        } => inject_bursty(
            &base,
            &InjectionBParams {
                bursts: *bursts,
                per_burst: *per_burst,
                group_size: *group_size,
                t_setup,
                rng_seed: common.seed,
            },
        ),
    }?;
    write_labeled(
        create(&common.out_stream)?,
        create(&common.out_labels)?,
        &injected,
    )?;
    eprintln!(
        "wrote {} events ({} injected)",
        injected.len(),
        injected.len() - base.len()
    );
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let stream = synth_base(args.nodes, args.events, args.communities, args.seed).map_err(usage)?;
    match &args.out_labels {
        Some(labels) => write_labeled(create(&args.out_stream)?, create(labels)?, &stream)?,
        None => {
            hyperwalk::io::write_stream(create(&args.out_stream)?, stream.iter().map(|e| &e.event))?
        }
    }
    eprintln!("wrote {} events", stream.len());
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let scores = read_scores(open(&args.scores)?)
        .with_context(|| format!("while reading {}", args.scores.display()))?;
    let labels = read_labels(open(&args.labels)?)
        .with_context(|| format!("while reading {}", args.labels.display()))?;
    let labels = dense_labels(&labels, scores.len())?;
    let us: Vec<f64> = scores.iter().map(|s| s.score_u).collect();
    let bs: Vec<f64> = scores.iter().map(|s| s.score_b).collect();
    let u = LabeledScores::from_slices(&us, &labels, args.eval_from_index)?;
    let b = LabeledScores::from_slices(&bs, &labels, args.eval_from_index)?;
    let report = complementarity_report(&u, &b, args.k)?;
    print!("{}", report.to_tsv());
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let powers = parse_powers(&args.replicate_powers).map_err(usage)?;
    let params = args.detector.params();
    params.build().map_err(usage)?;
    let base = read_stream(open(&args.input)?)
        .with_context(|| format!("while reading {}", args.input.display()))?;
    let rows = bench(&base, &powers, &params, args.repeats).map_err(|e| match e {
        hyperwalk::Error::InvalidConfig(_) => usage(e),
        other => other.into(),
    })?;
    let mut out = output(args.output.as_deref())?;
    writeln!(out, "{BENCH_HEADER}")?;
    for row in &rows {
        writeln!(out, "{}", row.to_csv())?;
        eprintln!(
            "factor {}: {:.0} events/s",
            row.factor, row.events_per_second
        );
    }
    out.flush()?;
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let ms: Vec<usize> = parse_list("M-list", &args.m_list)?;
    let ks: Vec<usize> = parse_list("K-list", &args.k_list)?;
    let alphas: Vec<f64> = parse_list("alpha-list", &args.alpha_list)?;
    for &m in &ms {
        for &k in &ks {
            for &alpha in &alphas {
                DetectorParams::new(m, k, alpha)
                    .with_floor(args.delta)
                    .build()
                    .map_err(usage)?;
            }
        }
    }
    let events = read_stream(open(&args.input)?)
        .with_context(|| format!("while reading {}", args.input.display()))?;
    let labels = read_labels(open(&args.labels)?)
        .with_context(|| format!("while reading {}", args.labels.display()))?;
    let labels = dense_labels(&labels, events.len())?;
    let settings = SweepSettings {
        seed: args.seed,
        floor: args.delta,
        k: args.k,
        eval_from: args.eval_from_index,
    };
    let rows = sweep(&events, &labels, &ms, &ks, &alphas, &settings)?;
    let mut out = output(args.output.as_deref())?;
    writeln!(out, "{SWEEP_HEADER}")?;
    for row in &rows {
        writeln!(out, "{}", row.to_csv())?;
    }
    out.flush()?;
    eprintln!("evaluated {} grid points", rows.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Score(args) => cmd_score(args),
        Command::Inject { kind } => cmd_inject(kind),
        Command::Synth(args) => cmd_synth(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
