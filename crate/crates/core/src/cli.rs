//! Command-line front end. `run` takes the argument list and returns the exit
//! code: 0 on success, 1 for invalid input or usage, 2 for I/O failures.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::assignment::TIE_TOLERANCE;
use crate::corpus::{bind_outputs, load_jsonl, load_outputs_jsonl, load_parallel_text, outputs_to_jsonl, Dataset};
use crate::decoding::{generate_for_dataset, GenerateConfig, Strategy};
use crate::error::{Error, Result};
use crate::metrics::{LookupMetric, SentenceBleu, SentenceChrf, SentenceMetric};
use crate::multi_score::{corpus_multi_score, MultiScoreOptions};
use crate::report::{evaluate_all, render, render_multiscore, EvalConfig, Format, MultiScoreReport};

#[derive(Debug, Parser)]
#[command(
    name = "multiscore",
    version,
    about = "Quality and diversity evaluation of generated sentence sets"
)]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true, env = "MULTISCORE_THREADS")]
    threads: Option<usize>,

    /// Repeat for more log output on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    /// Only print errors.
    #[arg(short, long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full battery: BLEU, chrF++, Self-BLEU, MS-BLEU and MS-chrF++.
    Evaluate(EvaluateArgs),
    /// Multi-Score under one sentence metric.
    Multiscore(MultiscoreArgs),
    /// Generate three-sentence sets with a per-instance n-gram model.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Dataset JSONL, or a directory of ref<N>.txt files.
    #[arg(long)]
    data: PathBuf,

    /// Outputs JSONL, or a directory of out<N>.txt files.
    #[arg(long)]
    outputs: Option<PathBuf>,

    /// Match min(outputs, references) pairs when set sizes differ.
    #[arg(long)]
    allow_unequal: bool,

    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,

    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Debug, Args)]
struct MultiscoreArgs {
    #[command(flatten)]
    input: InputArgs,

    #[arg(long, value_enum, default_value_t = MetricArg::Bleu)]
    metric: MetricArg,

    /// Score table JSON for `--metric table`.
    #[arg(long, required_if_eq("metric", "table"))]
    table: Option<PathBuf>,

    /// Include matrices and matchings for every instance.
    #[arg(long)]
    per_instance: bool,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Dataset JSONL whose references train each instance's model.
    #[arg(long)]
    train: PathBuf,

    #[arg(
        long,
        value_parser = PossibleValuesParser::new(["beam3", "random", "topk3", "ensemble"])
            .map(|s| s.parse::<Strategy>().expect("restricted to known names")),
    )]
    strategy: Strategy,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value_t = 3)]
    order: usize,

    #[arg(long, default_value_t = 0.1)]
    add_k: f64,

    #[arg(long, default_value_t = 5)]
    beam_width: usize,

    #[arg(long, default_value_t = 64)]
    max_len: usize,

    /// Length-penalty exponent for beam scoring.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,

    #[arg(long, default_value_t = 3)]
    top_k: usize,

    /// Outputs JSONL destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Tsv,
    Table,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Tsv => Format::Tsv,
            FormatArg::Table => Format::Table,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Bleu,
    Chrf,
    Table,
}

fn init_logging(verbose: u8, quiet: bool) {
    let level = match (quiet, verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    // A second call (tests run `run` repeatedly) keeps the first logger.
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_env("MULTISCORE_LOG")
        .format_timestamp(None)
        .try_init();
    log::set_max_level(level);
}

/// Writes `contents` to `path` via a temporary file in the same directory, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, contents.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn load_input(input: &InputArgs) -> Result<Dataset> {
    if input.data.is_dir() {
        let out_dir = input.outputs.as_deref().filter(|p| p.is_dir());
        let ds = load_parallel_text(&input.data, out_dir)?;
        return match input.outputs.as_deref() {
            Some(p) if !p.is_dir() => bind_outputs(&ds, &load_outputs_jsonl(p)?),
            _ => Ok(ds),
        };
    }
    let ds = load_jsonl(&input.data)?;
    match input.outputs.as_deref() {
        Some(p) if p.is_dir() => Err(Error::InvalidInput(format!(
            "{}: an outputs directory needs a references directory for --data",
            p.display()
        ))),
        Some(p) => bind_outputs(&ds, &load_outputs_jsonl(p)?),
        None => Ok(ds),
    }
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let ds = load_input(&args.input)?;
    log::info!("loaded {} instances from {}", ds.len(), ds.source_path());
    let config = EvalConfig {
        allow_unequal: args.input.allow_unequal,
        ..EvalConfig::default()
    };
    let report = evaluate_all(&ds, &config)?;
    emit(args.input.out.as_deref(), &render(&report, args.input.format.into()))
}

fn cmd_multiscore(args: &MultiscoreArgs) -> Result<()> {
    let ds = load_input(&args.input)?;
    if let Some(inst) = ds.instances().iter().find(|i| i.outputs.is_empty()) {
        return Err(Error::MissingId(inst.id.clone()));
    }
    let metric: Box<dyn SentenceMetric> = match args.metric {
        MetricArg::Bleu => Box::new(SentenceBleu::default()),
        MetricArg::Chrf => Box::new(SentenceChrf::default()),
        MetricArg::Table => {
            let path = args.table.as_deref().expect("clap enforces --table");
            Box::new(LookupMetric::from_json_file(path)?)
        }
    };
    let options = MultiScoreOptions {
        allow_unequal: args.input.allow_unequal,
    };
    let result = corpus_multi_score(ds.instances(), metric.as_ref(), options)?;
    let report = MultiScoreReport {
        metric: metric.name().to_string(),
        instances: ds.len(),
        score: result.score,
        per_instance: args.per_instance.then_some(result.per_instance),
        allow_unequal: args.input.allow_unequal,
        tie_tolerance: format!("{TIE_TOLERANCE:e}"),
    };
    emit(
        args.input.out.as_deref(),
        &render_multiscore(&report, args.input.format.into()),
    )
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let ds = load_jsonl(&args.train)?;
    let config = GenerateConfig {
        strategy: args.strategy,
        order: args.order,
        add_k: args.add_k,
        seed: args.seed,
        beam_width: args.beam_width,
        max_len: args.max_len,
        alpha: args.alpha,
        top_k: args.top_k,
    };
    let records = generate_for_dataset(&ds, &config)?;
    let filled = records.iter().filter(|r| r.filled).count();
    let truncated = records.iter().filter(|r| r.truncated).count();
    if filled > 0 {
        log::warn!("{filled} instance(s) had fewer than three finished hypotheses and were filled");
    }
    if truncated > 0 {
        log::warn!(
            "{truncated} instance(s) contain sentences cut at --max-len {}",
            args.max_len
        );
    }
    emit(args.out.as_deref(), &outputs_to_jsonl(&records))
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Multiscore(a) => cmd_multiscore(a),
        Command::Generate(a) => cmd_generate(a),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    init_logging(cli.verbose, cli.quiet);

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let result = match pool.build() {
        Ok(pool) => pool.install(|| dispatch(&cli)),
        Err(e) => Err(Error::InvalidConfig(format!("thread pool: {e}"))),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                2
            } else {
                1
            }
        }
    }
}
