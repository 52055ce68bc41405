//! `ffp`: build, apply and evaluate fuzzy fingerprint libraries.

mod config;
mod data;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use ffp::io::{load_dailydialog, load_library, save_library, write_corpus, write_embeddings};
use ffp::synth::{generate, SynthConfig};
use ffp::{
    build_library_with, classify, evaluate, explain, fmt_num, render_explanation, sweep_k_with, Dataset, EvalReport,
    ExplanationReport, FfpError, FingerprintLibrary, FuzzifyParams, RankingMode, SimilarityParams, Split,
};

use config::Config;
use data::{load_all, load_role, Mode};

const DEFAULT_K_GRID: [usize; 10] = [1, 5, 10, 25, 50, 100, 150, 200, 300, 400];

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] FfpError),
    #[error("{}: {source}", path.display())]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_parameter_error() => 4,
            CliError::Core(_) | CliError::Output { .. } => 3,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "ffp", version, about = "Fuzzy fingerprint emotion classification")]
struct Cli {
    /// TOML file with default parameters; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build class fingerprints from a training split.
    Build(BuildArgs),
    /// Classify every record of a dataset file.
    Classify(ClassifyArgs),
    /// Score a test split and report per-class and macro F1.
    Evaluate(EvaluateArgs),
    /// Evaluate a grid of K values on the validation split.
    SweepK(SweepArgs),
    /// Convert a raw DailyDialog directory into a corpus file.
    Convert(ConvertArgs),
    /// Print the fingerprints of a library.
    Inspect(InspectArgs),
    /// Write seeded synthetic activation vectors.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Ranking {
    Signed,
    Magnitude,
}

impl From<Ranking> for RankingMode {
    fn from(r: Ranking) -> Self {
        match r {
            Ranking::Signed => RankingMode::Signed,
            Ranking::Magnitude => RankingMode::Magnitude,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct FuzzyArgs {
    /// Fingerprint size.
    #[arg(long)]
    k: Option<usize>,
    /// Membership slope.
    #[arg(long)]
    a: Option<f64>,
    /// Ranking of activation values.
    #[arg(long, value_enum)]
    ranking: Option<Ranking>,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long, value_name = "FILE")]
    train: Option<PathBuf>,
    /// Split to read from the training file when it holds several.
    #[arg(long)]
    split: Option<String>,
    #[command(flatten)]
    fuzzy: FuzzyArgs,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, value_name = "FILE")]
    library: Option<PathBuf>,
    /// Records to classify; all splits in the file are used unless --split is given.
    #[arg(long, alias = "test", value_name = "FILE")]
    input: PathBuf,
    #[arg(long)]
    split: Option<String>,
    /// Similarity normalizer.
    #[arg(long)]
    n: Option<f64>,
    /// Attach the shared elements behind every class score.
    #[arg(long)]
    explain: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, value_name = "FILE", conflicts_with = "train")]
    library: Option<PathBuf>,
    /// Build the library from this training file instead of loading one.
    #[arg(long, value_name = "FILE")]
    train: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[command(flatten)]
    fuzzy: FuzzyArgs,
    #[arg(long, value_name = "FILE")]
    test: Option<PathBuf>,
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    n: Option<f64>,
    /// Write the JSON report here.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long, value_name = "FILE")]
    train: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    valid: Option<PathBuf>,
    /// Also score this split at the selected K.
    #[arg(long, value_name = "FILE")]
    test: Option<PathBuf>,
    /// Comma-separated K values.
    #[arg(long, value_delimiter = ',')]
    k_grid: Option<Vec<usize>>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long, value_enum)]
    ranking: Option<Ranking>,
    #[arg(long)]
    n: Option<f64>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvertArgs {
    /// Directory holding the raw release.
    #[arg(long, value_name = "DIR")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long, value_name = "FILE")]
    library: PathBuf,
    /// Only this class.
    #[arg(long)]
    label: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 7)]
    classes: usize,
    #[arg(long, default_value_t = 768)]
    dimension: usize,
    #[arg(long, default_value_t = 40)]
    block: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 100)]
    train_per_class: usize,
    #[arg(long, default_value_t = 20)]
    valid_per_class: usize,
    #[arg(long, default_value_t = 20)]
    test_per_class: usize,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Build(args) => cmd_build(args, &config),
        Command::Classify(args) => cmd_classify(args, &config),
        Command::Evaluate(args) => cmd_evaluate(args, &config),
        Command::SweepK(args) => cmd_sweep(args, &config),
        Command::Convert(args) => cmd_convert(args),
        Command::Inspect(args) => cmd_inspect(args),
        Command::Synth(args) => cmd_synth(args, &config),
    }
}

fn require<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("missing required option --{flag} (or `{}` in the config file)", flag.replace('-', "_"))))
}

fn parse_split(name: Option<&str>) -> CliResult<Option<Split>> {
    name.map(|s| Split::parse(s).ok_or_else(|| CliError::Usage(format!("unknown split `{s}`")))).transpose()
}

fn similarity_params(n: Option<f64>, config: &Config) -> CliResult<SimilarityParams> {
    Ok(SimilarityParams::new(n.or(config.n).unwrap_or(1.0))?)
}

fn fuzzy_params(args: &FuzzyArgs, config: &Config) -> CliResult<(FuzzifyParams, RankingMode)> {
    let k = require(args.k.or(config.k), "k")?;
    let a = args.a.or(config.a).unwrap_or(0.8);
    let ranking = args.ranking.map(RankingMode::from).or(config.ranking).unwrap_or_default();
    Ok((FuzzifyParams::new(k, a)?, ranking))
}

fn write_output(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Output { path: path.to_path_buf(), source })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn build_from(train: &Path, mode: Mode, split: Option<Split>, fuzzy: &FuzzyArgs, config: &Config) -> CliResult<FingerprintLibrary> {
    let (params, ranking) = fuzzy_params(fuzzy, config)?;
    let data = load_role(train, mode, Split::Train, split)?;
    Ok(build_library_with(&data, &params, ranking)?)
}

fn cmd_build(args: BuildArgs, config: &Config) -> CliResult<()> {
    let train = require(args.train.or_else(|| config.train.clone()), "train")?;
    let mode = args.mode.or(config.mode).unwrap_or(Mode::Activation);
    let lib = build_from(&train, mode, parse_split(args.split.as_deref())?, &args.fuzzy, config)?;
    save_library(&lib, &args.out)?;
    println!(
        "built {} class fingerprints (K={}, a={}) -> {}",
        lib.len(),
        lib.params().k(),
        fmt_num(lib.params().a()),
        args.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct PredictionLine<'a> {
    id: &'a str,
    gold: &'a str,
    predicted: &'a str,
    no_evidence: bool,
    scores: &'a BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    explanation: Option<ExplanationReport>,
}

fn cmd_classify(args: ClassifyArgs, config: &Config) -> CliResult<()> {
    let path = require(args.library.or_else(|| config.library.clone()), "library")?;
    let lib: FingerprintLibrary = load_library(&path)?;
    let n = similarity_params(args.n, config)?;
    let data = load_all(&args.input, Mode::of(&lib), parse_split(args.split.as_deref())?)?;
    let mut out = String::new();
    for (id, gold, fp) in data::fingerprints(&lib, &data)? {
        let wrap = |e| FfpError::Instance { id: id.to_string(), source: Box::new(e) };
        let result = classify(&fp, &lib, &n).map_err(wrap)?;
        let explanation = if args.explain { Some(explain(&fp, &lib, &n).map_err(wrap)?.to_report(&lib)) } else { None };
        match args.format {
            Format::Json => {
                let line = PredictionLine {
                    id,
                    gold,
                    predicted: &result.predicted,
                    no_evidence: result.no_evidence(),
                    scores: &result.scores,
                    explanation,
                };
                out.push_str(&serde_json::to_string(&line).expect("prediction serializes"));
                out.push('\n');
            }
            Format::Text => match explanation {
                Some(report) => out.push_str(&render_explanation(id, &report)),
                None => {
                    let scores: Vec<String> = result.scores.iter().map(|(l, s)| format!("{l}={}", fmt_num(*s))).collect();
                    out.push_str(&format!("{id}\t{}\t{}\n", result.predicted, scores.join(" ")));
                }
            },
        }
    }
    emit(args.out.as_deref(), &out)
}

fn emit(path: Option<&Path>, contents: &str) -> CliResult<()> {
    match path {
        Some(p) => write_output(p, contents),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .map_err(|source| CliError::Output { path: PathBuf::from("<stdout>"), source })
        }
    }
}

fn cmd_evaluate(args: EvaluateArgs, config: &Config) -> CliResult<()> {
    let n = similarity_params(args.n, config)?;
    let split = parse_split(args.split.as_deref())?;
    let lib = match (args.library, args.train) {
        (Some(path), _) => load_library(&path)?,
        (None, Some(train)) => build_from(&train, args.mode.or(config.mode).unwrap_or(Mode::Activation), None, &args.fuzzy, config)?,
        (None, None) => match (&config.library, &config.train) {
            (Some(path), _) => load_library(path)?,
            (None, Some(train)) => build_from(train, args.mode.or(config.mode).unwrap_or(Mode::Activation), None, &args.fuzzy, config)?,
            (None, None) => return Err(CliError::Usage("evaluate needs --library or --train".into())),
        },
    };
    let test_path = require(args.test.or_else(|| config.test.clone()), "test")?;
    let test = load_role(&test_path, Mode::of(&lib), Split::Test, split)?;
    let report = evaluate(&lib, &test, &n)?;
    if let Some(out) = &args.out {
        write_output(out, &to_json(&report))?;
    }
    print!("{}", report.to_table());
    Ok(())
}

#[derive(Serialize)]
struct SweepOutput {
    sweep: ffp::KSweepReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    test: Option<EvalReport>,
}

fn cmd_sweep(args: SweepArgs, config: &Config) -> CliResult<()> {
    let mode = args.mode.or(config.mode).unwrap_or(Mode::Activation);
    let train_path = require(args.train.or_else(|| config.train.clone()), "train")?;
    let valid_path = require(args.valid.or_else(|| config.valid.clone()), "valid")?;
    let grid = args.k_grid.or_else(|| config.k_grid.clone()).unwrap_or_else(|| DEFAULT_K_GRID.to_vec());
    let a = args.a.or(config.a).unwrap_or(0.8);
    let ranking = args.ranking.map(RankingMode::from).or(config.ranking).unwrap_or_default();
    let n = similarity_params(args.n, config)?;

    let train = load_role(&train_path, mode, Split::Train, None)?;
    let valid = load_role(&valid_path, mode, Split::Validation, None)?;
    let sweep = sweep_k_with(&train, &valid, &grid, a, &n, ranking)?;
    print!("{}", sweep.to_table());

    let test = match args.test.or_else(|| config.test.clone()) {
        Some(path) => {
            let test: Dataset = load_role(&path, mode, Split::Test, None)?;
            let lib = build_library_with(&train, &FuzzifyParams::new(sweep.best_k, a)?, ranking)?;
            let report = evaluate(&lib, &test, &n)?;
            println!("test at K={}:", sweep.best_k);
            print!("{}", report.to_table());
            Some(report)
        }
        None => None,
    };
    if let Some(out) = &args.out {
        write_output(out, &to_json(&SweepOutput { sweep, test }))?;
    }
    Ok(())
}

fn cmd_convert(args: ConvertArgs) -> CliResult<()> {
    let dd = load_dailydialog(&args.input)?;
    let records = dd.to_corpus();
    write_corpus(&args.out, &records)?;
    println!("{} dialogues, {} utterances -> {}", dd.dialogue_count(), records.len(), args.out.display());
    Ok(())
}

fn cmd_inspect(args: InspectArgs) -> CliResult<()> {
    let lib: FingerprintLibrary = load_library(&args.library)?;
    if let Some(label) = &args.label {
        if lib.get(label).is_none() {
            return Err(CliError::Usage(format!("library has no class `{label}`")));
        }
    }
    let mut out = format!(
        "# {} library, K={}, a={}, dimension {}\n",
        lib.feature_space(),
        lib.params().k(),
        fmt_num(lib.params().a()),
        lib.dimension()
    );
    for (label, fp) in lib.classes() {
        if args.label.as_ref().is_some_and(|l| l != label) {
            continue;
        }
        let pairs: Vec<String> =
            fp.entries().iter().map(|e| format!("({},{})", lib.element_name(e.element), fmt_num(e.mu.value()))).collect();
        out.push_str(&format!("FFP_{label} = {{{}}}\n", pairs.join(", ")));
    }
    emit(None, &out)
}

fn cmd_synth(args: SynthArgs, config: &Config) -> CliResult<()> {
    let cfg = SynthConfig {
        classes: args.classes,
        dimension: args.dimension,
        block: args.block,
        noise_std: args.noise,
        train_per_class: args.train_per_class,
        validation_per_class: args.valid_per_class,
        test_per_class: args.test_per_class,
        seed: args.seed.or(config.seed).unwrap_or(0),
        ..SynthConfig::default()
    };
    let records = generate(&cfg)?;
    let metadata = serde_json::json!({ "source": "synthetic", "seed": cfg.seed, "dimension": cfg.dimension, "noise_std": cfg.noise_std });
    write_embeddings(&args.out, Some(&metadata), &records)?;
    println!("{} records (seed {}) -> {}", records.len(), cfg.seed, args.out.display());
    Ok(())
}

