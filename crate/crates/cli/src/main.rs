//! `tkgqa` command-line driver.

mod evaluate;
mod generate;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tkgqa::tkg::{parse_facts, Granularity, TemporalKG};

#[derive(Debug, Parser)]
#[command(
    name = "tkgqa",
    version,
    about = "Temporal knowledge graph question-answer datasets"
)]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a split question-answer dataset from a fact file.
    Generate(generate::GenerateArgs),
    /// Print the distribution tables of a dataset.
    Stats(StatsArgs),
    /// Score rankings or cosine baselines against a dataset.
    Evaluate(evaluate::EvaluateArgs),
    /// Print every fact as `<id>\t<sentence>`.
    Verbalize(VerbalizeArgs),
    /// Print the 26-entry Allen relation dictionary as TSV.
    AllenTable(AllenTableArgs),
    /// Recompute the output digests recorded in a run manifest.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Unit {
    Minute,
    Hour,
    Day,
    Week,
    Month,
    Year,
}

impl From<Unit> for Granularity {
    fn from(u: Unit) -> Granularity {
        match u {
            Unit::Minute => Granularity::Minute,
            Unit::Hour => Granularity::Hour,
            Unit::Day => Granularity::Day,
            Unit::Week => Granularity::Week,
            Unit::Month => Granularity::Month,
            Unit::Year => Granularity::Year,
        }
    }
}

#[derive(Debug, clap::Args)]
struct StatsArgs {
    /// Dataset directory or a single JSONL file.
    #[arg(long)]
    qa: PathBuf,
    /// Print the counts as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, clap::Args)]
struct VerbalizeArgs {
    #[arg(long)]
    facts: PathBuf,
    #[arg(long, value_enum, default_value = "year")]
    granularity: Unit,
}

#[derive(Debug, clap::Args)]
struct AllenTableArgs {
    /// Write to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct VerifyArgs {
    /// Directory holding `manifest.json` and the files it lists.
    #[arg(long)]
    out: PathBuf,
}

/// Failure of a subcommand, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unusable input; exit code 2.
    Input(String),
    /// Anything else; exit code 1.
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Internal(m) => m,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn load_facts(path: &std::path::Path, unit: Unit) -> CliResult<TemporalKG> {
    if !path.is_file() {
        return Err(CliError::Input(format!(
            "facts file not found: {}",
            path.display()
        )));
    }
    let kg = parse_facts(path, unit.into())
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    tkgqa::tkg::unify(kg).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn load_pairs(path: &std::path::Path) -> CliResult<Vec<tkgqa::generator::QAPair>> {
    let result = if path.is_dir() {
        tkgqa::generator::read_dataset(path)
    } else if path.is_file() {
        tkgqa::generator::read_jsonl(path)
    } else {
        return Err(CliError::Input(format!(
            "dataset not found: {}",
            path.display()
        )));
    };
    result.map_err(|e| CliError::Input(e.to_string()))
}

fn stats(args: &StatsArgs) -> CliResult<()> {
    let pairs = load_pairs(&args.qa)?;
    let stats = tkgqa::generator::DatasetStats::from_pairs(&pairs);
    if args.json {
        let text =
            serde_json::to_string_pretty(&stats).map_err(|e| CliError::Internal(e.to_string()))?;
        println!("{text}");
    } else {
        print!("{}", stats.render_table());
    }
    Ok(())
}

fn verbalize(args: &VerbalizeArgs) -> CliResult<()> {
    let kg = load_facts(&args.facts, args.granularity)?;
    for f in kg.facts() {
        println!("{}\t{}", f.id, kg.verbalize(f));
    }
    Ok(())
}

fn allen_table(args: &AllenTableArgs) -> CliResult<()> {
    let tsv = tkgqa::algebra::dictionary_tsv();
    match &args.out {
        Some(p) => std::fs::write(p, tsv)
            .map_err(|e| CliError::Input(format!("writing {}: {e}", p.display()))),
        None => {
            print!("{tsv}");
            Ok(())
        }
    }
}

fn verify(args: &VerifyArgs) -> CliResult<()> {
    let mismatches = manifest::verify(&args.out)?;
    if mismatches.is_empty() {
        println!("all digests match");
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "digest mismatch: {}",
            mismatches.join(", ")
        )))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Input("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    pool.build_global()
        .map_err(|e| CliError::Internal(format!("starting worker pool: {e}")))?;
    match &cli.command {
        Command::Generate(a) => generate::run(a),
        Command::Stats(a) => stats(a),
        Command::Evaluate(a) => evaluate::run(a),
        Command::Verbalize(a) => verbalize(a),
        Command::AllenTable(a) => allen_table(a),
        Command::Verify(a) => verify(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
