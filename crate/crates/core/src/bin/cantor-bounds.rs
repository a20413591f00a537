use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cantor_bounds::commands::{cmd_lower, cmd_naive, cmd_report, cmd_upper, persist, resolve_upper, ReportFormat, UpperSource};
use cantor_bounds::lattice::DEFAULT_ENUM_BUDGET;
use cantor_bounds::lower::{LowerOptions, Seed};
use cantor_bounds::record::cache_dir;
use cantor_bounds::upper::{HistogramStrategy, UpperOptions};
use cantor_bounds::Error;

#[derive(Parser)]
#[command(name = "cantor-bounds", version, about = "Certified bounds on the Hausdorff measure of C^d")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Largest enumeration allowed (lattice points or graph vertices).
    #[arg(long, global = true, default_value_t = DEFAULT_ENUM_BUDGET)]
    max_enum: u64,

    /// Cache directory; overrides CANTOR_BOUNDS_DIR.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Skip writing the run record.
    #[arg(long, global = true)]
    no_cache: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Enumerate,
    Convolve,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Plot,
}

#[derive(Subcommand)]
enum Command {
    /// Upper bound from the centred-ball sweep.
    Upper {
        #[arg(long)]
        dim: u32,
        #[arg(long)]
        depth: u32,
        #[arg(long, value_enum, default_value = "enumerate")]
        strategy: Strategy,
    },
    /// Lower bound from the diameter refinement.
    Lower {
        #[arg(long)]
        dim: u32,
        #[arg(long)]
        depth: u32,
        /// `auto` or a numeric upper bound on the measure.
        #[arg(long, default_value = "auto")]
        upper_bound: String,
        /// Starting diameter: `5/9` or `1/3`.
        #[arg(long, default_value = "5/9")]
        seed: String,
        /// Recheck the published three-dimensional chain step by step.
        #[arg(long)]
        replay: bool,
    },
    /// Table of the cover-by-cube bound for d = 1..d_max.
    Naive {
        #[arg(long, default_value_t = 6)]
        d_max: u32,
    },
    /// Combine cached runs into a table or plot series.
    Report {
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Output directory (default: the cache directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } => 2,
        Error::ReplayFailed { .. } => 3,
        Error::EmptyCache(_) => 4,
        _ => 1,
    }
}

fn parse_seed(s: &str) -> Result<Seed, Error> {
    match s.trim() {
        "5/9" => Ok(Seed::FiveNinths),
        "1/3" => Ok(Seed::OneThird),
        other => Err(Error::InvalidArgument(format!("seed must be 5/9 or 1/3, got {other}"))),
    }
}

fn parse_upper(s: &str) -> Result<UpperSource, Error> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(UpperSource::Auto);
    }
    s.parse::<f64>()
        .map(UpperSource::Value)
        .map_err(|_| Error::InvalidArgument(format!("--upper-bound takes a number or auto, got {s}")))
}

fn run(cli: Cli) -> Result<(), Error> {
    let cache = cli.cache_dir.clone().unwrap_or_else(cache_dir);
    let store = |record: &cantor_bounds::record::RunRecord| -> Result<(), Error> {
        if !cli.no_cache {
            let path = persist(&cache, record)?;
            eprintln!("wrote {}", path.display());
        }
        Ok(())
    };
    match cli.command {
        Command::Upper { dim, depth, strategy } => {
            let strategy = match strategy {
                Strategy::Enumerate => HistogramStrategy::Enumerate,
                Strategy::Convolve => HistogramStrategy::Convolve,
            };
            let out = cmd_upper(dim, depth, &UpperOptions { budget: cli.max_enum, strategy })?;
            print!("{}", out.text);
            store(&out.record)
        }
        Command::Lower { dim, depth, ref upper_bound, ref seed, replay } => {
            let seed = parse_seed(seed)?;
            let source = parse_upper(upper_bound)?;
            let upper = resolve_upper(dim, &source, &cache, cli.max_enum)?;
            let opts = LowerOptions { seed, vertex_budget: cli.max_enum.min(1 << 16), ..Default::default() };
            let out = cmd_lower(dim, depth, &upper, seed, replay, &opts)?;
            print!("{}", out.outcome.text);
            store(&out.outcome.record)?;
            match out.failure {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Command::Naive { d_max } => {
            let out = cmd_naive(d_max)?;
            print!("{}", out.text);
            store(&out.record)
        }
        Command::Report { format, ref out } => {
            let format = match format {
                Format::Csv => ReportFormat::Csv,
                Format::Json => ReportFormat::Json,
                Format::Plot => ReportFormat::Plot,
            };
            let out = out.clone().unwrap_or_else(|| cache.clone());
            let (_, text) = cmd_report(&cache, &out, format)?;
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
