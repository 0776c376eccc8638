mod cache;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qgw_core::jfunction::JConvention;

use output::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qgw_core::Error),
    #[error("engines disagree: {0}")]
    Mismatch(String),
    #[error("cache conflict: {0}")]
    Conflict(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use qgw_core::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(
                E::Parse { .. } | E::UnstableKey(_) | E::InvalidArgument(_) | E::DimensionMismatch { .. },
            ) => 1,
            CliError::Core(_) | CliError::Io(_) => 2,
            CliError::Mismatch(_) | CliError::Conflict(_) => 3,
        }
    }
}

/// Exact genus-0 Gromov-Witten and quantum K-invariants of projective spaces.
#[derive(Debug, Parser)]
#[command(name = "qgw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// 1-point quantum K-invariants (tau_k(class))_{0,1,d} for k = 0..=order.
    Jk(JkArgs),
    /// Evaluate a quantum K-invariant, e.g. "(L^2*e1, e1) @ d=1".
    Qk(QkArgs),
    /// Gromov-Witten invariants: the plane-curve table or a single invariant.
    Gw(GwArgs),
    /// Inspect or re-verify a cache file.
    Cache(CacheArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Convention {
    #[default]
    Standard,
    Geometric,
}

impl From<Convention> for JConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Standard => JConvention::Standard,
            Convention::Geometric => JConvention::Geometric,
        }
    }
}

#[derive(Debug, Args)]
struct JkArgs {
    #[arg(long, default_value_t = 1)]
    r: u32,
    #[arg(long)]
    d: u32,
    #[arg(long, default_value_t = 2)]
    order: u32,
    #[arg(long, default_value = "e0", allow_hyphen_values = true)]
    class: String,
    #[arg(long, value_enum, default_value_t)]
    convention: Convention,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Debug, Args)]
struct CacheOpts {
    /// Cache file; values are recomputed and checked against it, then merged in.
    #[arg(long, env = "QGW_CACHE")]
    cache: Option<PathBuf>,
    #[arg(long)]
    no_cache: bool,
}

impl CacheOpts {
    fn cache(&self) -> Option<cache::Cache> {
        match (&self.cache, self.no_cache) {
            (Some(p), false) => Some(cache::Cache::new(p)),
            _ => None,
        }
    }
}

#[derive(Debug, Args)]
struct QkArgs {
    expr: String,
    #[arg(long, default_value_t = 1)]
    r: u32,
    #[arg(long, value_enum, default_value_t)]
    convention: Convention,
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[command(flatten)]
    cache: CacheOpts,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Engine {
    Closed,
    Reduction,
    #[default]
    Both,
}

#[derive(Debug, Args)]
struct GwArgs {
    expr: Option<String>,
    /// Print N_1..N_D, the numbers of rational plane curves through 3d-1 points.
    #[arg(long, value_name = "D", conflicts_with = "expr")]
    p2_table: Option<u32>,
    #[arg(long, default_value_t = 2)]
    r: u32,
    /// 1-point descendant data (JSON); needed only when a reduction reaches a 1-point term.
    #[arg(long)]
    oracle: Option<PathBuf>,
    #[arg(long, value_enum)]
    engine: Option<Engine>,
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[command(flatten)]
    cache: CacheOpts,
}

#[derive(Debug, Args)]
struct CacheArgs {
    #[command(subcommand)]
    action: CacheAction,
}

#[derive(Debug, Subcommand)]
enum CacheAction {
    /// Print the stored entries.
    Show {
        #[arg(long, env = "QGW_CACHE")]
        cache: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Recompute every stored entry and compare.
    Verify {
        #[arg(long, env = "QGW_CACHE")]
        cache: PathBuf,
        #[arg(long)]
        oracle: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Jk(a) => commands::jk(&mut out, &a),
        Command::Qk(a) => commands::qk(&mut out, &a),
        Command::Gw(a) => commands::gw(&mut out, &a),
        Command::Cache(CacheArgs { action: CacheAction::Show { cache, format } }) => {
            commands::cache_show(&mut out, &cache, format)
        }
        Command::Cache(CacheArgs { action: CacheAction::Verify { cache, oracle } }) => {
            commands::cache_verify(&mut out, &cache, oracle.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    // reductions recurse once per rewrite; give them room
    let worker = std::thread::Builder::new().stack_size(1 << 28).spawn(move || run(cli));
    let result = worker.expect("spawn evaluation thread").join().expect("evaluation thread panicked");
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
