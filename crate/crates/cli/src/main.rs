use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

mod commands;
mod report;

use report::Format;

/// Exit status for malformed flags or arguments.
const EXIT_USAGE: u8 = 1;
/// Exit status for unreadable or malformed input data.
const EXIT_INPUT: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "orthotensor", version, about = "Structured Tucker decompositions and certificates")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,

    /// Also write the report to this path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (defaults to ORTHOTENSOR_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct OptArgs {
    /// Independent starting points.
    #[arg(long, default_value_t = 20)]
    pub starts: usize,
    /// Iteration cap per start.
    #[arg(long = "max-iter", default_value_t = 2000)]
    pub max_iter: usize,
    /// Riemannian gradient norm tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Structured Tucker decomposition of a tensor file (stdin if omitted).
    Decompose {
        input: Option<PathBuf>,
        #[command(flatten)]
        opt: OptArgs,
        /// Share one orthogonal matrix across modes.
        #[arg(long)]
        sym: bool,
        /// Use a diagonal core instead.
        #[arg(long)]
        odeco: bool,
        /// Write the core tensor here.
        #[arg(long = "core-out")]
        core_out: Option<PathBuf>,
        /// Write each factor as `<prefix>.<k>.tns`.
        #[arg(long = "factors-out")]
        factors_out: Option<PathBuf>,
    },
    /// Relative distance to the structured set, or to the odeco set.
    Distance {
        input: Option<PathBuf>,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long)]
        sym: bool,
        #[arg(long)]
        odeco: bool,
    },
    /// Sample cumulant tensor of a CSV file, written in TNS format.
    Cumulant {
        #[arg(long)]
        order: usize,
        #[arg(long)]
        csv: PathBuf,
        /// Destination of the tensor (stdout if omitted).
        #[arg(long)]
        tensor_out: Option<PathBuf>,
    },
    /// Residual of a candidate singular vector tuple.
    Verify {
        input: PathBuf,
        /// Vectors separated by `;`, entries by `,`.
        #[arg(long, conflicts_with = "vectors_file")]
        vectors: Option<String>,
        /// One vector per line, entries separated by commas or spaces.
        #[arg(long = "vectors-file")]
        vectors_file: Option<PathBuf>,
    },
    /// The matrix M_Q for binary tensors.
    Mq {
        /// 2×2 factors in row-major order, `a,b,c,d`, one per mode.
        #[arg(long = "q", num_args = 1.., allow_hyphen_values = true)]
        q: Vec<String>,
        /// Signed-permutation tuple from a binary string, `1` for the swap.
        #[arg(long, conflicts_with = "q")]
        swaps: Option<String>,
    },
    /// Membership value for a binary symmetric tensor.
    Member2d {
        #[arg(long)]
        d: usize,
        /// Coordinates t_0,…,t_d.
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        /// Exact rational arithmetic.
        #[arg(long)]
        exact: bool,
        /// Operation cap for exact arithmetic.
        #[arg(long, default_value_t = orthotensor::variety::DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Forced-zero index set of a shape.
    Pattern {
        #[arg(long, num_args = 1.., required = true)]
        shape: Vec<usize>,
        #[arg(long)]
        sym: bool,
        #[arg(long, conflicts_with = "sym")]
        odeco: bool,
    },
    /// Random tensor Q·S with a known structured core.
    Gen {
        #[arg(long, num_args = 1.., required = true)]
        shape: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        sym: bool,
        /// Destination of the tensor (stdout if omitted).
        #[arg(long)]
        tensor_out: Option<PathBuf>,
        /// Write the core tensor here.
        #[arg(long = "core-out")]
        core_out: Option<PathBuf>,
    },
    /// Predicted dimension against a Jacobian rank.
    DimCheck {
        #[arg(long, num_args = 1.., required = true)]
        shape: Vec<usize>,
        #[arg(long)]
        sym: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Ranks of M_Q over signed permutations for orders 4 to 8.
    CodimTable {
        #[arg(long)]
        d: Option<usize>,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    /// An input failure attributed to `source`.
    pub fn from_input(source: &str, err: orthotensor::Error) -> Self {
        CliError::input(format!("{source}: {err}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn source_name(path: Option<&Path>) -> String {
    path.map_or_else(|| "<stdin>".to_string(), |p| p.display().to_string())
}

pub fn read_input(path: Option<&Path>) -> CliResult<String> {
    let name = source_name(path);
    let mut text = String::new();
    match path {
        Some(p) => {
            text = std::fs::read_to_string(p).map_err(|e| CliError::input(format!("{name}: {e}")))?;
        }
        None => {
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| CliError::input(format!("{name}: {e}")))?;
        }
    }
    Ok(text)
}

fn configure_threads(flag: Option<usize>) -> CliResult<()> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var("ORTHOTENSOR_THREADS") {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::usage(format!("ORTHOTENSOR_THREADS: invalid thread count {v:?}")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::usage("--threads: must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("--threads: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads(cli.threads)?;
    let start = Instant::now();
    let (mut report, payload) = commands::dispatch(cli.command)?;
    report.set_wall_time(start.elapsed());
    let text = report.render(cli.format);
    if let Some(path) = &cli.out {
        std::fs::write(path, &text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    }
    match payload {
        Some(data) => print!("{data}"),
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
