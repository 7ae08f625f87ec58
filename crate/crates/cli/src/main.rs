use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vinedag::copula::{parse_families, Family};
use vinedag::Scale;
use vinedag_cli::{
    cmd_compare, cmd_dissmann, cmd_export_dot, cmd_fit, cmd_learn_dags, cmd_represent, cmd_simulate, CliError,
    CliResult, CompareArgs, DissmannArgs, DotKind, ExportDotArgs, FitArgs, LearnArgs, RepresentArgs, SimulateArgs,
};

#[derive(Parser)]
#[command(name = "vinedag", version, about = "Sparse DAG models as truncated R-vine copulas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    X,
    U,
    Z,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::X => Scale::X,
            ScaleArg::U => Scale::U,
            ScaleArg::Z => Scale::Z,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Auto,
    Dag,
    Graph,
    Vine,
}

#[derive(Args)]
struct DataOpts {
    /// Data CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Scale of the data; detected when omitted (all values in (0,1) means u).
    #[arg(long, value_enum)]
    scale: Option<ScaleArg>,
}

#[derive(Args)]
struct CopulaOpts {
    /// Comma-separated families or "all".
    #[arg(long, default_value = "all")]
    families: String,
    /// Level of the Kendall's tau independence pre-test.
    #[arg(long)]
    alpha: Option<f64>,
    /// Force trees above this level to independence.
    #[arg(long)]
    truncate: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Hill-climb one DAG per parent cap 1..=k.
    LearnDags {
        #[command(flatten)]
        data: DataOpts,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long)]
        out: PathBuf,
        /// Include wall-clock seconds in the report.
        #[arg(long)]
        timings: bool,
    },
    /// Build a sparse R-vine from nested DAG edge lists.
    Represent {
        /// DAG files ordered by parent cap, comma-separated or repeated.
        #[arg(long, required = true, value_delimiter = ',', num_args = 1..)]
        input: Vec<PathBuf>,
        /// Weights g(1),...,g(k), e.g. "1,1,1".
        #[arg(long, value_delimiter = ',')]
        g: Option<Vec<f64>>,
        #[arg(long)]
        mu0: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit pair copulas on a given R-vine matrix.
    Fit {
        #[command(flatten)]
        data: DataOpts,
        #[arg(long)]
        matrix: PathBuf,
        /// Independence matrix; all ones when omitted.
        #[arg(long)]
        independence: Option<PathBuf>,
        #[command(flatten)]
        copula: CopulaOpts,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        timings: bool,
    },
    /// Draw from a fitted model directory.
    Simulate {
        /// Model directory holding matrix.txt, independence.txt, copulas.txt.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// DAG-based pipeline against the greedy baseline on one dataset.
    Compare {
        #[command(flatten)]
        data: DataOpts,
        #[arg(long)]
        k: usize,
        #[arg(long, value_delimiter = ',')]
        g: Option<Vec<f64>>,
        #[arg(long)]
        mu0: Option<f64>,
        #[command(flatten)]
        copula: CopulaOpts,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        timings: bool,
    },
    /// Greedy tree-by-tree selection on |tau|.
    Dissmann {
        #[command(flatten)]
        data: DataOpts,
        #[command(flatten)]
        copula: CopulaOpts,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        timings: bool,
    },
    /// Graphviz output for an edge list or R-vine matrix.
    ExportDot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        kind: KindArg,
        /// Color arrows into v-structure colliders.
        #[arg(long)]
        highlight: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

fn families(s: &str) -> CliResult<Vec<Family>> {
    Ok(parse_families(s)?)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::LearnDags { data, k, seed, restarts, out, timings } => {
            let r = cmd_learn_dags(&LearnArgs { input: data.input, k, seed, restarts, scale: data.scale.map(Into::into), out: out.clone(), timings })?;
            for dag in &r.dags {
                println!("k={} arrows={} bic={:.3} -> {}", dag.max_parents, dag.arrows, dag.bic, out.join(&dag.file).display());
            }
        }
        Command::Represent { input, g, mu0, out } => {
            let r = cmd_represent(&RepresentArgs { inputs: input, g, mu0, out })?;
            println!("truncation level {} (lower bound {})", r.truncation_level, r.lower_bound);
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Fit { data, matrix, independence, copula, out, timings } => {
            let r = cmd_fit(&FitArgs {
                input: data.input,
                matrix,
                independence,
                families: families(&copula.families)?,
                alpha: copula.alpha,
                truncate: copula.truncate,
                scale: data.scale.map(Into::into),
                out,
                timings,
            })?;
            println!("loglik {:.4}  AIC {:.4}  BIC {:.4}  params {}  k' {}", r.loglik, r.aic, r.bic, r.n_params, r.truncation_level);
        }
        Command::Simulate { input, n, seed, out } => {
            cmd_simulate(&SimulateArgs { input, n, seed, out })?;
        }
        Command::Compare { data, k, g, mu0, copula, seed, restarts, out, timings } => {
            let r = cmd_compare(&CompareArgs {
                input: data.input,
                k,
                g,
                mu0,
                families: families(&copula.families)?,
                alpha: copula.alpha,
                truncate: copula.truncate,
                seed,
                restarts,
                scale: data.scale.map(Into::into),
                out,
                timings,
            })?;
            print!("{}", r.table());
        }
        Command::Dissmann { data, copula, out, timings } => {
            let r = cmd_dissmann(&DissmannArgs {
                input: data.input,
                families: families(&copula.families)?,
                alpha: copula.alpha,
                truncate: copula.truncate,
                scale: data.scale.map(Into::into),
                out,
                timings,
            })?;
            println!("loglik {:.4}  AIC {:.4}  BIC {:.4}  params {}  k' {}", r.loglik, r.aic, r.bic, r.n_params, r.truncation_level);
        }
        Command::ExportDot { input, kind, highlight, out } => {
            let kind = match kind {
                KindArg::Auto => DotKind::Auto,
                KindArg::Dag => DotKind::Dag,
                KindArg::Graph => DotKind::Graph,
                KindArg::Vine => DotKind::Vine,
            };
            cmd_export_dot(&ExportDotArgs { input, kind, highlight, out })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_byte(&e))
        }
    }
}

fn exit_byte(e: &CliError) -> u8 {
    e.exit_code() as u8
}
