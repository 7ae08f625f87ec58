//! Batch pipeline behind the `vinedag` binary. Every subcommand is a plain
//! function so tests can drive the pipeline without spawning processes.

mod commands;
mod compare;
mod files;

pub use commands::{
    cmd_dissmann, cmd_export_dot, cmd_fit, cmd_learn_dags, cmd_represent, cmd_simulate, DissmannArgs, DotKind,
    ExportDotArgs, FitArgs, FitReport, LearnArgs, LearnReport, LearnedDag, RepresentArgs, RepresentReport,
    SimulateArgs, TreeEdge,
};
pub use compare::{cmd_compare, CompareArgs, CompareReport, CompareRow, KlRow};
pub use files::{read_dataset, read_model, write_model, COPULAS_FILE, INDEPENDENCE_FILE, MATRIX_FILE};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] vinedag::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    File { path: String, source: vinedag::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) | CliError::File { source: e, .. } if e.is_validation() => 2,
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Named random substreams derived from the one user seed.
#[derive(Clone, Copy, Debug)]
pub enum Stream {
    Learning = 1,
    Fitting = 2,
    Simulation = 3,
}

pub fn substream(seed: u64, stream: Stream, index: u64) -> u64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 32) | index);
    rng.next_u64()
}
