//! Regular vine tree sequences and their matrix encoding.

mod completion;
mod matrix;
mod structure;

pub use completion::{complete, complete_with_diagonal, diagonal_compatible, search_diagonal, SearchOutcome};
pub use matrix::{check_aligned, validate_matrix, IndependenceMatrix, MatrixDiagnostics, RVineMatrix};
pub use structure::{proximity, EdgeLabel, VineEdge, VineTreeSequence};
