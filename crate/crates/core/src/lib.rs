//! Sparse DAG models as truncated regular vine copulas.
//!
//! The crate covers graph and DAG primitives, R-vine structures and their
//! matrix encoding, DAG to vine representation, pair-copula fitting and
//! simulation, Gaussian structure learning and a greedy vine selector used
//! as the baseline.

pub mod copula;
pub mod dag;
pub mod data;
pub mod dissmann;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod learning;
pub mod numeric;
pub mod representation;
pub mod vine;

pub use copula::{fit_rvine, Family, FitOptions, PairCopula, RVineModel};
pub use dag::{Dag, TopologicalOrdering};
pub use data::{Dataset, Scale};
pub use dissmann::{dissmann_select, BaselineConfig};
pub use error::{Error, Result};
pub use graph::{DirectedGraph, Node, UndirectedGraph};
pub use learning::{hill_climb_dag, CorrelationMatrix, HillClimbOptions, Sem};
pub use representation::{represent_dag_rvine, HeuristicOptions, Representation};
pub use vine::{IndependenceMatrix, RVineMatrix, VineEdge, VineTreeSequence};
