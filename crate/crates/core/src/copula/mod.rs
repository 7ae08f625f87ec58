//! Pair-copula families, fitting and R-vine copula models.

mod family;
mod fit;
mod kendall;
mod vine;

pub use family::{parse_families, Family, PairCopula, EPS};
pub use fit::{fit_pair, FitOptions, PairFit, NU_GRID};
pub use kendall::{independence_statistic, independence_test, kendall_tau};
pub use vine::{fit_rvine, RVineModel};

pub(crate) use fit::fit_pair_with_tau;
pub(crate) use vine::{copula_scale, PseudoObs};
