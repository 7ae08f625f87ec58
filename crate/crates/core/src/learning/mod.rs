//! Gaussian structure learning: scales, SEMs, hill climbing and the
//! correlation matrices implied by DAG and vine models.

mod correlation;
mod hill;
mod scale;
mod sem;
mod vine_corr;

pub use correlation::{empirical_kendall_matrix, kl_divergence, sample_correlation, CorrelationMatrix, PD_TOLERANCE};
pub use hill::{gaussian_bic, hill_climb_dag, HillClimbOptions, HillClimbResult};
pub use scale::{to_u_scale, to_z_scale};
pub use sem::{fit_sem, implied_correlation_dag, Sem, RIDGE};
pub use vine_corr::{implied_correlation_rvine, partial_correlation, vine_from_correlation};
