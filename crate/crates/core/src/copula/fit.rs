use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::family::{clamp, frank_theta, gaussian_log_density, t_log_constant, t_log_density_with, Family, PairCopula};
use super::kendall::{check_alpha, kendall_tau, reject_independence};
use crate::error::{Error, Result};
use crate::numeric::{golden_section_max, norm_quantile};

/// Degrees-of-freedom grid profiled for the Student-t family.
pub const NU_GRID: [f64; 29] = [
    2.5, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.0, 15.0, 16.0, 17.0, 18.0,
    19.0, 20.0, 21.0, 22.0, 23.0, 24.0, 25.0, 26.0, 27.0, 28.0, 29.0, 30.0,
];

const TAU_HALF_WIDTH: f64 = 0.15;
const TOL: f64 = 1e-6;
const RHO_MAX: f64 = 0.9999;
const CLAYTON_MAX: f64 = 28.0;
const GUMBEL_MAX: f64 = 17.0;
const FRANK_MAX: f64 = 35.0;

/// Family set and optional independence pre-test for pair fitting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub families: Vec<Family>,
    /// Level of the Kendall's tau independence test; `None` skips it.
    pub alpha: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { families: Family::ALL.to_vec(), alpha: None }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() {
            return Err(Error::invalid("no copula families allowed"));
        }
        if let Some(a) = self.alpha {
            check_alpha(a)?;
        }
        Ok(())
    }
}

/// Selected copula with its fit statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct PairFit {
    pub copula: PairCopula,
    pub loglik: f64,
    pub tau: f64,
}

impl PairFit {
    pub fn aic(&self) -> f64 {
        -2.0 * self.loglik + 2.0 * self.copula.n_params() as f64
    }
}

/// Fits a pair copula to `(u, v)` and picks the family with the smallest AIC.
pub fn fit_pair(u: &[f64], v: &[f64], opts: &FitOptions) -> Result<PairFit> {
    opts.validate()?;
    if u.len() != v.len() {
        return Err(Error::invalid(format!("samples of length {} and {}", u.len(), v.len())));
    }
    if u.len() < 10 {
        return Err(Error::invalid(format!("pair fitting needs n >= 10, got {}", u.len())));
    }
    let tau = kendall_tau(u, v)?;
    fit_pair_with_tau(u, v, tau, opts)
}

pub(crate) fn fit_pair_with_tau(u: &[f64], v: &[f64], tau: f64, opts: &FitOptions) -> Result<PairFit> {
    let indep = PairFit { copula: PairCopula::independence(), loglik: 0.0, tau };
    if let Some(alpha) = opts.alpha {
        if !reject_independence(tau, u.len(), alpha) {
            return Ok(indep);
        }
    }
    if tau.abs() > 0.95 {
        warn!("|tau| = {:.3}; parameters will sit at their bounds", tau.abs());
    }
    let u: Vec<f64> = u.iter().map(|&x| clamp(x)).collect();
    let v: Vec<f64> = v.iter().map(|&x| clamp(x)).collect();
    let mut best: Option<PairFit> = None;
    for &family in &opts.families {
        let fits = match family {
            Family::Independence => vec![indep.clone()],
            Family::Gaussian => vec![fit_gaussian(&u, &v, tau)],
            Family::StudentT => vec![fit_student(&u, &v, tau)],
            Family::Frank => vec![fit_frank(&u, &v, tau)],
            Family::Clayton | Family::Gumbel => {
                let rots: [u16; 2] = if tau >= 0.0 { [0, 180] } else { [90, 270] };
                rots.iter().map(|&r| fit_archimedean(&u, &v, tau, family, r)).collect()
            }
        };
        for f in fits {
            let f = PairFit { tau, ..f };
            if best.as_ref().is_none_or(|b| f.aic() < b.aic()) {
                best = Some(f);
            }
        }
    }
    Ok(best.expect("at least one family"))
}

fn tau_bracket(tau: f64, lo: f64, hi: f64) -> (f64, f64) {
    ((tau - TAU_HALF_WIDTH).clamp(lo, hi), (tau + TAU_HALF_WIDTH).clamp(lo, hi))
}

fn loglik_of(c: &PairCopula, u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(&a, &b)| c.log_density(a, b)).sum()
}

fn fit_gaussian(u: &[f64], v: &[f64], tau: f64) -> PairFit {
    let x: Vec<f64> = u.iter().map(|&p| norm_quantile(p)).collect();
    let y: Vec<f64> = v.iter().map(|&p| norm_quantile(p)).collect();
    let n = x.len() as f64;
    let sq: f64 = x.iter().zip(&y).map(|(a, b)| a * a + b * b).sum();
    let cross: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    // the log-likelihood only depends on two sums
    let ll = |rho: f64| {
        let r2 = 1.0 - rho * rho;
        -0.5 * n * r2.ln() - (rho * rho * sq - 2.0 * rho * cross) / (2.0 * r2)
    };
    let (lo, hi) = tau_bracket(tau, -0.999, 0.999);
    let rho_lo = (PI / 2.0 * lo).sin().clamp(-RHO_MAX, RHO_MAX);
    let rho_hi = (PI / 2.0 * hi).sin().clamp(-RHO_MAX, RHO_MAX);
    let (rho, loglik) = golden_section_max(ll, rho_lo, rho_hi, TOL);
    debug_assert!((loglik - x.iter().zip(&y).map(|(&a, &b)| gaussian_log_density(rho, a, b)).sum::<f64>()).abs() < 1e-6 * n);
    PairFit { copula: PairCopula::gaussian(rho).expect("bounded"), loglik, tau }
}

fn fit_student(u: &[f64], v: &[f64], tau: f64) -> PairFit {
    let (lo, hi) = tau_bracket(tau, -0.999, 0.999);
    let rho_lo = (PI / 2.0 * lo).sin().clamp(-RHO_MAX, RHO_MAX);
    let rho_hi = (PI / 2.0 * hi).sin().clamp(-RHO_MAX, RHO_MAX);
    let mut best = (f64::NEG_INFINITY, 0.0, NU_GRID[0]);
    for &nu in &NU_GRID {
        let t = StudentsT::new(0.0, 1.0, nu).expect("nu > 2");
        let x: Vec<f64> = u.iter().map(|&p| t.inverse_cdf(p)).collect();
        let y: Vec<f64> = v.iter().map(|&p| t.inverse_cdf(p)).collect();
        let c2 = t_log_constant(nu);
        let ll = |rho: f64| x.iter().zip(&y).map(|(&a, &b)| t_log_density_with(c2, rho, nu, a, b)).sum::<f64>();
        let (rho, l) = golden_section_max(ll, rho_lo, rho_hi, 1e-5);
        if l > best.0 {
            best = (l, rho, nu);
        }
    }
    let (loglik, rho, nu) = best;
    let copula = PairCopula::new(Family::StudentT, vec![rho, nu], 0).expect("bounded");
    PairFit { copula, loglik, tau }
}

fn fit_frank(u: &[f64], v: &[f64], tau: f64) -> PairFit {
    let (lo, hi) = tau_bracket(tau, -0.9, 0.9);
    let (th_lo, th_hi) = (frank_theta(lo).max(-FRANK_MAX), frank_theta(hi).min(FRANK_MAX));
    let make = |th: f64| {
        // theta = 0 is the independence copula, kept off the parameter domain
        let th = if th.abs() < 1e-6 { 1e-6f64.copysign(th) } else { th };
        PairCopula::new(Family::Frank, vec![th], 0).expect("bounded")
    };
    let (th, loglik) = golden_section_max(|th| loglik_of(&make(th), u, v), th_lo, th_hi, TOL);
    PairFit { copula: make(th), loglik, tau }
}

fn fit_archimedean(u: &[f64], v: &[f64], tau: f64, family: Family, rotation: u16) -> PairFit {
    let (lo, hi) = tau_bracket(tau.abs(), 0.0, 0.99);
    let (th_lo, th_hi) = match family {
        Family::Clayton => ((2.0 * lo / (1.0 - lo)).max(1e-4), (2.0 * hi / (1.0 - hi)).min(CLAYTON_MAX)),
        _ => (1.0 / (1.0 - lo), (1.0 / (1.0 - hi)).min(GUMBEL_MAX)),
    };
    let th_lo = th_lo.min(th_hi);
    let make = |th: f64| PairCopula::new(family, vec![th], rotation).expect("bounded");
    let (th, loglik) = golden_section_max(|th| loglik_of(&make(th), u, v), th_lo, th_hi, TOL);
    PairFit { copula: make(th), loglik, tau }
}
