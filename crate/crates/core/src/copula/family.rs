use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numeric::{bisect, debye1, integrate, norm_cdf, norm_quantile};

/// Inputs are clamped into `[EPS, 1 - EPS]` before evaluation.
pub const EPS: f64 = 1e-10;

pub(crate) fn clamp(u: f64) -> f64 {
    u.clamp(EPS, 1.0 - EPS)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Independence,
    Gaussian,
    Clayton,
    Gumbel,
    Frank,
    #[serde(rename = "t")]
    StudentT,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Independence,
        Family::Gaussian,
        Family::Clayton,
        Family::Gumbel,
        Family::Frank,
        Family::StudentT,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Independence => "indep",
            Family::Gaussian => "gaussian",
            Family::Clayton => "clayton",
            Family::Gumbel => "gumbel",
            Family::Frank => "frank",
            Family::StudentT => "t",
        }
    }

    pub fn n_params(self) -> usize {
        match self {
            Family::Independence => 0,
            Family::StudentT => 2,
            _ => 1,
        }
    }

    /// Clayton and Gumbel only cover positive dependence unrotated.
    pub fn is_rotatable(self) -> bool {
        matches!(self, Family::Clayton | Family::Gumbel)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "indep" | "independence" | "i" => Family::Independence,
            "gaussian" | "normal" | "n" => Family::Gaussian,
            "clayton" | "c" => Family::Clayton,
            "gumbel" | "g" => Family::Gumbel,
            "frank" | "f" => Family::Frank,
            "t" | "student" | "student-t" => Family::StudentT,
            other => return Err(Error::invalid(format!("unknown copula family '{other}'"))),
        })
    }
}

/// Parses a comma-separated family list such as `"gaussian,clayton"`.
/// `"all"` selects every family.
pub fn parse_families(list: &str) -> Result<Vec<Family>> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(Family::ALL.to_vec());
    }
    let mut out: Vec<Family> = Vec::new();
    for part in list.split(',').filter(|p| !p.trim().is_empty()) {
        let f: Family = part.parse()?;
        if !out.contains(&f) {
            out.push(f);
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("empty family list"));
    }
    out.sort();
    Ok(out)
}

/// A bivariate copula `C(u, v)`. Parameters: Gaussian `[rho]`, Clayton,
/// Gumbel and Frank `[theta]`, Student-t `[rho, nu]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCopula {
    family: Family,
    params: Vec<f64>,
    rotation: u16,
}

impl PairCopula {
    pub fn new(family: Family, params: Vec<f64>, rotation: u16) -> Result<Self> {
        if params.len() != family.n_params() {
            return Err(Error::InvalidParameter(format!(
                "{family} takes {} parameter(s), got {}",
                family.n_params(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(format!("{family} parameters must be finite")));
        }
        if !matches!(rotation, 0 | 90 | 180 | 270) {
            return Err(Error::InvalidParameter(format!("rotation {rotation} is not 0/90/180/270")));
        }
        if rotation != 0 && !family.is_rotatable() {
            return Err(Error::InvalidParameter(format!("{family} copula cannot be rotated")));
        }
        let ok = match family {
            Family::Independence => true,
            Family::Gaussian => params[0].abs() < 1.0,
            Family::Clayton => params[0] > 0.0,
            Family::Gumbel => params[0] >= 1.0,
            Family::Frank => params[0] != 0.0,
            Family::StudentT => params[0].abs() < 1.0 && params[1] > 2.0,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!("{family} parameters {params:?} out of range")));
        }
        Ok(PairCopula { family, params, rotation })
    }

    pub fn independence() -> Self {
        PairCopula { family: Family::Independence, params: Vec::new(), rotation: 0 }
    }

    pub fn gaussian(rho: f64) -> Result<Self> {
        PairCopula::new(Family::Gaussian, vec![rho], 0)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn rotation(&self) -> u16 {
        self.rotation
    }

    pub fn n_params(&self) -> usize {
        self.family.n_params()
    }

    pub fn is_independence(&self) -> bool {
        self.family == Family::Independence
    }

    /// The copula of `(V, U)`.
    pub fn transposed(&self) -> Self {
        let rotation = match self.rotation {
            90 => 270,
            270 => 90,
            r => r,
        };
        PairCopula { rotation, ..self.clone() }
    }

    /// Kendall's tau implied by the parameters.
    pub fn tau(&self) -> f64 {
        let t = match self.family {
            Family::Independence => 0.0,
            Family::Gaussian | Family::StudentT => 2.0 / PI * self.params[0].asin(),
            Family::Clayton => {
                let th = self.params[0];
                th / (th + 2.0)
            }
            Family::Gumbel => 1.0 - 1.0 / self.params[0],
            Family::Frank => frank_tau(self.params[0]),
        };
        if matches!(self.rotation, 90 | 270) {
            -t
        } else {
            t
        }
    }

    fn base(&self) -> Base {
        match self.family {
            Family::Independence => Base::Indep,
            Family::Gaussian => Base::Gaussian(self.params[0]),
            Family::Clayton => Base::Clayton(self.params[0]),
            Family::Gumbel => Base::Gumbel(self.params[0]),
            Family::Frank => Base::Frank(self.params[0]),
            Family::StudentT => Base::StudentT(self.params[0], self.params[1]),
        }
    }

    /// Copula density; exactly 1 for the independence copula.
    pub fn density(&self, u: f64, v: f64) -> f64 {
        self.log_density(u, v).exp()
    }

    pub fn log_density(&self, u: f64, v: f64) -> f64 {
        if self.is_independence() {
            return 0.0;
        }
        let (u, v) = (clamp(u), clamp(v));
        let (u, v) = match self.rotation {
            90 => (1.0 - u, v),
            180 => (1.0 - u, 1.0 - v),
            270 => (u, 1.0 - v),
            _ => (u, v),
        };
        self.base().log_density(u, v)
    }

    /// `h(u | v) = dC(u, v) / dv`, the distribution of `U` given `V = v`.
    pub fn h1(&self, u: f64, v: f64) -> f64 {
        if self.is_independence() {
            return u;
        }
        let (u, v) = (clamp(u), clamp(v));
        let b = self.base();
        clamp(match self.rotation {
            90 => 1.0 - b.h(1.0 - u, v),
            180 => 1.0 - b.h(1.0 - u, 1.0 - v),
            270 => b.h(u, 1.0 - v),
            _ => b.h(u, v),
        })
    }

    /// `dC(u, v) / du`, the distribution of `V` given `U = u`.
    pub fn h2(&self, u: f64, v: f64) -> f64 {
        if self.is_independence() {
            return v;
        }
        let (u, v) = (clamp(u), clamp(v));
        let b = self.base();
        clamp(match self.rotation {
            90 => b.h(v, 1.0 - u),
            180 => 1.0 - b.h(1.0 - v, 1.0 - u),
            270 => 1.0 - b.h(1.0 - v, u),
            _ => b.h(v, u),
        })
    }

    /// Solves `h1(u, v) = w` for `u`.
    pub fn h1_inverse(&self, w: f64, v: f64) -> f64 {
        if self.is_independence() {
            return w;
        }
        let (w, v) = (clamp(w), clamp(v));
        let b = self.base();
        clamp(match self.rotation {
            90 => 1.0 - b.h_inverse(1.0 - w, v),
            180 => 1.0 - b.h_inverse(1.0 - w, 1.0 - v),
            270 => b.h_inverse(w, 1.0 - v),
            _ => b.h_inverse(w, v),
        })
    }

    /// Solves `h2(u, v) = w` for `v`.
    pub fn h2_inverse(&self, w: f64, u: f64) -> f64 {
        if self.is_independence() {
            return w;
        }
        let (w, u) = (clamp(w), clamp(u));
        let b = self.base();
        clamp(match self.rotation {
            90 => b.h_inverse(w, 1.0 - u),
            180 => 1.0 - b.h_inverse(1.0 - w, 1.0 - u),
            270 => 1.0 - b.h_inverse(1.0 - w, u),
            _ => b.h_inverse(w, u),
        })
    }

    /// Copula distribution function. Student-t has no closed form and is
    /// integrated numerically from the conditional distribution.
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        if self.is_independence() {
            return u * v;
        }
        let (u, v) = (clamp(u), clamp(v));
        let b = self.base();
        match self.rotation {
            90 => v - b.cdf(1.0 - u, v),
            180 => u + v - 1.0 + b.cdf(1.0 - u, 1.0 - v),
            270 => u - b.cdf(u, 1.0 - v),
            _ => b.cdf(u, v),
        }
    }
}

impl fmt::Display for PairCopula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        if self.rotation != 0 {
            write!(f, "{}", self.rotation)?;
        }
        if !self.params.is_empty() {
            let ps: Vec<String> = self.params.iter().map(|p| format!("{p:.4}")).collect();
            write!(f, "({})", ps.join(", "))?;
        }
        Ok(())
    }
}

/// Unrotated families; all are exchangeable, so `dC/du (u, v) = h(v, u)`.
#[derive(Clone, Copy, Debug)]
enum Base {
    Indep,
    Gaussian(f64),
    Clayton(f64),
    Gumbel(f64),
    Frank(f64),
    StudentT(f64, f64),
}

impl Base {
    fn log_density(self, u: f64, v: f64) -> f64 {
        match self {
            Base::Indep => 0.0,
            Base::Gaussian(rho) => gaussian_log_density(rho, norm_quantile(u), norm_quantile(v)),
            Base::Clayton(th) => {
                let (lu, lv) = (u.ln(), v.ln());
                let a = ((-th * lu).exp() + (-th * lv).exp() - 1.0).ln();
                (1.0 + th).ln() - (1.0 + th) * (lu + lv) - (2.0 + 1.0 / th) * a
            }
            Base::Gumbel(th) => {
                let (x, y) = (-u.ln(), -v.ln());
                let a = x.powf(th) + y.powf(th);
                let s = a.powf(1.0 / th);
                -s + x + y + (th - 1.0) * (x.ln() + y.ln()) + (2.0 / th - 2.0) * a.ln()
                    + (1.0 + (th - 1.0) / s).ln()
            }
            Base::Frank(th) => {
                if th.abs() < 1e-10 {
                    return 0.0;
                }
                // e^{-θ} - 1 and friends via expm1 for small θ
                let b = -(-th).exp_m1();
                let den = b - (-(-th * u).exp_m1()) * (-(-th * v).exp_m1());
                (th * b).abs().ln() - th * (u + v) - 2.0 * den.abs().ln()
            }
            Base::StudentT(rho, nu) => {
                let t = StudentsT::new(0.0, 1.0, nu).expect("validated nu");
                t_log_density(rho, nu, t.inverse_cdf(u), t.inverse_cdf(v))
            }
        }
    }

    fn h(self, u: f64, v: f64) -> f64 {
        match self {
            Base::Indep => u,
            Base::Gaussian(rho) => {
                let (x, y) = (norm_quantile(u), norm_quantile(v));
                norm_cdf((x - rho * y) / (1.0 - rho * rho).sqrt())
            }
            Base::Clayton(th) => {
                let a = u.powf(-th) + v.powf(-th) - 1.0;
                (-(th + 1.0) * v.ln() - (1.0 + 1.0 / th) * a.ln()).exp()
            }
            Base::Gumbel(th) => {
                let (x, y) = (-u.ln(), -v.ln());
                let a = x.powf(th) + y.powf(th);
                let s = a.powf(1.0 / th);
                (-s + (1.0 / th - 1.0) * a.ln() + (th - 1.0) * y.ln() + y).exp()
            }
            Base::Frank(th) => {
                if th.abs() < 1e-10 {
                    return u;
                }
                let eu = (-th * u).exp_m1();
                let ev = (-th * v).exp_m1();
                let e1 = (-th).exp_m1();
                (ev + 1.0) * eu / (e1 + eu * ev)
            }
            Base::StudentT(rho, nu) => {
                let t = StudentsT::new(0.0, 1.0, nu).expect("validated nu");
                let (x, y) = (t.inverse_cdf(u), t.inverse_cdf(v));
                let scale = ((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0)).sqrt();
                StudentsT::new(0.0, 1.0, nu + 1.0).expect("nu + 1").cdf((x - rho * y) / scale)
            }
        }
    }

    fn h_inverse(self, w: f64, v: f64) -> f64 {
        match self {
            Base::Indep => w,
            Base::Gaussian(rho) => {
                norm_cdf(norm_quantile(w) * (1.0 - rho * rho).sqrt() + rho * norm_quantile(v))
            }
            Base::Clayton(th) => {
                let lw = w.ln() + (th + 1.0) * v.ln();
                let a = (-th / (1.0 + th) * lw).exp() + 1.0 - v.powf(-th);
                (-1.0 / th * a.ln()).exp()
            }
            Base::Gumbel(_) => {
                // no closed form; h is increasing in u
                bisect(|u| self.h(u, v) - w, EPS, 1.0 - EPS, 1e-14)
            }
            Base::Frank(th) => {
                if th.abs() < 1e-10 {
                    return w;
                }
                let a = w * (-th).exp_m1() / (w + (1.0 - w) * (-th * v).exp());
                -a.ln_1p() / th
            }
            Base::StudentT(rho, nu) => {
                let t = StudentsT::new(0.0, 1.0, nu).expect("validated nu");
                let y = t.inverse_cdf(v);
                let scale = ((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0)).sqrt();
                let q = StudentsT::new(0.0, 1.0, nu + 1.0).expect("nu + 1").inverse_cdf(w);
                t.cdf(q * scale + rho * y)
            }
        }
    }

    fn cdf(self, u: f64, v: f64) -> f64 {
        match self {
            Base::Indep => u * v,
            Base::Gaussian(rho) => bivariate_normal_cdf(norm_quantile(u), norm_quantile(v), rho),
            Base::Clayton(th) => (u.powf(-th) + v.powf(-th) - 1.0).powf(-1.0 / th),
            Base::Gumbel(th) => (-((-u.ln()).powf(th) + (-v.ln()).powf(th)).powf(1.0 / th)).exp(),
            Base::Frank(th) => {
                if th.abs() < 1e-10 {
                    return u * v;
                }
                let r = (-th * u).exp_m1() * (-th * v).exp_m1() / (-th).exp_m1();
                -r.ln_1p() / th
            }
            Base::StudentT(..) => integrate(|s| self.h(u, s.max(EPS)), 0.0, v, 1e-12),
        }
    }
}

pub(crate) fn gaussian_log_density(rho: f64, x: f64, y: f64) -> f64 {
    let r2 = 1.0 - rho * rho;
    -0.5 * r2.ln() - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)
}

/// Student-t copula log-density at t-quantiles `x`, `y`.
pub(crate) fn t_log_density(rho: f64, nu: f64, x: f64, y: f64) -> f64 {
    t_log_density_with(t_log_constant(nu), rho, nu, x, y)
}

pub(crate) fn t_log_constant(nu: f64) -> f64 {
    ln_gamma((nu + 2.0) / 2.0) + ln_gamma(nu / 2.0) - 2.0 * ln_gamma((nu + 1.0) / 2.0)
}

/// [`t_log_density`] with `c2 = t_log_constant(nu)` precomputed.
pub(crate) fn t_log_density_with(c2: f64, rho: f64, nu: f64, x: f64, y: f64) -> f64 {
    let r2 = 1.0 - rho * rho;
    let q = (x * x + y * y - 2.0 * rho * x * y) / (nu * r2);
    c2 - 0.5 * r2.ln() - (nu + 2.0) / 2.0 * q.ln_1p()
        + (nu + 1.0) / 2.0 * ((x * x / nu).ln_1p() + (y * y / nu).ln_1p())
}

/// `Phi_2(x, y; rho)` from the derivative in `rho` of the bivariate normal
/// distribution function, integrated from 0.
pub(crate) fn bivariate_normal_cdf(x: f64, y: f64, rho: f64) -> f64 {
    let f = |r: f64| {
        let s = 1.0 - r * r;
        (-(x * x - 2.0 * r * x * y + y * y) / (2.0 * s)).exp() / s.sqrt()
    };
    norm_cdf(x) * norm_cdf(y) + integrate(f, 0.0, rho, 1e-13) / (2.0 * PI)
}

pub(crate) fn frank_tau(th: f64) -> f64 {
    if th.abs() < 1e-8 {
        return th / 9.0;
    }
    1.0 - 4.0 / th * (1.0 - debye1(th))
}

/// Inverse of the Frank tau relation on `[-35, 35]`.
pub(crate) fn frank_theta(tau: f64) -> f64 {
    if tau.abs() < 1e-10 {
        return 0.0;
    }
    bisect(|th| frank_tau(th) - tau, -35.0, 35.0, 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_rotations() -> Vec<PairCopula> {
        let mut out = vec![
            PairCopula::gaussian(0.5).unwrap(),
            PairCopula::gaussian(-0.7).unwrap(),
            PairCopula::new(Family::Frank, vec![4.0], 0).unwrap(),
            PairCopula::new(Family::Frank, vec![-3.0], 0).unwrap(),
            PairCopula::new(Family::StudentT, vec![0.4, 5.0], 0).unwrap(),
        ];
        for rot in [0, 90, 180, 270] {
            out.push(PairCopula::new(Family::Clayton, vec![2.0], rot).unwrap());
            out.push(PairCopula::new(Family::Gumbel, vec![1.8], rot).unwrap());
        }
        out
    }

    #[test]
    fn independence_is_flat() {
        let c = PairCopula::independence();
        assert_eq!(c.density(0.2, 0.9), 1.0);
        assert_eq!(c.h1(0.3, 0.8), 0.3);
        assert_eq!(c.h2(0.3, 0.8), 0.8);
        assert_eq!(PairCopula::gaussian(0.0).unwrap().density(0.2, 0.9), 1.0);
    }

    #[test]
    fn gaussian_median_symmetry() {
        let c = PairCopula::gaussian(0.5).unwrap();
        assert!((c.h1(0.5, 0.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn parameter_domains() {
        assert!(PairCopula::gaussian(1.0).is_err());
        assert!(PairCopula::new(Family::Clayton, vec![0.0], 0).is_err());
        assert!(PairCopula::new(Family::Gumbel, vec![0.9], 0).is_err());
        assert!(PairCopula::new(Family::Frank, vec![0.0], 0).is_err());
        assert!(PairCopula::new(Family::StudentT, vec![0.3, 2.0], 0).is_err());
        assert!(PairCopula::new(Family::Gaussian, vec![0.3], 90).is_err());
        assert!(PairCopula::new(Family::Clayton, vec![1.0], 45).is_err());
        assert!(PairCopula::new(Family::Clayton, vec![1.0, 2.0], 0).is_err());
    }

    #[test]
    fn inverses_invert() {
        for c in all_rotations() {
            for &(u, v) in &[(0.1, 0.2), (0.5, 0.9), (0.83, 0.31), (0.02, 0.97)] {
                let w = c.h1(u, v);
                assert!((c.h1_inverse(w, v) - u).abs() < 1e-7, "{c} h1 at ({u},{v})");
                let w = c.h2(u, v);
                assert!((c.h2_inverse(w, u) - v).abs() < 1e-7, "{c} h2 at ({u},{v})");
            }
        }
    }

    #[test]
    fn transposed_swaps_arguments() {
        for c in all_rotations() {
            let t = c.transposed();
            for &(u, v) in &[(0.15, 0.6), (0.7, 0.35)] {
                assert!((c.density(u, v) - t.density(v, u)).abs() < 1e-9, "{c}");
                assert!((c.h1(u, v) - t.h2(v, u)).abs() < 1e-12, "{c}");
            }
        }
    }

    #[test]
    fn rotated_tau_sign() {
        let c = PairCopula::new(Family::Clayton, vec![2.0], 90).unwrap();
        assert!((c.tau() + 0.5).abs() < 1e-12);
        assert!((PairCopula::new(Family::Gumbel, vec![2.0], 180).unwrap().tau() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn frank_tau_inverse() {
        for tau in [-0.6, -0.1, 0.05, 0.3, 0.8] {
            assert!((frank_tau(frank_theta(tau)) - tau).abs() < 1e-8);
        }
    }

    #[test]
    fn boundary_inputs_are_finite() {
        for c in all_rotations() {
            for &(u, v) in &[(0.0, 0.5), (1.0, 1.0), (0.0, 0.0), (1.0, 0.0)] {
                assert!(c.log_density(u, v).is_finite(), "{c} at ({u},{v})");
                let h = c.h1(u, v);
                assert!(h > 0.0 && h < 1.0, "{c} h1 at ({u},{v}) = {h}");
            }
        }
    }

    #[test]
    fn family_names_parse() {
        assert_eq!(parse_families("gaussian, t,frank").unwrap(), vec![Family::Gaussian, Family::Frank, Family::StudentT]);
        assert_eq!(parse_families("all").unwrap().len(), 6);
        assert!(parse_families("bb1").is_err());
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
    }
}
