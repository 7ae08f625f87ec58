use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::copula::kendall_tau;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graph::Node;

/// Smallest admissible eigenvalue.
pub const PD_TOLERANCE: f64 = 1e-10;

/// Symmetric positive-definite matrix with unit diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix(DMatrix<f64>);

impl CorrelationMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let d = m.nrows();
        if d == 0 || m.ncols() != d {
            return Err(Error::invalid(format!("correlation matrix must be square, got {}x{}", d, m.ncols())));
        }
        for i in 0..d {
            if (m[(i, i)] - 1.0).abs() > 1e-10 {
                return Err(Error::invalid(format!("diagonal entry {} is {}", i + 1, m[(i, i)])));
            }
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-10 {
                    return Err(Error::invalid(format!("matrix is not symmetric at ({}, {})", i + 1, j + 1)));
                }
                if m[(i, j)].abs() > 1.0 + 1e-12 || !m[(i, j)].is_finite() {
                    return Err(Error::invalid(format!("entry ({}, {}) = {} outside [-1, 1]", i + 1, j + 1, m[(i, j)])));
                }
            }
        }
        let min_eig = SymmetricEigen::new(m.clone()).eigenvalues.min();
        if min_eig <= PD_TOLERANCE {
            return Err(Error::NotPositiveDefinite(min_eig));
        }
        Ok(CorrelationMatrix(m))
    }

    /// Rescales a covariance matrix to unit diagonal.
    pub fn from_covariance(cov: &DMatrix<f64>) -> Result<Self> {
        let d = cov.nrows();
        let s: Vec<f64> = (0..d).map(|i| cov[(i, i)].sqrt()).collect();
        if s.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::DegenerateData("zero or non-finite variance".into()));
        }
        let mut m = DMatrix::from_fn(d, d, |i, j| cov[(i, j)] / (s[i] * s[j]));
        for i in 0..d {
            m[(i, i)] = 1.0;
            for j in 0..i {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = avg;
                m[(j, i)] = avg;
            }
        }
        CorrelationMatrix::new(m)
    }

    pub fn identity(d: usize) -> Self {
        CorrelationMatrix(DMatrix::identity(d, d))
    }

    pub fn d(&self) -> usize {
        self.0.nrows()
    }

    /// Entry for variables `a`, `b` (1-based labels).
    pub fn get(&self, a: Node, b: Node) -> f64 {
        self.0[(a - 1, b - 1)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn max_abs_diff(&self, other: &CorrelationMatrix) -> f64 {
        (&self.0 - &other.0).abs().max()
    }

    /// CSV with a header row of labels followed by `d` rows.
    pub fn to_csv(&self, labels: &[String]) -> String {
        let d = self.d();
        let mut s = labels.join(",");
        s.push('\n');
        for i in 0..d {
            let row: Vec<String> = (0..d).map(|j| self.0[(i, j)].to_string()).collect();
            writeln!(s, "{}", row.join(",")).unwrap();
        }
        s
    }
}

/// Pearson correlation of the columns.
pub fn sample_correlation(data: &Dataset) -> Result<CorrelationMatrix> {
    let (n, d) = (data.n(), data.d());
    if n < 2 {
        return Err(Error::invalid("need at least two observations"));
    }
    let centered: Vec<Vec<f64>> = data
        .columns()
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / n as f64;
            c.iter().map(|x| x - mean).collect()
        })
        .collect();
    let cov = DMatrix::from_fn(d, d, |i, j| {
        centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum::<f64>() / n as f64
    });
    CorrelationMatrix::from_covariance(&cov)
}

/// Pairwise tau-b; symmetric with unit diagonal.
pub fn empirical_kendall_matrix(data: &Dataset) -> Result<DMatrix<f64>> {
    let d = data.d();
    if data.n() < 2 {
        return Err(Error::invalid("need at least two observations"));
    }
    let mut m = DMatrix::identity(d, d);
    for i in 0..d {
        for j in 0..i {
            let t = kendall_tau(&data.columns()[i], &data.columns()[j])?;
            m[(i, j)] = t;
            m[(j, i)] = t;
        }
    }
    Ok(m)
}

/// `KL(N(0, s1) || N(0, s2)) = (tr(s2^-1 s1) - d + ln det s2 - ln det s1) / 2`.
pub fn kl_divergence(s1: &CorrelationMatrix, s2: &CorrelationMatrix) -> Result<f64> {
    let d = s1.d();
    if s2.d() != d {
        return Err(Error::invalid(format!("dimensions {d} and {} differ", s2.d())));
    }
    let c1 = s1.0.clone().cholesky().ok_or(Error::NotPositiveDefinite(0.0))?;
    let c2 = s2.0.clone().cholesky().ok_or(Error::NotPositiveDefinite(0.0))?;
    let logdet = |c: &nalgebra::Cholesky<f64, nalgebra::Dyn>| 2.0 * c.l_dirty().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    let trace = c2.solve(&s1.0).trace();
    Ok((0.5 * (trace - d as f64 + logdet(&c2) - logdet(&c1))).max(0.0))
}
