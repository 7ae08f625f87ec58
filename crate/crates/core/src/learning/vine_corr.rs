//! Correlation matrices of Gaussian vines and their inverse map.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use super::correlation::CorrelationMatrix;
use crate::copula::{Family, PairCopula, RVineModel};
use crate::error::{Error, Result};
use crate::graph::Node;
use crate::vine::{check_aligned, IndependenceMatrix, RVineMatrix};

fn sub(m: &DMatrix<f64>, rows: &[Node], cols: &[Node]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i] - 1, cols[j] - 1)])
}

/// Correlation implied by a vine whose non-independent cells are all
/// Gaussian. Works tree by tree, recovering each unconditional
/// correlation from the partial one on the cell.
pub fn implied_correlation_rvine(model: &RVineModel) -> Result<CorrelationMatrix> {
    let m = model.matrix();
    let d = m.d();
    let mut sigma = DMatrix::<f64>::identity(d, d);
    for (r, c) in m.cells() {
        let cop = model.copula(r, c);
        let partial = match cop.family() {
            Family::Independence => 0.0,
            Family::Gaussian => cop.params()[0],
            other => {
                return Err(Error::invalid(format!(
                    "cell ({}, {}) holds a {other} copula; only Gaussian vines have an implied correlation",
                    r + 1,
                    c + 1
                )))
            }
        };
        let (a, b) = (m.get(c, c), m.get(r, c));
        let given: Vec<Node> = m.conditioning(r, c).into_iter().collect();
        let rho = if given.is_empty() {
            partial
        } else {
            let sdd = sub(&sigma, &given, &given);
            let chol = sdd.cholesky().ok_or(Error::NotPositiveDefinite(0.0))?;
            let sda: DVector<f64> = sub(&sigma, &given, &[a]).column(0).into();
            let sdb: DVector<f64> = sub(&sigma, &given, &[b]).column(0).into();
            let wa = chol.solve(&sda);
            let wb = chol.solve(&sdb);
            let va = (1.0 - sda.dot(&wa)).max(0.0);
            let vb = (1.0 - sdb.dot(&wb)).max(0.0);
            sda.dot(&wb) + partial * (va * vb).sqrt()
        };
        sigma[(a - 1, b - 1)] = rho;
        sigma[(b - 1, a - 1)] = rho;
    }
    CorrelationMatrix::new(sigma)
}

/// Partial correlation of `a`, `b` given `given`, from the inverse of the
/// submatrix on `{a, b} + given`.
pub fn partial_correlation(sigma: &CorrelationMatrix, a: Node, b: Node, given: &BTreeSet<Node>) -> Result<f64> {
    let mut idx = vec![a, b];
    idx.extend(given.iter().copied());
    let s = sub(sigma.matrix(), &idx, &idx);
    let p = s.try_inverse().ok_or(Error::NotPositiveDefinite(0.0))?;
    Ok((-p[(0, 1)] / (p[(0, 0)] * p[(1, 1)]).sqrt()).clamp(-1.0, 1.0))
}

/// Gaussian vine on `matrix` whose cells carry the partial correlations of
/// `sigma`; cells with `F = 0` get independence.
pub fn vine_from_correlation(sigma: &CorrelationMatrix, matrix: &RVineMatrix, f: &IndependenceMatrix) -> Result<RVineModel> {
    let d = matrix.d();
    if sigma.d() != d {
        return Err(Error::invalid(format!("correlation is {}x{}, vine has dimension {d}", sigma.d(), sigma.d())));
    }
    check_aligned(matrix, f)?;
    let mut copulas = vec![vec![PairCopula::independence(); d]; d];
    for (r, c) in matrix.cells() {
        if !f.get(r, c) {
            continue;
        }
        let rho = partial_correlation(sigma, matrix.get(c, c), matrix.get(r, c), &matrix.conditioning(r, c))?;
        copulas[r][c] = PairCopula::gaussian(rho.clamp(-0.9999, 0.9999))?;
    }
    RVineModel::new(matrix.clone(), f.clone(), copulas)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dvine3() -> RVineMatrix {
        // D-vine 1 - 2 - 3
        RVineMatrix::from_text("1 0 0\n3 3 0\n2 2 2\n").unwrap()
    }

    #[test]
    fn markov_dvine_multiplies() {
        let m = dvine3();
        let d = m.d();
        let mut cops = vec![vec![PairCopula::independence(); d]; d];
        for (r, c) in m.cells() {
            if m.tree_of_row(r) == 1 {
                cops[r][c] = PairCopula::gaussian(0.5).unwrap();
            }
        }
        let model = RVineModel::new(m.clone(), IndependenceMatrix::truncated(d, 1), cops).unwrap();
        let s = implied_correlation_rvine(&model).unwrap();
        assert!((s.get(1, 2) - 0.5).abs() < 1e-12);
        assert!((s.get(2, 3) - 0.5).abs() < 1e-12);
        assert!((s.get(1, 3) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn round_trip_through_partials() {
        let sigma = CorrelationMatrix::new(DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 0.4, -0.2, 0.4, 1.0, 0.3, -0.2, 0.3, 1.0],
        ))
        .unwrap();
        let m = dvine3();
        let model = vine_from_correlation(&sigma, &m, &IndependenceMatrix::ones(3)).unwrap();
        let back = implied_correlation_rvine(&model).unwrap();
        assert!(back.max_abs_diff(&sigma) < 1e-12);
    }

    #[test]
    fn rejects_other_families() {
        let m = dvine3();
        let mut cops = vec![vec![PairCopula::independence(); 3]; 3];
        cops[2][0] = PairCopula::new(Family::Clayton, vec![1.0], 0).unwrap();
        let model = RVineModel::new(m, IndependenceMatrix::ones(3), cops).unwrap();
        assert!(implied_correlation_rvine(&model).is_err());
    }
}
