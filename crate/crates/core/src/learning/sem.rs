use std::collections::BTreeMap;

use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::correlation::{sample_correlation, CorrelationMatrix};
use crate::dag::{Dag, TopologicalOrdering};
use crate::data::{Dataset, Scale};
use crate::error::{Error, Result};
use crate::graph::Node;

/// Ridge added to singular normal equations.
pub const RIDGE: f64 = 1e-8;

/// Linear Gaussian structural equation model
/// `X_v = sum_p phi[v, p] X_p + psi_v e_v` on a DAG, with unit variances.
#[derive(Clone, Debug, PartialEq)]
pub struct Sem {
    dag: Dag,
    ordering: TopologicalOrdering,
    /// `(child, parent) -> phi`
    coefficients: BTreeMap<(Node, Node), f64>,
    psi: Vec<f64>,
}

impl Sem {
    /// Chooses every noise scale so that `Var(X_v) = 1`; fails when the
    /// coefficients already explain more than unit variance.
    pub fn new(dag: Dag, coefficients: BTreeMap<(Node, Node), f64>) -> Result<Self> {
        check_labels(&dag)?;
        for &(child, parent) in coefficients.keys() {
            if !dag.has_arrow(parent, child) {
                return Err(Error::invalid(format!("coefficient ({child}, {parent}) has no arrow {parent} -> {child}")));
            }
        }
        if coefficients.len() != dag.arrow_count() {
            return Err(Error::invalid("every arrow needs a coefficient"));
        }
        let ordering = dag.topological_ordering();
        let d = dag.len();
        let mut sem = Sem { dag, ordering, coefficients, psi: vec![1.0; d] };
        sem.set_noise_scales()?;
        Ok(sem)
    }

    /// Builds the implied covariance node by node, setting each `psi` on the way.
    fn set_noise_scales(&mut self) -> Result<()> {
        let d = self.dag.len();
        let mut cov = DMatrix::<f64>::zeros(d, d);
        for &v in self.ordering.clone().as_slice() {
            let parents: Vec<Node> = self.dag.parents(v).iter().copied().collect();
            let phi: Vec<f64> = parents.iter().map(|&p| self.coefficients[&(v, p)]).collect();
            let mut explained = 0.0f64;
            for (i, &p) in parents.iter().enumerate() {
                for (j, &q) in parents.iter().enumerate() {
                    explained += phi[i] * phi[j] * cov[(p - 1, q - 1)];
                }
            }
            let resid = 1.0 - explained;
            if resid <= 0.0 {
                return Err(Error::invalid(format!(
                    "coefficients into node {v} explain variance {explained:.4} >= 1"
                )));
            }
            self.psi[v - 1] = resid.sqrt();
            // Cov(X_v, X_w) for every w placed before v
            for &w in self.ordering.as_slice() {
                if w == v {
                    break;
                }
                let c: f64 = parents.iter().zip(&phi).map(|(&p, &f)| f * cov[(p - 1, w - 1)]).sum();
                cov[(v - 1, w - 1)] = c;
                cov[(w - 1, v - 1)] = c;
            }
            cov[(v - 1, v - 1)] = 1.0;
        }
        Ok(())
    }

    /// Random coefficients with magnitude in `[lo, hi]` and random sign,
    /// shrunk per node until the unit-variance constraint leaves noise.
    pub fn random<R: Rng + ?Sized>(dag: Dag, lo: f64, hi: f64, rng: &mut R) -> Result<Self> {
        check_labels(&dag)?;
        let mut coefficients = BTreeMap::new();
        for (p, c) in dag.arrows() {
            let mag: f64 = rng.random_range(lo..=hi);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            coefficients.insert((c, p), sign * mag);
        }
        for _ in 0..60 {
            match Sem::new(dag.clone(), coefficients.clone()) {
                Ok(s) if s.psi.iter().all(|&x| x > 0.2) => return Ok(s),
                _ => coefficients.values_mut().for_each(|x| *x *= 0.9),
            }
        }
        Sem::new(dag, coefficients)
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn ordering(&self) -> &TopologicalOrdering {
        &self.ordering
    }

    pub fn coefficient(&self, child: Node, parent: Node) -> Option<f64> {
        self.coefficients.get(&(child, parent)).copied()
    }

    pub fn coefficients(&self) -> &BTreeMap<(Node, Node), f64> {
        &self.coefficients
    }

    pub fn psi(&self, v: Node) -> f64 {
        self.psi[v - 1]
    }

    /// `n` draws on the z-scale.
    pub fn simulate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Dataset> {
        let d = self.dag.len();
        let mut cols = vec![vec![0.0; n]; d];
        for i in 0..n {
            for &v in self.ordering.as_slice() {
                let eps: f64 = rng.sample(StandardNormal);
                let mut x = self.psi[v - 1] * eps;
                for &p in self.dag.parents(v) {
                    x += self.coefficients[&(v, p)] * cols[p - 1][i];
                }
                cols[v - 1][i] = x;
            }
        }
        Dataset::from_columns(cols, Scale::Z)
    }
}

fn check_labels(dag: &Dag) -> Result<()> {
    if dag.nodes().enumerate().any(|(i, v)| v != i + 1) {
        return Err(Error::invalid("DAG nodes must be labelled 1..d"));
    }
    Ok(())
}

/// Solves `a x = b` for symmetric `a`, adding [`RIDGE`] when singular.
pub(crate) fn solve_normal(a: DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.nrows();
    if let Some(ch) = a.clone().cholesky() {
        return ch.solve(b);
    }
    warn!("collinear regressors; adding ridge {RIDGE}");
    let mut scale = RIDGE;
    loop {
        if let Some(ch) = (&a + DMatrix::identity(n, n) * scale).cholesky() {
            return ch.solve(b);
        }
        scale *= 10.0;
    }
}

/// Regression of each node on its parents in the sample correlation; noise
/// scales then follow from [`Sem::new`].
pub fn fit_sem(g: &Dag, data: &Dataset) -> Result<Sem> {
    if data.d() != g.len() {
        return Err(Error::invalid(format!("dataset has {} columns, DAG has {} nodes", data.d(), g.len())));
    }
    let r = sample_correlation(data)?;
    let r = r.matrix();
    let mut coefficients = BTreeMap::new();
    for v in g.nodes() {
        let pa: Vec<Node> = g.parents(v).iter().copied().collect();
        if pa.is_empty() {
            continue;
        }
        let a = DMatrix::from_fn(pa.len(), pa.len(), |i, j| r[(pa[i] - 1, pa[j] - 1)]);
        let b = DVector::from_iterator(pa.len(), pa.iter().map(|&p| r[(p - 1, v - 1)]));
        let phi = solve_normal(a, &b);
        for (i, &p) in pa.iter().enumerate() {
            coefficients.insert((v, p), phi[i]);
        }
    }
    match Sem::new(g.clone(), coefficients.clone()) {
        Ok(s) => Ok(s),
        Err(_) => {
            // near-deterministic node: shrink its coefficients slightly
            warn!("fitted coefficients leave no residual variance; shrinking");
            for x in coefficients.values_mut() {
                *x *= 1.0 - 1e-6;
            }
            Sem::new(g.clone(), coefficients)
        }
    }
}

/// `(I - B)^-1 D (I - B)^-T`, rescaled to unit diagonal.
pub fn implied_correlation_dag(s: &Sem) -> Result<CorrelationMatrix> {
    let d = s.dag.len();
    let mut b = DMatrix::zeros(d, d);
    for (&(c, p), &phi) in &s.coefficients {
        b[(c - 1, p - 1)] = phi;
    }
    let ib = DMatrix::identity(d, d) - b;
    let inv = ib.try_inverse().expect("I - B of a DAG is unitriangular up to permutation");
    let dmat = DMatrix::from_diagonal(&DVector::from_iterator(d, s.psi.iter().map(|p| p * p)));
    let cov = &inv * dmat * inv.transpose();
    CorrelationMatrix::from_covariance(&cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn sem(arrows: &[(Node, Node)], phis: &[f64], d: usize) -> Sem {
        let dag = Dag::from_arrows(1..=d, arrows.iter().copied()).unwrap();
        let coefs = arrows.iter().zip(phis).map(|(&(p, c), &f)| ((c, p), f)).collect();
        Sem::new(dag, coefs).unwrap()
    }

    #[test]
    fn single_arrow() {
        let s = sem(&[(1, 2)], &[0.6], 2);
        assert!((s.psi(2) - 0.8).abs() < 1e-12);
        assert!((implied_correlation_dag(&s).unwrap().get(1, 2) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn chain_multiplies() {
        let s = sem(&[(1, 2), (2, 3)], &[0.5, 0.5], 3);
        assert!((implied_correlation_dag(&s).unwrap().get(1, 3) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn edgeless_is_identity() {
        let s = Sem::new(Dag::empty(4), BTreeMap::new()).unwrap();
        assert_eq!(implied_correlation_dag(&s).unwrap(), CorrelationMatrix::identity(4));
        assert!((1..=4).all(|v| s.psi(v) == 1.0));
    }

    #[test]
    fn rejects_mismatched_coefficients() {
        let dag = Dag::from_arrows(1..=2, [(1, 2)]).unwrap();
        assert!(Sem::new(dag.clone(), BTreeMap::from([((1, 2), 0.5)])).is_err());
        assert!(Sem::new(dag.clone(), BTreeMap::new()).is_err());
        assert!(Sem::new(dag, BTreeMap::from([((2, 1), 1.5)])).is_err());
    }

    #[test]
    fn fit_recovers_bivariate_regression() {
        let truth = sem(&[(1, 2)], &[0.6], 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let data = truth.simulate(20000, &mut rng).unwrap();
        let fit = fit_sem(truth.dag(), &data).unwrap();
        assert!((fit.coefficient(2, 1).unwrap() - 0.6).abs() < 0.02);
        assert!((fit.psi(2) - 0.8).abs() < 0.02);
        let empty = fit_sem(&Dag::empty(2), &data).unwrap();
        assert!(empty.coefficients().is_empty());
        assert_eq!(empty.psi(1), 1.0);
    }

    #[test]
    fn ridge_on_collinear_parents() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let x = solve_normal(a, &DVector::from_vec(vec![1.0, 1.0]));
        assert!(x.iter().all(|v| v.is_finite()));
        assert!((x[0] + x[1] - 1.0).abs() < 1e-6);
    }
}
