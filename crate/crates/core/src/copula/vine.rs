//! R-vine copula models on top of an [`RVineMatrix`].
//!
//! Pair-copula orientation: the copula of cell `(r, c)` is `C(u, v)` with
//! `u = F(M[c][c] | D)` (the diagonal variable of the column) and
//! `v = F(M[r][c] | D)`. Fitting produces `F(M[c][c] | D, M[r][c]) = h1(u, v)`
//! and `F(M[r][c] | D, M[c][c]) = h2(u, v)` for the next tree.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::family::{Family, PairCopula};
use super::fit::{fit_pair, FitOptions};
use crate::data::{Dataset, Scale};
use crate::error::{Error, Result};
use crate::graph::Node;
use crate::numeric::{norm_cdf, norm_log_pdf};
use crate::vine::{check_aligned, IndependenceMatrix, RVineMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct RVineModel {
    matrix: RVineMatrix,
    independence: IndependenceMatrix,
    /// `copulas[r][c]`, meaningful below the diagonal.
    copulas: Vec<Vec<PairCopula>>,
}

impl RVineModel {
    /// Checks that every cell with `F = 0` holds the independence copula.
    pub fn new(matrix: RVineMatrix, independence: IndependenceMatrix, copulas: Vec<Vec<PairCopula>>) -> Result<Self> {
        check_aligned(&matrix, &independence)?;
        let d = matrix.d();
        if copulas.len() != d || copulas.iter().any(|r| r.len() != d) {
            return Err(Error::invalid(format!("copula table must be {d}x{d}")));
        }
        for r in 0..d {
            for c in 0..d {
                let cop = &copulas[r][c];
                if r <= c && !cop.is_independence() {
                    return Err(Error::invalid(format!("copula at ({}, {}) lies on or above the diagonal", r + 1, c + 1)));
                }
                if r > c && !independence.get(r, c) && !cop.is_independence() {
                    return Err(Error::invalid(format!(
                        "cell ({}, {}) is fixed to independence but holds {cop}",
                        r + 1,
                        c + 1
                    )));
                }
            }
        }
        Ok(RVineModel { matrix, independence, copulas })
    }

    /// Fully independent model on `matrix`.
    pub fn independent(matrix: RVineMatrix) -> Self {
        let d = matrix.d();
        RVineModel {
            independence: IndependenceMatrix::zeros(d),
            copulas: vec![vec![PairCopula::independence(); d]; d],
            matrix,
        }
    }

    pub fn d(&self) -> usize {
        self.matrix.d()
    }

    pub fn matrix(&self) -> &RVineMatrix {
        &self.matrix
    }

    pub fn independence(&self) -> &IndependenceMatrix {
        &self.independence
    }

    pub fn copula(&self, r: usize, c: usize) -> &PairCopula {
        &self.copulas[r][c]
    }

    /// Copula of the edge with conditioned pair `{a, b}`, oriented as `C(a, b)`.
    pub fn pair_copula(&self, a: Node, b: Node) -> Option<PairCopula> {
        let (r, c) = self.matrix.find_pair(a, b)?;
        let cop = &self.copulas[r][c];
        Some(if self.matrix.get(c, c) == a { cop.clone() } else { cop.transposed() })
    }

    pub fn n_params(&self) -> usize {
        self.matrix.cells().into_iter().map(|(r, c)| self.copulas[r][c].n_params()).sum()
    }

    pub fn n_dependent(&self) -> usize {
        self.matrix
            .cells()
            .into_iter()
            .filter(|&(r, c)| !self.copulas[r][c].is_independence())
            .count()
    }

    /// Highest tree holding a non-independence copula.
    pub fn truncation_level(&self) -> usize {
        self.matrix
            .cells()
            .into_iter()
            .filter(|&(r, c)| !self.copulas[r][c].is_independence())
            .map(|(r, _)| self.matrix.tree_of_row(r))
            .max()
            .unwrap_or(0)
    }

    /// Log-likelihood. On the z-scale the standard normal marginals are added.
    pub fn loglik(&self, data: &Dataset) -> Result<f64> {
        let (u, marg) = copula_scale(data, self.d())?;
        let mut ll = marg;
        let mut obs = PseudoObs::new(u);
        let top = self.truncation_level();
        for (r, c) in self.matrix.cells() {
            if self.matrix.tree_of_row(r) > top {
                break;
            }
            let cop = &self.copulas[r][c];
            let (a, b, key) = self.edge(r, c);
            let (uu, vv) = (obs.get(a, &key), obs.get(b, &key));
            if !cop.is_independence() {
                let tree_ll: f64 = uu.iter().zip(vv).map(|(&x, &y)| cop.log_density(x, y)).sum();
                ll += tree_ll;
            }
            if self.matrix.tree_of_row(r) < top {
                obs.propagate(cop, a, b, &key);
            }
        }
        Ok(ll)
    }

    /// `-2 loglik + 2 p`.
    pub fn aic(&self, data: &Dataset) -> Result<f64> {
        Ok(-2.0 * self.loglik(data)? + 2.0 * self.n_params() as f64)
    }

    /// `-2 loglik + p ln n`.
    pub fn bic(&self, data: &Dataset) -> Result<f64> {
        Ok(-2.0 * self.loglik(data)? + self.n_params() as f64 * (data.n() as f64).ln())
    }

    fn edge(&self, r: usize, c: usize) -> (Node, Node, BTreeSet<Node>) {
        (self.matrix.get(c, c), self.matrix.get(r, c), self.matrix.conditioning(r, c))
    }

    /// Draws `n` u-scale rows by inverting the Rosenblatt transform column by
    /// column from the right of the matrix. Row `i` uses its own ChaCha stream.
    pub fn simulate(&self, n: usize, seed: u64) -> Result<Dataset> {
        let d = self.d();
        let m = &self.matrix;
        // w[c][i]: uniform driving column c in row i
        let mut w = vec![vec![0.0; n]; d];
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for i in 0..n {
            rng.set_stream(i as u64);
            rng.set_word_pos(0);
            for col in w.iter_mut() {
                col[i] = open_unit(rng.next_u64());
            }
        }
        let mut obs = PseudoObs::new(vec![Vec::new(); d]);
        for c in (0..d).rev() {
            let a = m.get(c, c);
            let mut cur = std::mem::take(&mut w[c]);
            // rows c+1..d go from the top tree of the column down to tree 1
            for r in c + 1..d {
                let b = m.get(r, c);
                let key = m.conditioning(r, c);
                let cop = &self.copulas[r][c];
                if r == c + 1 {
                    // cur is F(a | everything below it in the column)
                    let mut full = key.clone();
                    full.insert(b);
                    obs.insert(a, full, cur.clone());
                }
                if !cop.is_independence() {
                    let v = obs.get(b, &key);
                    for (x, &y) in cur.iter_mut().zip(v) {
                        *x = cop.h1_inverse(*x, y);
                    }
                }
                obs.insert(a, key, cur.clone());
            }
            if c == d - 1 {
                obs.insert(a, BTreeSet::new(), cur);
            }
            for r in (c + 1..d).rev() {
                let b = m.get(r, c);
                let key = m.conditioning(r, c);
                obs.propagate_second(&self.copulas[r][c], a, b, &key);
            }
        }
        let columns = (1..=d).map(|v| obs.get(v, &BTreeSet::new()).to_vec()).collect();
        Dataset::from_columns(columns, Scale::U)
    }

    /// Whitespace table `row col family rotation params...` (1-based cells)
    /// listing every non-independence copula.
    pub fn copula_table(&self) -> String {
        let mut s = String::from("# row col family rotation params\n");
        for (r, c) in self.matrix.cells() {
            let cop = &self.copulas[r][c];
            if cop.is_independence() {
                continue;
            }
            write!(s, "{} {} {} {}", r + 1, c + 1, cop.family(), cop.rotation()).unwrap();
            for p in cop.params() {
                write!(s, " {p}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn from_texts(matrix: &str, independence: &str, table: &str) -> Result<Self> {
        let matrix = RVineMatrix::from_text(matrix)?;
        let independence = IndependenceMatrix::from_text(independence)?;
        let d = matrix.d();
        let mut copulas = vec![vec![PairCopula::independence(); d]; d];
        for (i, line) in table.lines().enumerate() {
            let line_no = i + 1;
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let perr = |message: String| Error::Parse { line: line_no, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 4 {
                return Err(perr("expected 'row col family rotation params...'".into()));
            }
            let idx = |s: &str| -> Result<usize> {
                let x: usize = s.parse().map_err(|_| perr(format!("'{s}' is not a cell index")))?;
                if x == 0 || x > d {
                    return Err(perr(format!("cell index {x} outside 1..{d}")));
                }
                Ok(x - 1)
            };
            let (r, c) = (idx(fields[0])?, idx(fields[1])?);
            if r <= c {
                return Err(perr(format!("cell ({}, {}) is not below the diagonal", r + 1, c + 1)));
            }
            let family: Family = fields[2].parse().map_err(|e: Error| perr(e.to_string()))?;
            let rotation: u16 = fields[3].parse().map_err(|_| perr(format!("bad rotation '{}'", fields[3])))?;
            let params = fields[4..]
                .iter()
                .map(|p| p.parse::<f64>().map_err(|_| perr(format!("bad parameter '{p}'"))))
                .collect::<Result<Vec<_>>>()?;
            copulas[r][c] = PairCopula::new(family, params, rotation).map_err(|e| perr(e.to_string()))?;
        }
        RVineModel::new(matrix, independence, copulas)
    }
}

/// Fits every cell with `F = 1` tree by tree; cells with `F = 0` stay
/// independent and are never fitted.
pub fn fit_rvine(data: &Dataset, matrix: &RVineMatrix, f: &IndependenceMatrix, opts: &FitOptions) -> Result<RVineModel> {
    opts.validate()?;
    check_aligned(matrix, f)?;
    let d = matrix.d();
    let (u, _) = copula_scale(data, d)?;
    let mut copulas = vec![vec![PairCopula::independence(); d]; d];
    let top = f.truncation_level();
    let mut obs = PseudoObs::new(u);
    for (r, c) in matrix.cells() {
        let t = matrix.tree_of_row(r);
        if t > top {
            break;
        }
        let (a, b, key) = (matrix.get(c, c), matrix.get(r, c), matrix.conditioning(r, c));
        if f.get(r, c) {
            copulas[r][c] = fit_pair(obs.get(a, &key), obs.get(b, &key), opts)?.copula;
        }
        if t < top {
            obs.propagate(&copulas[r][c], a, b, &key);
        }
    }
    RVineModel::new(matrix.clone(), f.clone(), copulas)
}

/// Returns u-scale columns and the marginal log-likelihood term.
pub(crate) fn copula_scale(data: &Dataset, d: usize) -> Result<(Vec<Vec<f64>>, f64)> {
    if data.d() != d {
        return Err(Error::invalid(format!("dataset has {} columns, model has {d} variables", data.d())));
    }
    match data.scale() {
        Scale::U => Ok((data.columns().to_vec(), 0.0)),
        Scale::Z => {
            let marg = data.columns().iter().flatten().map(|&z| norm_log_pdf(z)).sum();
            let u = data.columns().iter().map(|c| c.iter().map(|&z| norm_cdf(z)).collect()).collect();
            Ok((u, marg))
        }
        Scale::X => Err(Error::invalid("vine models need u- or z-scale data")),
    }
}

pub(crate) fn open_unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Conditional distributions `F(v | D)` keyed by `(v, D)`.
pub(crate) struct PseudoObs {
    map: HashMap<(Node, BTreeSet<Node>), Vec<f64>>,
}

impl PseudoObs {
    /// `columns[j]` is variable `j + 1`.
    pub(crate) fn new(columns: Vec<Vec<f64>>) -> Self {
        let map = columns
            .into_iter()
            .enumerate()
            .filter(|(_, col)| !col.is_empty())
            .map(|(j, col)| ((j + 1, BTreeSet::new()), col))
            .collect();
        PseudoObs { map }
    }

    pub(crate) fn get(&self, v: Node, given: &BTreeSet<Node>) -> &[f64] {
        self.map
            .get(&(v, given.clone()))
            .unwrap_or_else(|| panic!("missing pseudo-observation F({v} | {given:?})"))
    }

    fn insert(&mut self, v: Node, given: BTreeSet<Node>, values: Vec<f64>) {
        self.map.insert((v, given), values);
    }

    /// Adds `F(a | D, b)` and `F(b | D, a)` for the edge `C(a, b; D)`.
    pub(crate) fn propagate(&mut self, cop: &PairCopula, a: Node, b: Node, given: &BTreeSet<Node>) {
        let (u, v) = (self.get(a, given), self.get(b, given));
        let first: Vec<f64> = u.iter().zip(v).map(|(&x, &y)| cop.h1(x, y)).collect();
        let second: Vec<f64> = u.iter().zip(v).map(|(&x, &y)| cop.h2(x, y)).collect();
        let mut with_b = given.clone();
        with_b.insert(b);
        let mut with_a = given.clone();
        with_a.insert(a);
        self.insert(a, with_b, first);
        self.insert(b, with_a, second);
    }

    /// Adds only `F(b | D, a)`.
    fn propagate_second(&mut self, cop: &PairCopula, a: Node, b: Node, given: &BTreeSet<Node>) {
        let (u, v) = (self.get(a, given), self.get(b, given));
        let second: Vec<f64> = u.iter().zip(v).map(|(&x, &y)| cop.h2(x, y)).collect();
        let mut with_a = given.clone();
        with_a.insert(a);
        self.insert(b, with_a, second);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn gaussian_model(m: RVineMatrix, rho: f64, k: usize) -> RVineModel {
        let d = m.d();
        let f = IndependenceMatrix::truncated(d, k);
        let mut cop = vec![vec![PairCopula::independence(); d]; d];
        for (r, c) in m.cells() {
            if f.get(r, c) {
                cop[r][c] = PairCopula::gaussian(rho / m.tree_of_row(r) as f64).unwrap();
            }
        }
        RVineModel::new(m, f, cop).unwrap()
    }

    #[test]
    fn independent_model_is_zero_loglik() {
        let m = fixtures::six_dim_matrix();
        let model = RVineModel::independent(m);
        let data = model.simulate(200, 1).unwrap();
        assert_eq!(model.loglik(&data).unwrap(), 0.0);
        assert_eq!(model.n_params(), 0);
    }

    #[test]
    fn f_zero_cells_reject_copulas() {
        let m = RVineMatrix::new(vec![vec![2, 0], vec![1, 1]]).unwrap();
        let mut cop = vec![vec![PairCopula::independence(); 2]; 2];
        cop[1][0] = PairCopula::gaussian(0.3).unwrap();
        assert!(RVineModel::new(m.clone(), IndependenceMatrix::zeros(2), cop.clone()).is_err());
        assert!(RVineModel::new(m, IndependenceMatrix::ones(2), cop).is_ok());
    }

    #[test]
    fn simulation_is_deterministic() {
        let model = gaussian_model(fixtures::six_dim_matrix(), 0.6, 3);
        let a = model.simulate(50, 9).unwrap();
        let b = model.simulate(50, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, model.simulate(50, 10).unwrap());
        // rows are independent of n
        let c = model.simulate(20, 9).unwrap();
        assert_eq!(&a.var(3)[..20], c.var(3));
    }

    #[test]
    fn table_roundtrip() {
        let mut model = gaussian_model(fixtures::six_dim_matrix(), 0.6, 2);
        model.copulas[5][0] = PairCopula::new(Family::Clayton, vec![1.5], 90).unwrap();
        model.copulas[4][1] = PairCopula::new(Family::StudentT, vec![0.2, 4.0], 0).unwrap();
        let back = RVineModel::from_texts(
            &model.matrix().to_text(),
            &model.independence().to_text(),
            &model.copula_table(),
        )
        .unwrap();
        assert_eq!(back, model);
        assert_eq!(model.n_params(), 9 + 1);
    }

    #[test]
    fn table_errors_name_line() {
        let m = RVineMatrix::new(vec![vec![2, 0], vec![1, 1]]).unwrap();
        let f = IndependenceMatrix::ones(2);
        let bad = "# header\n2 1 gaussian 0 1.5\n";
        match RVineModel::from_texts(&m.to_text(), &f.to_text(), bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(RVineModel::from_texts(&m.to_text(), &f.to_text(), "1 2 gaussian 0 0.5\n").is_err());
    }

    #[test]
    fn pair_copula_orientation() {
        let mut model = gaussian_model(fixtures::six_dim_matrix(), 0.6, 1);
        let (r, c) = model.matrix().find_pair(3, 4).unwrap();
        model.copulas[r][c] = PairCopula::new(Family::Clayton, vec![1.5], 90).unwrap();
        let diag = model.matrix().get(c, c);
        let other = if diag == 3 { 4 } else { 3 };
        assert_eq!(model.pair_copula(diag, other).unwrap().rotation(), 90);
        assert_eq!(model.pair_copula(other, diag).unwrap().rotation(), 270);
    }
}
