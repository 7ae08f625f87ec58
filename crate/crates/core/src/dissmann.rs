//! Greedy tree-by-tree vine selection on absolute Kendall's tau.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::copula::{copula_scale, fit_pair_with_tau, kendall_tau, Family, FitOptions, PairCopula, PseudoObs, RVineModel};
use crate::error::{Error, Result};
use crate::graph::{max_spanning_tree_indexed, Node};
use crate::vine::{EdgeLabel, IndependenceMatrix, RVineMatrix, VineTreeSequence};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub families: Vec<Family>,
    /// Trees above this level are independent.
    pub truncation: Option<usize>,
    pub alpha: Option<f64>,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig { families: Family::ALL.to_vec(), truncation: None, alpha: None }
    }
}

impl BaselineConfig {
    fn fit_options(&self) -> FitOptions {
        FitOptions { families: self.families.clone(), alpha: self.alpha }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        self.fit_options().validate()?;
        if let Some(t) = self.truncation {
            if t == 0 || t >= d.max(2) {
                return Err(Error::invalid(format!("truncation level {t} outside 1..{}", d.saturating_sub(1))));
            }
        }
        Ok(())
    }
}

/// Conditioned pair (sorted) and conditioning set of the edge joining two
/// edges with complete unions `u1`, `u2`.
fn joined_label(u1: &BTreeSet<Node>, u2: &BTreeSet<Node>) -> EdgeLabel {
    let given: BTreeSet<Node> = u1.intersection(u2).copied().collect();
    let diff: Vec<Node> = u1.symmetric_difference(u2).copied().collect();
    debug_assert_eq!(diff.len(), 2, "proximity guarantees two conditioned variables");
    ((diff[0].min(diff[1]), diff[0].max(diff[1])), given)
}

/// Selects the trees one at a time as maximum spanning trees of `|tau|`
/// over admissible pairs, fitting each chosen edge before moving up.
/// Accepts u- or z-scale data.
pub fn dissmann_select(data: &crate::data::Dataset, cfg: &BaselineConfig) -> Result<RVineModel> {
    let d = data.d();
    cfg.validate(d)?;
    if data.n() < 10 {
        return Err(Error::invalid(format!("need at least 10 observations, got {}", data.n())));
    }
    if d < 2 {
        return Err(Error::invalid("need at least two variables"));
    }
    let opts = cfg.fit_options();
    let top = cfg.truncation.unwrap_or(d - 1);
    let (u, _) = copula_scale(data, d)?;
    let mut obs = PseudoObs::new(u);
    let mut seq = VineTreeSequence::empty(d)?;
    // fitted copula per edge, oriented as C(F(a|D), F(b|D)) with a < b
    let mut fitted: BTreeMap<(Node, Node), PairCopula> = BTreeMap::new();

    for t in 1..d {
        let (n_nodes, cands): (usize, Vec<(usize, usize)>) = if t == 1 {
            (d, (0..d).flat_map(|a| (a + 1..d).map(move |b| (a, b))).collect())
        } else {
            (d - t + 1, seq.proximity_candidates(t - 1))
        };
        let labels: Vec<EdgeLabel> = if t == 1 {
            cands.iter().map(|&(a, b)| ((a + 1, b + 1), BTreeSet::new())).collect()
        } else {
            let prev = seq.tree(t - 1);
            cands
                .iter()
                .map(|&(i, j)| joined_label(&prev[i].complete_union(), &prev[j].complete_union()))
                .collect()
        };
        let mut taus = Vec::with_capacity(cands.len());
        let mut weighted = Vec::with_capacity(cands.len());
        for (idx, (&(i, j), label)) in cands.iter().zip(&labels).enumerate() {
            let tau = if t <= top {
                let ((a, b), given) = label;
                kendall_tau(obs.get(*a, given), obs.get(*b, given))?
            } else {
                0.0
            };
            taus.push(tau);
            weighted.push((i, j, tau.abs(), (label.clone(), idx)));
        }
        let chosen = max_spanning_tree_indexed(n_nodes, &weighted)?;
        let offset = usize::from(t == 1);
        seq.push_tree(chosen.iter().map(|&k| (cands[k].0 + offset, cands[k].1 + offset)).collect())?;
        if t > top {
            continue;
        }
        for &k in &chosen {
            let ((a, b), given) = &labels[k];
            let fit = fit_pair_with_tau(obs.get(*a, given), obs.get(*b, given), taus[k], &opts)?;
            if t < top {
                obs.propagate(&fit.copula, *a, *b, given);
            }
            fitted.insert((*a, *b), fit.copula);
        }
    }

    let matrix = RVineMatrix::from_trees(&seq)?;
    let mut f = IndependenceMatrix::zeros(d);
    let mut copulas = vec![vec![PairCopula::independence(); d]; d];
    for (r, c) in matrix.cells() {
        let (diag, other) = (matrix.get(c, c), matrix.get(r, c));
        let Some(cop) = fitted.get(&(diag.min(other), diag.max(other))) else { continue };
        if cop.is_independence() {
            continue;
        }
        copulas[r][c] = if diag < other { cop.clone() } else { cop.transposed() };
        f.set(r, c, true);
    }
    RVineModel::new(matrix, f, copulas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::fit_pair;
    use crate::data::{Dataset, Scale};
    use crate::vine::validate_matrix;

    #[test]
    fn two_dimensions_equal_fit_pair() {
        let m = RVineMatrix::from_text("2 0\n1 1\n").unwrap();
        let mut cops = vec![vec![PairCopula::independence(); 2]; 2];
        cops[1][0] = PairCopula::new(Family::Clayton, vec![2.0], 0).unwrap();
        let model = RVineModel::new(m, IndependenceMatrix::ones(2), cops).unwrap();
        let data = model.simulate(400, 5).unwrap();
        let sel = dissmann_select(&data, &BaselineConfig::default()).unwrap();
        let direct = fit_pair(data.var(1), data.var(2), &FitOptions::default()).unwrap().copula;
        assert_eq!(sel.pair_copula(1, 2).unwrap(), direct);
        assert!(validate_matrix(sel.matrix().rows()).is_valid());
    }

    #[test]
    fn truncation_one_keeps_tree_one() {
        let model = RVineModel::independent(crate::fixtures::six_dim_matrix());
        let data = model.simulate(300, 2).unwrap();
        let cfg = BaselineConfig { truncation: Some(1), ..Default::default() };
        let sel = dissmann_select(&data, &cfg).unwrap();
        assert!(sel.truncation_level() <= 1);
        assert!(sel.n_params() <= 2 * 5);
    }

    #[test]
    fn rejects_bad_config() {
        let data = Dataset::from_columns(vec![vec![0.5; 20], vec![0.4; 20]], Scale::U).unwrap();
        let cfg = BaselineConfig { truncation: Some(2), ..Default::default() };
        assert!(matches!(dissmann_select(&data, &cfg), Err(Error::InvalidInput(_))));
        let small = Dataset::from_columns(vec![vec![0.5; 5], vec![0.4; 5]], Scale::U).unwrap();
        assert!(dissmann_select(&small, &BaselineConfig::default()).is_err());
    }
}
