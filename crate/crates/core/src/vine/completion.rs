//! Completing partial tree sequences into full R-vine matrices.
//!
//! A matrix column adds its diagonal variable `x` to the sub-vine spanned by
//! the diagonal entries to its right, one edge per tree. A diagonal order is
//! therefore compatible with trees `T1..Tk` iff for every suffix `R` of the
//! diagonal, tree `t <= min(k, |R| - 1)` has exactly `|R| - t` edges whose
//! complete union lies in `R`.

use std::collections::BTreeSet;

use super::matrix::RVineMatrix;
use super::structure::VineTreeSequence;
use crate::error::{Error, Result};
use crate::graph::Node;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    /// A compatible diagonal, left to right.
    Found(Vec<Node>),
    /// The search space was exhausted without success.
    Exhausted,
    /// Gave up after the step budget.
    BudgetExceeded,
}

struct UnionIndex {
    /// `by_var[t][x]`: complete unions of tree `t + 1` edges containing `x`.
    by_var: Vec<Vec<Vec<Vec<Node>>>>,
}

impl UnionIndex {
    fn new(partial: &VineTreeSequence) -> Self {
        let d = partial.d();
        let by_var = partial
            .trees()
            .map(|(_, edges)| {
                let mut per = vec![Vec::new(); d + 1];
                for e in edges {
                    let a: Vec<Node> = e.complete_union().into_iter().collect();
                    for &v in &a {
                        per[v].push(a.clone());
                    }
                }
                per
            })
            .collect();
        UnionIndex { by_var }
    }

    /// Whether placing `x` (already marked in `placed`) keeps the suffix
    /// condition, given `size` placed variables.
    fn extends(&self, placed: &[bool], x: Node, size: usize) -> bool {
        let top = self.by_var.len().min(size.saturating_sub(1));
        (0..top).all(|t| {
            self.by_var[t][x]
                .iter()
                .filter(|a| a.iter().all(|&v| placed[v]))
                .count()
                == 1
        })
    }
}

/// Depth-first search for a diagonal compatible with `partial`, filled from
/// the right. `allowed(placed, v)` may veto placing `v` next; `placed` is
/// indexed by label. Labels are tried smallest first.
pub fn search_diagonal<F>(partial: &VineTreeSequence, allowed: F, budget: usize) -> SearchOutcome
where
    F: Fn(&[bool], Node) -> bool,
{
    let d = partial.d();
    let index = UnionIndex::new(partial);
    let mut placed = vec![false; d + 1];
    let mut suffix: Vec<Node> = Vec::with_capacity(d);
    let mut steps = 0usize;

    fn rec<F: Fn(&[bool], Node) -> bool>(
        d: usize,
        index: &UnionIndex,
        allowed: &F,
        placed: &mut Vec<bool>,
        suffix: &mut Vec<Node>,
        steps: &mut usize,
        budget: usize,
    ) -> Option<bool> {
        if suffix.len() == d {
            return Some(true);
        }
        for v in 1..=d {
            if placed[v] || !allowed(placed, v) {
                continue;
            }
            *steps += 1;
            if *steps > budget {
                return None;
            }
            placed[v] = true;
            suffix.push(v);
            if index.extends(placed, v, suffix.len()) {
                match rec(d, index, allowed, placed, suffix, steps, budget) {
                    Some(true) => return Some(true),
                    None => return None,
                    Some(false) => {}
                }
            }
            suffix.pop();
            placed[v] = false;
        }
        Some(false)
    }

    match rec(d, &index, &allowed, &mut placed, &mut suffix, &mut steps, budget) {
        Some(true) => {
            suffix.reverse();
            SearchOutcome::Found(suffix)
        }
        Some(false) => SearchOutcome::Exhausted,
        None => SearchOutcome::BudgetExceeded,
    }
}

/// True if `diag` satisfies the suffix condition for `partial`.
pub fn diagonal_compatible(partial: &VineTreeSequence, diag: &[Node]) -> bool {
    let d = partial.d();
    if diag.len() != d || diag.iter().copied().collect::<BTreeSet<_>>() != (1..=d).collect() {
        return false;
    }
    let index = UnionIndex::new(partial);
    let mut placed = vec![false; d + 1];
    diag.iter().rev().enumerate().all(|(i, &x)| {
        placed[x] = true;
        index.extends(&placed, x, i + 1)
    })
}

/// Matrix with diagonal `diag` whose trees `1..=k` are those of `partial`.
/// Trees above `k` are filled deterministically: each new edge joins the
/// column's previous edge with the smallest-labelled admissible sub-vine edge.
pub fn complete_with_diagonal(partial: &VineTreeSequence, diag: &[Node]) -> Result<RVineMatrix> {
    let d = partial.d();
    let k = partial.depth();
    if k == 0 && d > 1 {
        return Err(Error::InvalidVine("completion needs at least the first tree".into()));
    }
    if !diagonal_compatible(partial, diag) {
        return Err(Error::InvalidVine(format!(
            "diagonal {diag:?} is incompatible with the given trees"
        )));
    }
    // completed edges per tree index t-1: (complete union, conditioned)
    let mut built: Vec<Vec<(BTreeSet<Node>, (Node, Node))>> = vec![Vec::new(); d.saturating_sub(1)];
    let mut m = vec![vec![0; d]; d];
    m[d - 1][d - 1] = diag[d - 1];
    for c in (0..d.saturating_sub(1)).rev() {
        let x = diag[c];
        m[c][c] = x;
        let region: BTreeSet<Node> = diag[c..].iter().copied().collect();
        let mut ys: BTreeSet<Node> = BTreeSet::new();
        let mut pending = Vec::new();
        for t in 1..d - c {
            let y = if t <= k {
                let hits: Vec<_> = partial
                    .tree(t)
                    .iter()
                    .filter(|e| {
                        let a = e.complete_union();
                        a.contains(&x) && a.is_subset(&region)
                    })
                    .collect();
                match hits.as_slice() {
                    [e] if e.has_conditioned(x) && e.conditioning == ys => e.partner(x).unwrap(),
                    _ => {
                        return Err(Error::InvalidVine(format!(
                            "column {} cannot follow tree {t}",
                            c + 1
                        )))
                    }
                }
            } else {
                built[t - 2]
                    .iter()
                    .filter_map(|(a, (j, l))| {
                        if a.len() != ys.len() + 1 || !ys.is_subset(a) {
                            return None;
                        }
                        let y = *a.difference(&ys).next().unwrap();
                        (y == *j || y == *l).then_some(y)
                    })
                    .min()
                    .ok_or_else(|| Error::InvalidVine(format!("no admissible edge for column {} tree {t}", c + 1)))?
            };
            m[d - t][c] = y;
            let mut a = ys.clone();
            a.insert(x);
            a.insert(y);
            pending.push((t, a, (x.min(y), x.max(y))));
            ys.insert(y);
        }
        for (t, a, pair) in pending {
            built[t - 1].push((a, pair));
        }
    }
    let matrix = RVineMatrix::new(m)?;
    let decoded = matrix.to_trees().truncated(k);
    if !decoded.same_structure(partial) {
        return Err(Error::InvalidVine("completion changed the given trees".into()));
    }
    Ok(matrix)
}

/// Completes `partial` with the first compatible diagonal found.
pub fn complete(partial: &VineTreeSequence, budget: usize) -> Result<RVineMatrix> {
    if partial.d() == 1 {
        return RVineMatrix::new(vec![vec![1]]);
    }
    match search_diagonal(partial, |_, _| true, budget) {
        SearchOutcome::Found(diag) => complete_with_diagonal(partial, &diag),
        SearchOutcome::Exhausted => Err(Error::InvalidVine("trees admit no matrix completion".into())),
        SearchOutcome::BudgetExceeded => Err(Error::InvalidVine("diagonal search budget exceeded".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn full_sequence_completes_to_itself() {
        let v = fixtures::six_dim_vine();
        let m = complete(&v, 10_000).unwrap();
        assert!(m.to_trees().same_structure(&v));
        let printed = fixtures::six_dim_matrix();
        assert!(diagonal_compatible(&v, &printed.diagonal()));
        assert_eq!(complete_with_diagonal(&v, &printed.diagonal()).unwrap(), printed);
    }

    #[test]
    fn partial_sequences_complete() {
        let v = fixtures::six_dim_vine();
        for k in 1..5 {
            let m = complete(&v.truncated(k), 10_000).unwrap();
            assert!(m.to_trees().truncated(k).same_structure(&v.truncated(k)));
        }
    }

    #[test]
    fn incompatible_diagonal_rejected() {
        let v = fixtures::six_dim_vine().truncated(2);
        // 4 is a leaf of tree 1, so it cannot be placed before 5 from the right
        assert!(!diagonal_compatible(&v, &[5, 4, 3, 6, 2, 1]));
        assert!(complete_with_diagonal(&v, &[5, 4, 3, 6, 2, 1]).is_err());
    }
}
