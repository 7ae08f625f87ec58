//! Score-based DAG search with a Gaussian BIC.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::sem::solve_normal;
use crate::dag::Dag;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Node};

#[derive(Clone, Debug, PartialEq)]
pub struct HillClimbOptions {
    pub max_parents: usize,
    pub restarts: usize,
    /// Random moves applied before each restart.
    pub perturbation: usize,
    pub tabu_len: usize,
    pub seed: u64,
}

impl HillClimbOptions {
    pub fn new(max_parents: usize) -> Self {
        HillClimbOptions { max_parents, restarts: 10, perturbation: 0, tabu_len: 10, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct HillClimbResult {
    pub dag: Dag,
    /// BIC of `dag`; smaller is better.
    pub bic: f64,
    /// `-BIC` after every accepted move of the winning run, starting state first.
    pub trace: Vec<f64>,
    pub moves: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
enum Move {
    Add(Node, Node),
    Delete(Node, Node),
    Reverse(Node, Node),
    /// Replace parent `.0` of `.2` by `.1`.
    Swap(Node, Node, Node),
}

/// Per-node BIC terms from the sample covariance.
struct Scorer {
    cov: DMatrix<f64>,
    n: f64,
    cache: HashMap<(Node, Vec<Node>), f64>,
}

impl Scorer {
    fn new(data: &Dataset) -> Result<Self> {
        let (n, d) = (data.n(), data.d());
        if n < 2 {
            return Err(Error::invalid("need at least two observations"));
        }
        let centered: Vec<Vec<f64>> = data
            .columns()
            .iter()
            .map(|c| {
                let m = c.iter().sum::<f64>() / n as f64;
                c.iter().map(|x| x - m).collect()
            })
            .collect();
        let cov = DMatrix::from_fn(d, d, |i, j| {
            centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum::<f64>() / n as f64
        });
        if (0..d).any(|i| !(cov[(i, i)] > 0.0)) {
            return Err(Error::DegenerateData("a column has zero variance".into()));
        }
        Ok(Scorer { cov, n: n as f64, cache: HashMap::new() })
    }

    /// `-2 loglik` of the regression of `v` on `parents` plus `|parents| ln n`.
    fn node(&mut self, v: Node, parents: &[Node]) -> f64 {
        if let Some(&s) = self.cache.get(&(v, parents.to_vec())) {
            return s;
        }
        let i = v - 1;
        let mut resid = self.cov[(i, i)];
        if !parents.is_empty() {
            let k = parents.len();
            let a = DMatrix::from_fn(k, k, |r, c| self.cov[(parents[r] - 1, parents[c] - 1)]);
            let b = DVector::from_iterator(k, parents.iter().map(|&p| self.cov[(p - 1, i)]));
            let beta = solve_normal(a, &b);
            resid -= beta.dot(&b);
        }
        let resid = resid.max(1e-12 * self.cov[(i, i)]);
        let s = self.n * ((2.0 * std::f64::consts::PI * resid).ln() + 1.0) + parents.len() as f64 * self.n.ln();
        self.cache.insert((v, parents.to_vec()), s);
        s
    }

    fn total(&mut self, g: &DirectedGraph) -> f64 {
        g.nodes()
            .collect::<Vec<_>>()
            .into_iter()
            .map(|v| {
                let pa: Vec<Node> = g.parents(v).iter().copied().collect();
                self.node(v, &pa)
            })
            .sum()
    }
}

/// Gaussian BIC of `g` on `data` (smaller is better).
pub fn gaussian_bic(g: &Dag, data: &Dataset) -> Result<f64> {
    if g.len() != data.d() {
        return Err(Error::invalid("DAG and data dimensions differ"));
    }
    Ok(Scorer::new(data)?.total(g.graph()))
}

fn parents_with(g: &DirectedGraph, v: Node, add: Option<Node>, remove: Option<Node>) -> Vec<Node> {
    let mut pa: Vec<Node> = g.parents(v).iter().copied().filter(|&p| Some(p) != remove).collect();
    if let Some(a) = add {
        pa.push(a);
        pa.sort_unstable();
    }
    pa
}

/// Best-improvement hill climbing over single-arrow additions, deletions
/// and reversals, never exceeding `max_parents`, plus parent swaps at nodes
/// already at the cap. Recently deleted or reversed arrows are tabu for
/// re-insertion. Restarts perturb the best
/// DAG found so far with random legal moves.
pub fn hill_climb_dag(data: &Dataset, opts: &HillClimbOptions) -> Result<HillClimbResult> {
    if opts.max_parents == 0 {
        return Err(Error::invalid("max_parents must be at least 1"));
    }
    let d = data.d();
    if d == 0 {
        return Err(Error::invalid("empty dataset"));
    }
    let mut scorer = Scorer::new(data)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let perturbation = if opts.perturbation == 0 { d.max(2) } else { opts.perturbation };

    let start = DirectedGraph::new(1..=d, std::iter::empty()).expect("edgeless graph");
    let (mut best_g, mut best_trace, mut moves) = climb(start, &mut scorer, opts);
    let mut best_score = *best_trace.last().unwrap();
    for _ in 0..opts.restarts {
        let mut g = best_g.clone();
        perturb(&mut g, perturbation, opts.max_parents, &mut rng);
        let (g, trace, m) = climb(g, &mut scorer, opts);
        moves += m;
        let s = *trace.last().unwrap();
        if s > best_score + 1e-9 {
            best_score = s;
            best_g = g;
            best_trace = trace;
        }
    }
    let dag = Dag::new(best_g).expect("search keeps the graph acyclic");
    Ok(HillClimbResult { dag, bic: -best_score, trace: best_trace, moves })
}

fn climb(mut g: DirectedGraph, scorer: &mut Scorer, opts: &HillClimbOptions) -> (DirectedGraph, Vec<f64>, usize) {
    let d = g.node_count();
    let mut score = -scorer.total(&g);
    let mut trace = vec![score];
    let mut tabu: VecDeque<(Node, Node)> = VecDeque::new();
    loop {
        let mut best: Option<(f64, Move)> = None;
        let consider = |gain: f64, mv: Move, best: &mut Option<(f64, Move)>| {
            if gain > 1e-9 && best.is_none_or(|(b, _)| gain > b) {
                *best = Some((gain, mv));
            }
        };
        for u in 1..=d {
            for v in 1..=d {
                if u == v {
                    continue;
                }
                let old_v = scorer.node(v, &parents_with(&g, v, None, None));
                if g.has_arrow(u, v) {
                    let del_v = scorer.node(v, &parents_with(&g, v, None, Some(u)));
                    consider(old_v - del_v, Move::Delete(u, v), &mut best);
                    // reversal u->v to v->u
                    if g.parents(u).len() < opts.max_parents && !tabu.contains(&(v, u)) && !has_other_path(&g, u, v) {
                        let old_u = scorer.node(u, &parents_with(&g, u, None, None));
                        let new_u = scorer.node(u, &parents_with(&g, u, Some(v), None));
                        consider(old_v - del_v + old_u - new_u, Move::Reverse(u, v), &mut best);
                    }
                } else if !g.has_arrow(v, u)
                    && g.parents(v).len() < opts.max_parents
                    && !tabu.contains(&(u, v))
                    && !g.has_path(v, u)
                {
                    let add_v = scorer.node(v, &parents_with(&g, v, Some(u), None));
                    consider(old_v - add_v, Move::Add(u, v), &mut best);
                } else if !g.has_arrow(v, u)
                    && g.parents(v).len() == opts.max_parents
                    && !tabu.contains(&(u, v))
                    && !g.has_path(v, u)
                {
                    let current: Vec<Node> = g.parents(v).iter().copied().collect();
                    for w in current {
                        let swap_v = scorer.node(v, &parents_with(&g, v, Some(u), Some(w)));
                        consider(old_v - swap_v, Move::Swap(w, u, v), &mut best);
                    }
                }
            }
        }
        let Some((gain, mv)) = best else { break };
        match mv {
            Move::Add(u, v) => g.add_arrow(u, v).expect("checked"),
            Move::Delete(u, v) => {
                g.remove_arrow(u, v);
                tabu.push_back((u, v));
            }
            Move::Reverse(u, v) => {
                g.remove_arrow(u, v);
                g.add_arrow(v, u).expect("checked");
                tabu.push_back((u, v));
            }
            Move::Swap(w, u, v) => {
                g.remove_arrow(w, v);
                g.add_arrow(u, v).expect("checked");
                tabu.push_back((w, v));
            }
        }
        while tabu.len() > opts.tabu_len {
            tabu.pop_front();
        }
        score += gain;
        trace.push(score);
    }
    let moves = trace.len() - 1;
    // recompute to shed accumulated rounding
    let exact = -scorer.total(&g);
    *trace.last_mut().unwrap() = exact;
    (g, trace, moves)
}

/// Path `from -> ... -> to` other than the direct arrow.
fn has_other_path(g: &DirectedGraph, from: Node, to: Node) -> bool {
    g.children(from).iter().any(|&c| c != to && g.has_path(c, to))
}

fn perturb<R: Rng>(g: &mut DirectedGraph, count: usize, cap: usize, rng: &mut R) {
    let d = g.node_count();
    for _ in 0..count {
        let mut legal = Vec::new();
        for u in 1..=d {
            for v in 1..=d {
                if u == v {
                    continue;
                }
                if g.has_arrow(u, v) {
                    legal.push(Move::Delete(u, v));
                    if g.parents(u).len() < cap && !has_other_path(g, u, v) {
                        legal.push(Move::Reverse(u, v));
                    }
                } else if !g.has_arrow(v, u) && g.parents(v).len() < cap && !g.has_path(v, u) {
                    legal.push(Move::Add(u, v));
                }
            }
        }
        match legal.choose(rng) {
            Some(&Move::Add(u, v)) => g.add_arrow(u, v).expect("legal"),
            Some(&Move::Delete(u, v)) => {
                g.remove_arrow(u, v);
            }
            Some(&Move::Reverse(u, v)) => {
                g.remove_arrow(u, v);
                g.add_arrow(v, u).expect("legal");
            }
            Some(&Move::Swap(..)) | None => return,
        }
    }
}
