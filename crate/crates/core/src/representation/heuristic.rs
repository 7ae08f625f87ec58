use std::collections::BTreeSet;

use log::warn;
use serde::Serialize;

use super::{independence_matrix_for, truncation_lower_bound};
use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::graph::{edge_key, max_spanning_tree_indexed, Edge, Node, UndirectedGraph};
use crate::vine::{IndependenceMatrix, RVineMatrix, VineTreeSequence};

/// Options for [`represent_dag_rvine`].
#[derive(Clone, Debug, PartialEq)]
pub struct HeuristicOptions {
    /// Weight per DAG, `g[i]` for the DAG with at most `i + 1` parents.
    /// Empty means all ones.
    pub g: Vec<f64>,
    /// Weight of candidate edges whose pair is d-separated; `None` uses `g[0] / 2`.
    pub mu0: Option<f64>,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        HeuristicOptions { g: Vec::new(), mu0: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectedEdge {
    pub conditioned: (Node, Node),
    pub conditioning: Vec<Node>,
    pub weight: f64,
    /// Pair copula fixed to independence.
    pub independent: bool,
}

/// Output of [`represent_dag_rvine`].
#[derive(Clone, Debug)]
pub struct Representation {
    pub trees: VineTreeSequence,
    pub matrix: RVineMatrix,
    pub independence: IndependenceMatrix,
    pub truncation_level: usize,
    pub lower_bound: usize,
    pub selected: Vec<Vec<SelectedEdge>>,
    pub warnings: Vec<String>,
}

fn check_weights(k: usize, g: &[f64]) -> Result<Vec<f64>> {
    let g = if g.is_empty() { vec![1.0; k] } else { g.to_vec() };
    if g.len() != k {
        return Err(Error::invalid(format!("{} weights given for {k} DAGs", g.len())));
    }
    if g.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::invalid("weights g(i) must be positive"));
    }
    if g.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::invalid("weights g(i) must be non-increasing"));
    }
    Ok(g)
}

/// Union of the DAG skeletons; an edge weighs the sum of `g[i]` over the DAGs
/// containing it.
pub fn union_skeleton_graph(dags: &[Dag], g: &[f64]) -> Result<UndirectedGraph> {
    let first = dags.first().ok_or_else(|| Error::invalid("need at least one DAG"))?;
    let nodes = first.node_set();
    if dags.iter().any(|dag| dag.node_set() != nodes) {
        return Err(Error::invalid("all DAGs must share one node set"));
    }
    let g = check_weights(dags.len(), g)?;
    let mut edges: std::collections::BTreeMap<Edge, f64> = Default::default();
    for (dag, &w) in dags.iter().zip(&g) {
        for (a, b) in dag.skeleton().edges() {
            *edges.entry((a, b)).or_insert(0.0) += w;
        }
    }
    UndirectedGraph::from_weighted_edges(nodes, edges.into_iter().map(|((a, b), w)| (a, b, w)))
}

/// Heuristic sparse vine for the last (largest) DAG. Tree 1 is a maximum
/// spanning tree of the union skeleton graph; later trees weight proximity
/// candidates by the union weight of their conditioned pair, else by `mu0`
/// when the pair is d-separated in the last DAG, else 0.
pub fn represent_dag_rvine(dags: &[Dag], options: &HeuristicOptions) -> Result<Representation> {
    let h = union_skeleton_graph(dags, &options.g)?;
    let g = check_weights(dags.len(), &options.g)?;
    let mu0 = options.mu0.unwrap_or(g[0] / 2.0);
    let gk = *g.last().unwrap();
    if !(mu0 > 0.0 && mu0 < gk) {
        return Err(Error::invalid(format!("mu0 = {mu0} must lie in (0, {gk})")));
    }
    let last = dags.last().unwrap();
    let d = last.len();
    if last.nodes().enumerate().any(|(i, v)| v != i + 1) {
        return Err(Error::invalid("DAG nodes must be labelled 1..d"));
    }
    let mut warnings = Vec::new();
    if h.edge_count() == 0 && d > 1 {
        let msg = "all DAGs are edgeless; the vine is fully independent".to_string();
        warn!("{msg}");
        warnings.push(msg);
    }

    // tree 1, with zero-weight links between components
    let mut h1 = h.clone();
    let comps = h.components();
    if comps.len() > 1 {
        for w in comps.windows(2) {
            h1.add_weighted_edge(w[0][0], w[1][0], 0.0)?;
        }
        if h.edge_count() > 0 {
            let msg = format!("union graph has {} components; joined with zero-weight edges", comps.len());
            warn!("{msg}");
            warnings.push(msg);
        }
    }
    let mu1 = |a: Node, b: Node| h.weight(a, b).unwrap_or(0.0);
    let t1 = h1.maximum_spanning_tree()?;

    let mut trees = VineTreeSequence::empty(d)?;
    let mut selected: Vec<Vec<SelectedEdge>> = Vec::new();
    if d > 1 {
        let edges = t1.edges();
        selected.push(
            edges
                .iter()
                .map(|&(a, b)| SelectedEdge {
                    conditioned: (a, b),
                    conditioning: Vec::new(),
                    weight: mu1(a, b),
                    independent: false,
                })
                .collect(),
        );
        trees.push_tree(edges)?;
    }
    for t in 2..d {
        let prev = trees.tree(t - 1);
        let cands = trees.proximity_candidates(t - 1);
        let mut weighted: Vec<(usize, usize, f64, (Edge, Vec<Node>))> = Vec::with_capacity(cands.len());
        for &(i, j) in &cands {
            let ua = prev[i].complete_union();
            let ub = prev[j].complete_union();
            let dset: BTreeSet<Node> = ua.intersection(&ub).copied().collect();
            let a = *ua.difference(&dset).next().unwrap();
            let b = *ub.difference(&dset).next().unwrap();
            let pair = edge_key(a, b);
            let w = match mu1(a, b) {
                x if x != 0.0 => x,
                _ if last.d_separated_nodes(a, b, &dset)? => mu0,
                _ => 0.0,
            };
            let cond: Vec<Node> = dset.into_iter().collect();
            weighted.push((i, j, w, (pair, cond)));
        }
        assert!(!weighted.is_empty(), "proximity candidates of a tree are connected");
        let chosen = max_spanning_tree_indexed(prev.len(), &weighted)
            .expect("proximity candidate graph of a tree is connected");
        let mut chosen_edges: Vec<usize> = chosen;
        chosen_edges.sort_by(|&x, &y| weighted[x].3.cmp(&weighted[y].3));
        selected.push(
            chosen_edges
                .iter()
                .map(|&x| {
                    let (_, _, w, (pair, ref cond)) = weighted[x];
                    SelectedEdge {
                        conditioned: pair,
                        conditioning: cond.clone(),
                        weight: w,
                        independent: false,
                    }
                })
                .collect(),
        );
        trees.push_tree(chosen_edges.iter().map(|&x| (weighted[x].0, weighted[x].1)).collect())?;
    }

    let matrix = RVineMatrix::from_trees(&trees)?;
    let independence = independence_matrix_for(&matrix, last)?;
    for (r, c) in matrix.cells() {
        let t = matrix.tree_of_row(r);
        let pair = edge_key(matrix.get(r, c), matrix.get(c, c));
        if let Some(e) = selected[t - 1].iter_mut().find(|e| e.conditioned == pair) {
            e.independent = !independence.get(r, c);
        }
    }
    let truncation_level = independence.truncation_level();
    let lower_bound = if d > 1 { truncation_lower_bound(last, &t1)?.0 } else { 0 };
    Ok(Representation {
        trees,
        matrix,
        independence,
        truncation_level,
        lower_bound,
        selected,
        warnings,
    })
}
