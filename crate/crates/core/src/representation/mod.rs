//! Moving between DAGs and vine structures: exact representations, the
//! checks deciding when one exists, and the SEM direction from vines to DAGs.

mod heuristic;

pub use heuristic::{represent_dag_rvine, union_skeleton_graph, HeuristicOptions, Representation, SelectedEdge};

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::graph::{edge_key, Node, UndirectedGraph};
use crate::vine::{
    complete, complete_with_diagonal, search_diagonal, IndependenceMatrix, RVineMatrix, SearchOutcome,
    VineTreeSequence,
};

/// Default step budget for diagonal searches.
pub const DEFAULT_BUDGET: usize = 10_000;

/// DAG implied by the SEM of a vine: every conditioned pair in the modelled
/// trees becomes an arrow from the later diagonal entry to the earlier one.
/// Partial sequences are completed first; only their trees yield arrows.
pub fn rvine_to_dag(v: &VineTreeSequence) -> Result<Dag> {
    let m = if v.is_complete() {
        RVineMatrix::from_trees(v)?
    } else {
        complete(v, DEFAULT_BUDGET)?
    };
    Ok(matrix_to_dag(&m, v.depth()))
}

/// Arrows `M[r][c] -> M[c][c]` for the cells of trees `1..=k`.
pub fn matrix_to_dag(m: &RVineMatrix, k: usize) -> Dag {
    let d = m.d();
    let arrows = m
        .cells()
        .into_iter()
        .filter(|&(r, _)| m.tree_of_row(r) <= k)
        .map(|(r, c)| (m.get(r, c), m.get(c, c)));
    Dag::from_arrows(1..=d, arrows).expect("arrows point left in the diagonal order")
}

/// `F[r][c] = 0` iff the cell's conditioned pair is d-separated by its
/// conditioning set in `g`.
pub fn independence_matrix_for(m: &RVineMatrix, g: &Dag) -> Result<IndependenceMatrix> {
    let d = m.d();
    if g.len() != d || g.nodes().any(|v| v == 0 || v > d) {
        return Err(Error::invalid(format!("DAG nodes do not match the labels 1..{d} of the matrix")));
    }
    let mut f = IndependenceMatrix::zeros(d);
    for (r, c) in m.cells() {
        let sep = g.d_separated_nodes(m.get(r, c), m.get(c, c), &m.conditioning(r, c))?;
        f.set(r, c, !sep);
    }
    Ok(f)
}

fn check_labels(g: &Dag) -> Result<usize> {
    let d = g.len();
    if g.nodes().enumerate().any(|(i, v)| v != i + 1) {
        return Err(Error::invalid("DAG nodes must be labelled 1..d"));
    }
    Ok(d)
}

/// Exact 1-truncated representation of a DAG with at most one parent per
/// node. Weakly connected components are joined through their roots; those
/// joining cells get `F = 0`.
pub fn represent_markov_tree(g: &Dag) -> Result<(RVineMatrix, IndependenceMatrix)> {
    let d = check_labels(g)?;
    if let Some(v) = g.nodes().find(|&v| g.parents(v).len() > 1) {
        return Err(Error::invalid(format!("node {v} has {} parents; expected at most one", g.parents(v).len())));
    }
    if d == 1 {
        return Ok((RVineMatrix::new(vec![vec![1]])?, IndependenceMatrix::zeros(1)));
    }
    let roots: Vec<Node> = g
        .skeleton()
        .components()
        .iter()
        .map(|comp| *comp.iter().find(|&&v| g.parents(v).is_empty()).expect("component has a root"))
        .collect();
    let mut arrows = g.arrows();
    arrows.extend(roots.windows(2).map(|w| (w[0], w[1])));
    let joined = Dag::from_arrows(1..=d, arrows.iter().copied())?;
    let mut diag = joined.topological_ordering().into_vec();
    diag.reverse();
    let t1 = VineTreeSequence::from_tree_edges(d, vec![arrows])?;
    let m = complete_with_diagonal(&t1, &diag)?;
    let mut f = IndependenceMatrix::zeros(d);
    for c in 0..d - 1 {
        if g.has_arrow(m.get(d - 1, c), m.get(c, c)) {
            f.set(d - 1, c, true);
        }
    }
    Ok((m, f))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// Result of [`check_sufficient_conditions`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SufficiencyWitness {
    /// Every arrow is a conditioned pair in the given trees.
    pub holds_a1: bool,
    /// Some decreasing topological ordering is the diagonal of a completion.
    pub a2: Verdict,
    /// Diagonal that was found, left to right.
    pub ordering_used: Option<Vec<Node>>,
    pub violations: Vec<String>,
    #[serde(skip)]
    pub completion: Option<RVineMatrix>,
}

impl SufficiencyWitness {
    pub fn holds_a2(&self) -> bool {
        self.a2 == Verdict::Holds
    }

    pub fn holds(&self) -> bool {
        self.holds_a1 && self.holds_a2()
    }
}

/// Checks whether trees `T1..Tk` can be completed so that every tree above
/// `k` holds only conditional independences of `g`.
pub fn check_sufficient_conditions(g: &Dag, partial: &VineTreeSequence, budget: usize) -> Result<SufficiencyWitness> {
    let d = check_labels(g)?;
    if partial.d() != d {
        return Err(Error::invalid(format!("vine has dimension {} but the DAG has {d} nodes", partial.d())));
    }
    if partial.depth() == 0 {
        return Err(Error::InvalidVine("need at least the first tree".into()));
    }
    let mut pairs = BTreeSet::new();
    for (_, tree) in partial.trees() {
        pairs.extend(tree.iter().map(|e| e.conditioned));
    }
    let mut violations = Vec::new();
    for (w, v) in g.arrows() {
        if !pairs.contains(&edge_key(v, w)) {
            violations.push(format!("arrow {w} -> {v} is not a conditioned pair in trees 1..{}", partial.depth()));
        }
    }
    let holds_a1 = violations.is_empty();
    let outcome = search_diagonal(
        partial,
        |placed, v| g.parents(v).iter().all(|&p| placed[p]),
        budget,
    );
    let (a2, ordering_used, completion) = match outcome {
        SearchOutcome::Found(diag) => {
            let m = complete_with_diagonal(partial, &diag)?;
            (Verdict::Holds, Some(diag), Some(m))
        }
        SearchOutcome::Exhausted => {
            violations.push("no decreasing topological ordering is a compatible diagonal".into());
            (Verdict::Fails, None, None)
        }
        SearchOutcome::BudgetExceeded => {
            violations.push(format!("diagonal search stopped after {budget} steps"));
            (Verdict::Inconclusive, None, None)
        }
    };
    Ok(SufficiencyWitness {
        holds_a1,
        a2,
        ordering_used,
        violations,
        completion,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SpecialStructure {
    /// Parents are among the `k` immediate predecessors in this ordering.
    DVine(Vec<Node>),
    /// Parents lie among the first `k` nodes of this ordering.
    CVine(Vec<Node>),
    None,
}

/// Looks for a topological ordering certifying a D-vine or C-vine
/// representation, with `k` the largest parent count.
pub fn detect_special_structure(g: &Dag) -> SpecialStructure {
    let k = g.max_parents();
    let d_ok = |prefix: &[Node], v: Node| {
        let lo = prefix.len().saturating_sub(k);
        g.parents(v).iter().all(|p| prefix[lo..].contains(p))
    };
    if let Some(order) = ordering_search(g, &d_ok) {
        return SpecialStructure::DVine(order);
    }
    let c_ok = |prefix: &[Node], v: Node| {
        let hi = prefix.len().min(k);
        g.parents(v).iter().all(|p| prefix[..hi].contains(p))
    };
    if let Some(order) = ordering_search(g, &c_ok) {
        return SpecialStructure::CVine(order);
    }
    SpecialStructure::None
}

fn ordering_search(g: &Dag, ok: &dyn Fn(&[Node], Node) -> bool) -> Option<Vec<Node>> {
    fn rec(g: &Dag, ok: &dyn Fn(&[Node], Node) -> bool, prefix: &mut Vec<Node>, used: &mut BTreeSet<Node>) -> bool {
        if prefix.len() == g.len() {
            return true;
        }
        let ready: Vec<Node> = g
            .nodes()
            .filter(|v| !used.contains(v) && g.parents(*v).iter().all(|p| used.contains(p)))
            .collect();
        for v in ready {
            if !ok(prefix, v) {
                continue;
            }
            prefix.push(v);
            used.insert(v);
            if rec(g, ok, prefix, used) {
                return true;
            }
            used.remove(&v);
            prefix.pop();
        }
        false
    }
    let mut prefix = Vec::new();
    rec(g, ok, &mut prefix, &mut BTreeSet::new()).then_some(prefix)
}

/// Result of [`check_necessary_conditions`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NecessaryCheck {
    pub holds: bool,
    /// Nodes with `k` parents whose family is not a path in the tree.
    pub non_path_families: Vec<Node>,
    /// The union of the family subgraphs contains a cycle.
    pub union_cyclic: bool,
}

/// Tests whether `t1` can start a `k`-truncated representation: for every
/// node with `k` parents, the tree restricted to the node and its parents
/// must be a path through all of them, and the union of these subgraphs must
/// be acyclic.
pub fn check_necessary_conditions(g: &Dag, t1: &UndirectedGraph) -> Result<NecessaryCheck> {
    if t1.node_set() != g.node_set() || !t1.is_tree() {
        return Err(Error::invalid("first tree must be a spanning tree on the DAG's nodes"));
    }
    let k = g.max_parents();
    let mut non_path = Vec::new();
    let mut union = UndirectedGraph::new(g.nodes());
    for v in g.nodes().filter(|&v| k > 0 && g.parents(v).len() == k) {
        let mut family = g.parents(v).clone();
        family.insert(v);
        let sub = t1.induced_subgraph(&family)?;
        let is_path = sub.is_tree() && family.iter().all(|&x| sub.degree(x) <= 2);
        if !is_path {
            non_path.push(v);
        }
        for (a, b) in sub.edges() {
            union.add_edge(a, b)?;
        }
    }
    let union_cyclic = !union.is_acyclic();
    Ok(NecessaryCheck {
        holds: non_path.is_empty() && !union_cyclic,
        non_path_families: non_path,
        union_cyclic,
    })
}

/// Lower bound on the truncation level of any vine starting with `t1`: the
/// largest tree distance between a node and one of its parents. Also returns
/// the distances per node, parents in ascending order.
pub fn truncation_lower_bound(g: &Dag, t1: &UndirectedGraph) -> Result<(usize, BTreeMap<Node, Vec<(Node, usize)>>)> {
    if t1.node_set() != g.node_set() || !t1.is_tree() {
        return Err(Error::invalid("first tree must be a spanning tree on the DAG's nodes"));
    }
    let mut table = BTreeMap::new();
    let mut bound = 0;
    for v in g.nodes() {
        let mut row = Vec::new();
        for &w in g.parents(v) {
            let dist = t1.distance(v, w)?.expect("tree is connected");
            bound = bound.max(dist);
            row.push((w, dist));
        }
        table.insert(v, row);
    }
    Ok((bound, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn sem_dag_of_two_dim_vine() {
        let v = VineTreeSequence::from_tree_edges(2, vec![vec![(1, 2)]]).unwrap();
        let g = rvine_to_dag(&v).unwrap();
        assert_eq!(g.arrows(), vec![(1, 2)]);
    }

    #[test]
    fn sem_dag_of_full_vine_has_all_pairs() {
        let g = rvine_to_dag(&fixtures::six_dim_vine()).unwrap();
        assert_eq!(g.arrow_count(), 15);
        assert_eq!(g.max_parents(), 5);
        // diagonal (4,5,3,6,2,1): 4 is the last node and receives every arrow
        assert_eq!(g.parents(4).len(), 5);
        assert!(g.parents(1).is_empty());
    }

    #[test]
    fn markov_tree_path_is_dvine() {
        let g = Dag::from_arrows(1..=6, (1..6).map(|i| (i, i + 1))).unwrap();
        let (m, f) = represent_markov_tree(&g).unwrap();
        assert_eq!(m.diagonal(), vec![6, 5, 4, 3, 2, 1]);
        assert_eq!(f.truncation_level(), 1);
        let t1 = m.to_trees().tree_graph(1);
        assert_eq!(t1.edges(), g.skeleton().edges());
        // every tree of a D-vine is a path
        for (t, _) in m.to_trees().trees() {
            let tg = m.to_trees().tree_graph(t);
            assert!(tg.nodes().all(|v| tg.degree(v) <= 2));
        }
    }

    #[test]
    fn markov_tree_star_is_cvine() {
        let g = Dag::from_arrows(1..=4, [(1, 2), (1, 3), (1, 4)]).unwrap();
        let (m, f) = represent_markov_tree(&g).unwrap();
        assert_eq!(f.truncation_level(), 1);
        let trees = m.to_trees();
        for (t, _) in trees.trees() {
            let tg = trees.tree_graph(t);
            let max_deg = tg.nodes().map(|v| tg.degree(v)).max().unwrap();
            assert_eq!(max_deg, tg.edge_count(), "tree {t} is a star");
        }
    }

    #[test]
    fn markov_tree_two_dim() {
        let g = Dag::from_arrows(1..=2, [(1, 2)]).unwrap();
        let (m, f) = represent_markov_tree(&g).unwrap();
        assert_eq!(m.rows(), &[vec![2, 0], vec![1, 1]]);
        assert!(f.get(1, 0));
    }

    #[test]
    fn markov_tree_rejects_two_parents() {
        assert!(represent_markov_tree(&fixtures::g1()).is_err());
    }

    #[test]
    fn markov_tree_forest() {
        let g = Dag::from_arrows(1..=5, [(1, 2), (3, 4)]).unwrap();
        let (m, f) = represent_markov_tree(&g).unwrap();
        assert_eq!(f.count_ones(), 2);
        assert_eq!(f.truncation_level(), 1);
        let fd = independence_matrix_for(&m, &g).unwrap();
        assert_eq!(fd, f);
    }

    #[test]
    fn g1_sufficient_conditions() {
        let g = fixtures::g1();
        let partial = fixtures::six_dim_vine().truncated(2);
        let w = check_sufficient_conditions(&g, &partial, DEFAULT_BUDGET).unwrap();
        assert!(w.holds_a1);
        assert!(w.holds_a2());
        let diag = w.ordering_used.clone().unwrap();
        let mut rev = diag.clone();
        rev.reverse();
        assert!(g.is_topological_ordering(&rev));
        let f = independence_matrix_for(w.completion.as_ref().unwrap(), &g).unwrap();
        assert!(f.truncation_level() <= 2);
    }

    #[test]
    fn g1_first_tree_alone_misses_arrows() {
        let w = check_sufficient_conditions(&fixtures::g1(), &fixtures::six_dim_vine().truncated(1), DEFAULT_BUDGET)
            .unwrap();
        assert!(!w.holds_a1);
    }

    #[test]
    fn special_structures() {
        assert!(matches!(detect_special_structure(&fixtures::dvine_dag()), SpecialStructure::DVine(_)));
        assert!(matches!(detect_special_structure(&fixtures::cvine_dag()), SpecialStructure::CVine(_)));
        assert_eq!(detect_special_structure(&fixtures::g2()), SpecialStructure::None);
    }

    #[test]
    fn necessary_conditions_g1() {
        let t1 = fixtures::six_dim_vine().tree_graph(1);
        assert!(check_necessary_conditions(&fixtures::g1(), &t1).unwrap().holds);
    }

    #[test]
    fn lower_bound_on_long_path() {
        let t1 = UndirectedGraph::from_edges(1..=7, [(7, 5), (5, 4), (4, 3), (3, 1), (2, 3), (6, 5)]).unwrap();
        let g = Dag::from_arrows(1..=7, [(1, 7)]).unwrap();
        assert_eq!(truncation_lower_bound(&g, &t1).unwrap().0, 4);
    }

    #[test]
    fn lower_bound_of_skeleton_is_one() {
        let g = Dag::from_arrows(1..=4, [(1, 2), (2, 3), (2, 4)]).unwrap();
        assert_eq!(truncation_lower_bound(&g, &g.skeleton()).unwrap().0, 1);
    }

    #[test]
    fn independence_matrix_extremes() {
        let m = fixtures::six_dim_matrix();
        assert_eq!(independence_matrix_for(&m, &Dag::empty(6)).unwrap().count_ones(), 0);
        let complete = Dag::from_arrows(1..=6, (1..=6).flat_map(|a| (a + 1..=6).map(move |b| (a, b)))).unwrap();
        assert_eq!(independence_matrix_for(&m, &complete).unwrap(), IndependenceMatrix::ones(6));
    }
}
