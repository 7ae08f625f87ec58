//! Directed acyclic graphs: ancestry queries, orderings, moralization and
//! d-separation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{check_disjoint, edge_key, DirectedGraph, Node, UndirectedGraph};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    graph: DirectedGraph,
    descendants: BTreeMap<Node, BTreeSet<Node>>,
}

/// A node order in which every arrow points forward.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopologicalOrdering {
    order: Vec<Node>,
}

impl TopologicalOrdering {
    pub fn as_slice(&self) -> &[Node] {
        &self.order
    }

    pub fn into_vec(self) -> Vec<Node> {
        self.order
    }

    /// 1-based position of `v`.
    pub fn eta(&self, v: Node) -> Option<usize> {
        self.order.iter().position(|&x| x == v).map(|i| i + 1)
    }
}

impl Dag {
    pub fn new(graph: DirectedGraph) -> Result<Self> {
        if let Some(cycle) = graph.find_cycle() {
            return Err(Error::Cycle(cycle));
        }
        let mut descendants = BTreeMap::new();
        for v in graph.nodes() {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<Node> = graph.children(v).iter().copied().collect();
            while let Some(u) = stack.pop() {
                if seen.insert(u) {
                    stack.extend(graph.children(u).iter().copied());
                }
            }
            descendants.insert(v, seen);
        }
        Ok(Dag { graph, descendants })
    }

    pub fn from_arrows(
        nodes: impl IntoIterator<Item = Node>,
        arrows: impl IntoIterator<Item = (Node, Node)>,
    ) -> Result<Self> {
        Dag::new(DirectedGraph::new(nodes, arrows)?)
    }

    /// DAG on `1..=d` with no arrows.
    pub fn empty(d: usize) -> Self {
        Dag::from_arrows(1..=d, []).expect("edgeless graph is acyclic")
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        self.graph.nodes()
    }

    pub fn node_set(&self) -> BTreeSet<Node> {
        self.graph.nodes().collect()
    }

    pub fn len(&self) -> usize {
        self.graph.node_count()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.node_count() == 0
    }

    pub fn contains(&self, v: Node) -> bool {
        self.graph.contains(v)
    }

    pub fn arrows(&self) -> Vec<(Node, Node)> {
        self.graph.arrows()
    }

    pub fn arrow_count(&self) -> usize {
        self.graph.arrow_count()
    }

    pub fn has_arrow(&self, tail: Node, head: Node) -> bool {
        self.graph.has_arrow(tail, head)
    }

    pub fn adjacent(&self, a: Node, b: Node) -> bool {
        self.graph.adjacent(a, b)
    }

    pub fn parents(&self, v: Node) -> &BTreeSet<Node> {
        self.graph.parents(v)
    }

    pub fn children(&self, v: Node) -> &BTreeSet<Node> {
        self.graph.children(v)
    }

    pub fn descendants(&self, v: Node) -> &BTreeSet<Node> {
        &self.descendants[&v]
    }

    /// Nodes that are neither `v`, its parents, nor its descendants.
    pub fn non_descendants(&self, v: Node) -> BTreeSet<Node> {
        let pa = self.parents(v);
        let de = self.descendants(v);
        self.nodes()
            .filter(|&w| w != v && !pa.contains(&w) && !de.contains(&w))
            .collect()
    }

    /// Largest parent set size, the `k` of a k-DAG.
    pub fn max_parents(&self) -> usize {
        self.nodes().map(|v| self.parents(v).len()).max().unwrap_or(0)
    }

    /// Kahn's algorithm taking the smallest available label first.
    pub fn topological_ordering(&self) -> TopologicalOrdering {
        let mut indeg: BTreeMap<Node, usize> =
            self.nodes().map(|v| (v, self.parents(v).len())).collect();
        let mut ready: BTreeSet<Node> =
            indeg.iter().filter(|(_, &n)| n == 0).map(|(&v, _)| v).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in self.children(v) {
                let n = indeg.get_mut(&c).unwrap();
                *n -= 1;
                if *n == 0 {
                    ready.insert(c);
                }
            }
        }
        TopologicalOrdering { order }
    }

    /// True if `order` lists every node once and all arrows point forward.
    pub fn is_topological_ordering(&self, order: &[Node]) -> bool {
        let pos: BTreeMap<Node, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        pos.len() == order.len()
            && order.len() == self.len()
            && order.iter().all(|v| self.contains(*v))
            && self.arrows().iter().all(|(t, h)| pos[t] < pos[h])
    }

    /// Up to `limit` topological orderings in lexicographic order.
    pub fn topological_orderings(&self, limit: usize) -> Vec<Vec<Node>> {
        fn rec(
            dag: &Dag,
            indeg: &mut BTreeMap<Node, usize>,
            prefix: &mut Vec<Node>,
            out: &mut Vec<Vec<Node>>,
            limit: usize,
        ) {
            if out.len() >= limit {
                return;
            }
            if prefix.len() == dag.len() {
                out.push(prefix.clone());
                return;
            }
            let ready: Vec<Node> = indeg
                .iter()
                .filter(|(v, &n)| n == 0 && !prefix.contains(v))
                .map(|(&v, _)| v)
                .collect();
            for v in ready {
                prefix.push(v);
                for &c in dag.children(v) {
                    *indeg.get_mut(&c).unwrap() -= 1;
                }
                rec(dag, indeg, prefix, out, limit);
                for &c in dag.children(v) {
                    *indeg.get_mut(&c).unwrap() += 1;
                }
                prefix.pop();
            }
        }
        let mut indeg = self.nodes().map(|v| (v, self.parents(v).len())).collect();
        let mut out = Vec::new();
        rec(self, &mut indeg, &mut Vec::new(), &mut out, limit);
        out
    }

    pub fn skeleton(&self) -> UndirectedGraph {
        self.graph.skeleton()
    }

    /// Triples `(u, v, w)` with `u -> v <- w`, `u < w` and `u`, `w` not adjacent.
    pub fn v_structures(&self) -> BTreeSet<(Node, Node, Node)> {
        let mut out = BTreeSet::new();
        for v in self.nodes() {
            let pa: Vec<Node> = self.parents(v).iter().copied().collect();
            for (i, &u) in pa.iter().enumerate() {
                for &w in &pa[i + 1..] {
                    if !self.adjacent(u, w) {
                        out.insert((u, v, w));
                    }
                }
            }
        }
        out
    }

    /// Skeleton plus an edge between every pair of parents sharing a child.
    pub fn moral_graph(&self) -> UndirectedGraph {
        let mut g = self.skeleton();
        for v in self.nodes() {
            let pa: Vec<Node> = self.parents(v).iter().copied().collect();
            for (i, &u) in pa.iter().enumerate() {
                for &w in &pa[i + 1..] {
                    let (a, b) = edge_key(u, w);
                    g.add_edge(a, b).expect("parents are nodes");
                }
            }
        }
        g
    }

    /// Smallest superset of `a` closed under taking parents.
    pub fn ancestral_set(&self, a: &BTreeSet<Node>) -> Result<BTreeSet<Node>> {
        self.check_nodes(a)?;
        let mut out = a.clone();
        let mut stack: Vec<Node> = a.iter().copied().collect();
        while let Some(v) = stack.pop() {
            for &p in self.parents(v) {
                if out.insert(p) {
                    stack.push(p);
                }
            }
        }
        Ok(out)
    }

    /// Sub-DAG on `keep`.
    pub fn induced(&self, keep: &BTreeSet<Node>) -> Result<Dag> {
        self.check_nodes(keep)?;
        let arrows = self
            .arrows()
            .into_iter()
            .filter(|(t, h)| keep.contains(t) && keep.contains(h));
        Dag::from_arrows(keep.iter().copied(), arrows)
    }

    fn check_nodes(&self, set: &BTreeSet<Node>) -> Result<()> {
        match set.iter().find(|v| !self.contains(**v)) {
            Some(&v) => Err(Error::UnknownNode(v)),
            None => Ok(()),
        }
    }

    fn check_query(&self, a: &BTreeSet<Node>, b: &BTreeSet<Node>, s: &BTreeSet<Node>) -> Result<()> {
        check_disjoint(&[a, b, s])?;
        self.check_nodes(a)?;
        self.check_nodes(b)?;
        self.check_nodes(s)
    }

    /// Nodes reachable from `a` by an active chain given `s` (Bayes ball).
    pub fn reachable(&self, a: &BTreeSet<Node>, s: &BTreeSet<Node>) -> Result<BTreeSet<Node>> {
        check_disjoint(&[a, s])?;
        self.check_nodes(a)?;
        self.check_nodes(s)?;
        // colliders are open only if they are in s or have a descendant in s
        let s_anc = self.ancestral_set(s)?;
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
        enum Dir {
            FromChild,
            FromParent,
        }
        let mut visited: BTreeSet<(Node, Dir)> = BTreeSet::new();
        let mut queue: VecDeque<(Node, Dir)> = a.iter().map(|&v| (v, Dir::FromChild)).collect();
        let mut reached = BTreeSet::new();
        while let Some((y, dir)) = queue.pop_front() {
            if !visited.insert((y, dir)) {
                continue;
            }
            let observed = s.contains(&y);
            if !observed {
                reached.insert(y);
            }
            match dir {
                Dir::FromChild if !observed => {
                    queue.extend(self.parents(y).iter().map(|&p| (p, Dir::FromChild)));
                    queue.extend(self.children(y).iter().map(|&c| (c, Dir::FromParent)));
                }
                Dir::FromChild => {}
                Dir::FromParent => {
                    if !observed {
                        queue.extend(self.children(y).iter().map(|&c| (c, Dir::FromParent)));
                    }
                    if s_anc.contains(&y) {
                        queue.extend(self.parents(y).iter().map(|&p| (p, Dir::FromChild)));
                    }
                }
            }
        }
        Ok(reached)
    }

    /// True iff every chain between `a` and `b` is blocked by `s`.
    pub fn d_separated(&self, a: &BTreeSet<Node>, b: &BTreeSet<Node>, s: &BTreeSet<Node>) -> Result<bool> {
        self.check_query(a, b, s)?;
        let reached = self.reachable(a, s)?;
        Ok(b.iter().all(|v| !reached.contains(v)))
    }

    /// d-separation via separation in the moralized ancestral graph.
    pub fn d_separated_oracle(
        &self,
        a: &BTreeSet<Node>,
        b: &BTreeSet<Node>,
        s: &BTreeSet<Node>,
    ) -> Result<bool> {
        self.check_query(a, b, s)?;
        let all: BTreeSet<Node> = a.iter().chain(b).chain(s).copied().collect();
        let anc = self.ancestral_set(&all)?;
        self.induced(&anc)?.moral_graph().separates(s, a, b)
    }

    /// Single-node convenience wrapper around [`Dag::d_separated`].
    pub fn d_separated_nodes(&self, a: Node, b: Node, s: &BTreeSet<Node>) -> Result<bool> {
        self.d_separated(&BTreeSet::from([a]), &BTreeSet::from([b]), s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[Node]) -> BTreeSet<Node> {
        xs.iter().copied().collect()
    }

    fn g1() -> Dag {
        Dag::from_arrows(
            1..=6,
            [(1, 2), (2, 6), (2, 3), (6, 3), (2, 5), (6, 5), (2, 4), (5, 4)],
        )
        .unwrap()
    }

    fn g2() -> Dag {
        Dag::from_arrows(1..=6, [(1, 4), (2, 4), (1, 5), (3, 5), (2, 6), (3, 6)]).unwrap()
    }

    #[test]
    fn g1_queries() {
        let g = g1();
        assert!(g.graph().is_acyclic());
        assert_eq!(g.parents(4), &set(&[2, 5]));
        assert_eq!(g.descendants(2), &set(&[3, 4, 5, 6]));
        assert_eq!(g.non_descendants(5), set(&[1, 3]));
        assert_eq!(g.max_parents(), 2);
        for v in g.nodes() {
            let mut all = g.non_descendants(v);
            all.extend(g.parents(v));
            all.extend(g.descendants(v));
            all.insert(v);
            assert_eq!(all, g.node_set());
        }
    }

    #[test]
    fn cycle_rejected() {
        assert!(matches!(
            Dag::from_arrows(1..=3, [(1, 2), (2, 3), (3, 1)]),
            Err(Error::Cycle(_))
        ));
    }

    #[test]
    fn edgeless_dag() {
        let g = Dag::empty(3);
        assert_eq!(g.non_descendants(2), set(&[1, 3]));
        assert_eq!(g.topological_ordering().into_vec(), vec![1, 2, 3]);
        assert_eq!(g.skeleton().edge_count(), 0);
    }

    #[test]
    fn g1_orderings() {
        let g = g1();
        let ord = g.topological_ordering();
        assert_eq!(ord.as_slice(), &[1, 2, 6, 3, 5, 4]);
        assert_eq!(ord.eta(4), Some(6));
        assert!(g.is_topological_ordering(&[1, 2, 6, 5, 3, 4]));
        assert!(!g.is_topological_ordering(&[2, 1, 6, 5, 3, 4]));
        let all = g.topological_orderings(100);
        assert_eq!(all.len(), 3);
        assert!(all.contains(&vec![1, 2, 6, 5, 4, 3]));
    }

    #[test]
    fn g2_moral_and_v_structures() {
        let g = g2();
        assert_eq!(g.skeleton().edge_count(), 6);
        assert_eq!(g.v_structures(), BTreeSet::from([(1, 4, 2), (1, 5, 3), (2, 6, 3)]));
        let mut expected = g.skeleton().edges();
        expected.extend([(1, 2), (1, 3), (2, 3)]);
        expected.sort();
        assert_eq!(g.moral_graph().edges(), expected);
    }

    #[test]
    fn collider_moralizes_to_triangle() {
        let g = Dag::from_arrows(1..=3, [(1, 3), (2, 3)]).unwrap();
        assert_eq!(g.v_structures(), BTreeSet::from([(1, 3, 2)]));
        assert_eq!(g.moral_graph().edge_count(), 3);
    }

    #[test]
    fn ancestral_sets() {
        let g = g1();
        assert_eq!(g.ancestral_set(&set(&[4])).unwrap(), set(&[1, 2, 4, 5, 6]));
        assert_eq!(g.ancestral_set(&set(&[1])).unwrap(), set(&[1]));
        assert_eq!(g.ancestral_set(&g.node_set()).unwrap(), g.node_set());
    }

    #[test]
    fn local_markov_property_g1() {
        let g = g1();
        for v in g.nodes() {
            let nd = g.non_descendants(v);
            if nd.is_empty() {
                continue;
            }
            assert!(g.d_separated(&set(&[v]), &nd, g.parents(v)).unwrap());
            assert!(g.d_separated_oracle(&set(&[v]), &nd, g.parents(v)).unwrap());
        }
        assert_eq!(g.non_descendants(4), set(&[1, 3, 6]));
    }

    #[test]
    fn adjacent_nodes_never_separated() {
        let g = g1();
        let rest = set(&[3, 4, 5, 6]);
        assert!(!g.d_separated(&set(&[1]), &set(&[2]), &rest).unwrap());
        assert!(!g.d_separated(&set(&[1]), &set(&[2]), &set(&[])).unwrap());
    }

    #[test]
    fn overlapping_query_is_error() {
        let g = g1();
        assert!(g.d_separated(&set(&[1]), &set(&[1]), &set(&[])).is_err());
        assert!(g.d_separated_oracle(&set(&[1]), &set(&[2]), &set(&[2])).is_err());
    }
}
