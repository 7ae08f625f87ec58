//! Undirected and directed graph primitives.
//!
//! Nodes are positive integer labels. Undirected edges are stored with the
//! smaller label first so `(2, 5)` and `(5, 2)` denote the same edge.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use crate::error::{Error, Result};

pub type Node = usize;

/// Unordered node pair, normalized to `(min, max)`.
pub type Edge = (Node, Node);

pub fn edge_key(a: Node, b: Node) -> Edge {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) fn check_disjoint(sets: &[&BTreeSet<Node>]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for set in sets {
        for &v in set.iter() {
            if !seen.insert(v) {
                return Err(Error::Overlap(v));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct UndirectedGraph {
    adj: BTreeMap<Node, BTreeSet<Node>>,
    weights: Option<BTreeMap<Edge, f64>>,
}

impl UndirectedGraph {
    pub fn new(nodes: impl IntoIterator<Item = Node>) -> Self {
        UndirectedGraph {
            adj: nodes.into_iter().map(|v| (v, BTreeSet::new())).collect(),
            weights: None,
        }
    }

    /// Graph on `nodes` with the given edges; endpoints must be nodes.
    pub fn from_edges(
        nodes: impl IntoIterator<Item = Node>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self> {
        let mut g = UndirectedGraph::new(nodes);
        for (a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn from_weighted_edges(
        nodes: impl IntoIterator<Item = Node>,
        edges: impl IntoIterator<Item = (Node, Node, f64)>,
    ) -> Result<Self> {
        let mut g = UndirectedGraph::new(nodes);
        g.weights = Some(BTreeMap::new());
        for (a, b, w) in edges {
            g.add_weighted_edge(a, b, w)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, a: Node, b: Node) -> Result<()> {
        if a == b {
            return Err(Error::invalid(format!("self-loop at node {a}")));
        }
        for v in [a, b] {
            if !self.adj.contains_key(&v) {
                return Err(Error::UnknownNode(v));
            }
        }
        self.adj.get_mut(&a).unwrap().insert(b);
        self.adj.get_mut(&b).unwrap().insert(a);
        if let Some(w) = self.weights.as_mut() {
            w.entry(edge_key(a, b)).or_insert(0.0);
        }
        Ok(())
    }

    /// Adds the edge (if missing) and sets its weight.
    pub fn add_weighted_edge(&mut self, a: Node, b: Node, weight: f64) -> Result<()> {
        if self.weights.is_none() {
            let zeros = self.edges().into_iter().map(|e| (e, 0.0)).collect();
            self.weights = Some(zeros);
        }
        self.add_edge(a, b)?;
        self.weights
            .as_mut()
            .unwrap()
            .insert(edge_key(a, b), weight);
        Ok(())
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        self.adj.keys().copied()
    }

    pub fn node_set(&self) -> BTreeSet<Node> {
        self.adj.keys().copied().collect()
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn contains(&self, v: Node) -> bool {
        self.adj.contains_key(&v)
    }

    /// All edges in sorted order.
    pub fn edges(&self) -> Vec<Edge> {
        self.adj
            .iter()
            .flat_map(|(&a, nb)| nb.range(a + 1..).map(move |&b| (a, b)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: Node, b: Node) -> bool {
        self.adj.get(&a).is_some_and(|nb| nb.contains(&b))
    }

    pub fn neighbors(&self, v: Node) -> impl Iterator<Item = Node> + '_ {
        self.adj.get(&v).into_iter().flatten().copied()
    }

    pub fn degree(&self, v: Node) -> usize {
        self.adj.get(&v).map_or(0, BTreeSet::len)
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn weight(&self, a: Node, b: Node) -> Option<f64> {
        if !self.has_edge(a, b) {
            return None;
        }
        self.weights.as_ref()?.get(&edge_key(a, b)).copied()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights
            .as_ref()
            .map_or(0.0, |w| w.values().sum())
    }

    /// Connected components, each sorted, ordered by smallest label.
    pub fn components(&self) -> Vec<Vec<Node>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for v in self.nodes() {
            if seen.contains(&v) {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([v]);
            seen.insert(v);
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for w in self.neighbors(u) {
                    if seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// An undirected graph is acyclic iff every component is a tree.
    pub fn is_acyclic(&self) -> bool {
        self.edge_count() + self.components().len() == self.node_count()
    }

    pub fn is_tree(&self) -> bool {
        self.node_count() > 0 && self.is_connected() && self.edge_count() + 1 == self.node_count()
    }

    /// Shortest path from `a` to `b` as a node sequence, `None` if unreachable.
    /// In a tree this is the unique path.
    pub fn path_between(&self, a: Node, b: Node) -> Result<Option<Vec<Node>>> {
        for v in [a, b] {
            if !self.contains(v) {
                return Err(Error::UnknownNode(v));
            }
        }
        let mut prev: BTreeMap<Node, Node> = BTreeMap::new();
        let mut queue = VecDeque::from([a]);
        prev.insert(a, a);
        while let Some(u) = queue.pop_front() {
            if u == b {
                let mut path = vec![b];
                let mut cur = b;
                while cur != a {
                    cur = prev[&cur];
                    path.push(cur);
                }
                path.reverse();
                return Ok(Some(path));
            }
            for w in self.neighbors(u) {
                if let std::collections::btree_map::Entry::Vacant(e) = prev.entry(w) {
                    e.insert(u);
                    queue.push_back(w);
                }
            }
        }
        Ok(None)
    }

    /// Number of edges on the path between `a` and `b`.
    pub fn distance(&self, a: Node, b: Node) -> Result<Option<usize>> {
        Ok(self.path_between(a, b)?.map(|p| p.len() - 1))
    }

    /// Subgraph on `keep` holding every edge of `self` between kept nodes.
    pub fn induced_subgraph(&self, keep: &BTreeSet<Node>) -> Result<UndirectedGraph> {
        if let Some(&v) = keep.iter().find(|v| !self.contains(**v)) {
            return Err(Error::UnknownNode(v));
        }
        let adj = keep
            .iter()
            .map(|&v| {
                let nb = self.adj[&v].intersection(keep).copied().collect();
                (v, nb)
            })
            .collect();
        let weights = self.weights.as_ref().map(|w| {
            w.iter()
                .filter(|((a, b), _)| keep.contains(a) && keep.contains(b))
                .map(|(&e, &x)| (e, x))
                .collect()
        });
        Ok(UndirectedGraph { adj, weights })
    }

    /// True if `self` is a subgraph of `other` that keeps every edge of
    /// `other` between its nodes.
    pub fn is_induced_subgraph_of(&self, other: &UndirectedGraph) -> bool {
        let nodes = self.node_set();
        if !nodes.iter().all(|&v| other.contains(v)) {
            return false;
        }
        match other.induced_subgraph(&nodes) {
            Ok(sub) => sub.edges() == self.edges(),
            Err(_) => false,
        }
    }

    /// True iff every path between a node of `a` and a node of `b` meets `c`.
    pub fn separates(
        &self,
        c: &BTreeSet<Node>,
        a: &BTreeSet<Node>,
        b: &BTreeSet<Node>,
    ) -> Result<bool> {
        check_disjoint(&[a, b, c])?;
        for &v in a.iter().chain(b).chain(c) {
            if !self.contains(v) {
                return Err(Error::UnknownNode(v));
            }
        }
        let mut seen: BTreeSet<Node> = a.clone();
        let mut queue: VecDeque<Node> = a.iter().copied().collect();
        while let Some(u) = queue.pop_front() {
            if b.contains(&u) {
                return Ok(false);
            }
            for w in self.neighbors(u) {
                if !c.contains(&w) && seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        Ok(true)
    }

    /// Maximum-weight spanning tree (Prim). Ties prefer the lexicographically
    /// smaller `(min, max)` edge. Missing weights count as zero.
    pub fn maximum_spanning_tree(&self) -> Result<UndirectedGraph> {
        let index: BTreeMap<Node, usize> =
            self.nodes().enumerate().map(|(i, v)| (v, i)).collect();
        let labels: Vec<Node> = self.nodes().collect();
        let candidates: Vec<(usize, usize, f64, Edge)> = self
            .edges()
            .into_iter()
            .map(|(a, b)| {
                let w = self.weight(a, b).unwrap_or(0.0);
                (index[&a], index[&b], w, (a, b))
            })
            .collect();
        let chosen = max_spanning_tree_indexed(labels.len(), &candidates)?;
        let mut tree = UndirectedGraph::new(labels.iter().copied());
        tree.weights = Some(BTreeMap::new());
        for i in chosen {
            let (_, _, w, (a, b)) = candidates[i];
            tree.add_weighted_edge(a, b, w)?;
        }
        Ok(tree)
    }
}

/// All spanning trees of the graph on nodes `0..n` formed from `edges`, as
/// sorted index lists. Exponential; meant for small exhaustive checks.
pub fn spanning_trees(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        r
    }
    fn rec(
        n: usize,
        edges: &[(usize, usize)],
        next: usize,
        parent: &mut Vec<usize>,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if chosen.len() + 1 == n {
            out.push(chosen.clone());
            return;
        }
        if next >= edges.len() || edges.len() - next < n - 1 - chosen.len() {
            return;
        }
        let (u, v) = edges[next];
        let (ru, rv) = (find(parent, u), find(parent, v));
        if ru != rv {
            let saved = parent.clone();
            parent[ru] = rv;
            chosen.push(next);
            rec(n, edges, next + 1, parent, chosen, out);
            chosen.pop();
            *parent = saved;
        }
        rec(n, edges, next + 1, parent, chosen, out);
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    rec(n, edges, 0, &mut parent, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Copy, PartialEq)]
struct Weight(f64);

impl Eq for Weight {}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Weight {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Prim's algorithm over nodes `0..n`. Each candidate is
/// `(u, v, weight, tie_key)`; among equal weights the smaller key wins, which
/// makes the optimum unique. Returns indices into `edges`.
pub fn max_spanning_tree_indexed<K: Ord + Clone>(
    n: usize,
    edges: &[(usize, usize, f64, K)],
) -> Result<Vec<usize>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, (u, v, _, _)) in edges.iter().enumerate() {
        if u == v || *u >= n || *v >= n {
            return Err(Error::invalid(format!("bad candidate edge ({u}, {v})")));
        }
        incident[*u].push(i);
        incident[*v].push(i);
    }
    let mut in_tree = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut chosen = Vec::with_capacity(n - 1);
    let push = |heap: &mut BinaryHeap<_>, node: usize| {
        for &i in &incident[node] {
            let (_, _, w, ref key) = edges[i];
            heap.push((Weight(w), Reverse(key.clone()), Reverse(i)));
        }
    };
    in_tree[0] = true;
    push(&mut heap, 0);
    while let Some((_, _, Reverse(i))) = heap.pop() {
        let (u, v, _, _) = edges[i];
        let next = match (in_tree[u], in_tree[v]) {
            (true, false) => v,
            (false, true) => u,
            _ => continue,
        };
        in_tree[next] = true;
        chosen.push(i);
        push(&mut heap, next);
    }
    if chosen.len() + 1 != n {
        return Err(Error::Disconnected);
    }
    Ok(chosen)
}

/// Graph with only directed edges.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DirectedGraph {
    children: BTreeMap<Node, BTreeSet<Node>>,
    parents: BTreeMap<Node, BTreeSet<Node>>,
}

impl DirectedGraph {
    pub fn new(
        nodes: impl IntoIterator<Item = Node>,
        arrows: impl IntoIterator<Item = (Node, Node)>,
    ) -> Result<Self> {
        let mut g = DirectedGraph::default();
        for v in nodes {
            g.children.insert(v, BTreeSet::new());
            g.parents.insert(v, BTreeSet::new());
        }
        for (tail, head) in arrows {
            g.add_arrow(tail, head)?;
        }
        Ok(g)
    }

    pub fn add_arrow(&mut self, tail: Node, head: Node) -> Result<()> {
        if tail == head {
            return Err(Error::invalid(format!("self-loop at node {tail}")));
        }
        for v in [tail, head] {
            if !self.children.contains_key(&v) {
                return Err(Error::UnknownNode(v));
            }
        }
        if self.children[&head].contains(&tail) {
            return Err(Error::invalid(format!(
                "both {tail} -> {head} and {head} -> {tail} present; mixed graphs are not supported"
            )));
        }
        self.children.get_mut(&tail).unwrap().insert(head);
        self.parents.get_mut(&head).unwrap().insert(tail);
        Ok(())
    }

    pub fn remove_arrow(&mut self, tail: Node, head: Node) -> bool {
        let removed = self
            .children
            .get_mut(&tail)
            .is_some_and(|c| c.remove(&head));
        if removed {
            self.parents.get_mut(&head).unwrap().remove(&tail);
        }
        removed
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        self.children.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.children.len()
    }

    pub fn contains(&self, v: Node) -> bool {
        self.children.contains_key(&v)
    }

    pub fn arrows(&self) -> Vec<(Node, Node)> {
        self.children
            .iter()
            .flat_map(|(&t, hs)| hs.iter().map(move |&h| (t, h)))
            .collect()
    }

    pub fn arrow_count(&self) -> usize {
        self.children.values().map(BTreeSet::len).sum()
    }

    pub fn has_arrow(&self, tail: Node, head: Node) -> bool {
        self.children.get(&tail).is_some_and(|c| c.contains(&head))
    }

    pub fn adjacent(&self, a: Node, b: Node) -> bool {
        self.has_arrow(a, b) || self.has_arrow(b, a)
    }

    pub fn parents(&self, v: Node) -> &BTreeSet<Node> {
        &self.parents[&v]
    }

    pub fn children(&self, v: Node) -> &BTreeSet<Node> {
        &self.children[&v]
    }

    /// True if `to` is reachable from `from` along arrows.
    pub fn has_path(&self, from: Node, to: Node) -> bool {
        let mut seen = BTreeSet::from([from]);
        let mut stack = vec![from];
        while let Some(u) = stack.pop() {
            if u == to {
                return true;
            }
            for &w in &self.children[&u] {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        false
    }

    /// Some directed cycle as a closed node sequence, if one exists.
    pub fn find_cycle(&self) -> Option<Vec<Node>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let mut mark: BTreeMap<Node, Mark> = self.nodes().map(|v| (v, Mark::New)).collect();
        for root in self.nodes() {
            if mark[&root] != Mark::New {
                continue;
            }
            // iterative DFS keeping the active path
            let mut path: Vec<Node> = vec![root];
            let mut iters: Vec<std::collections::btree_set::Iter<Node>> =
                vec![self.children[&root].iter()];
            mark.insert(root, Mark::Active);
            while let Some(it) = iters.last_mut() {
                match it.next() {
                    Some(&w) => match mark[&w] {
                        Mark::New => {
                            mark.insert(w, Mark::Active);
                            path.push(w);
                            iters.push(self.children[&w].iter());
                        }
                        Mark::Active => {
                            let start = path.iter().position(|&x| x == w).unwrap();
                            let mut cycle = path[start..].to_vec();
                            cycle.push(w);
                            return Some(cycle);
                        }
                        Mark::Done => {}
                    },
                    None => {
                        let v = path.pop().unwrap();
                        mark.insert(v, Mark::Done);
                        iters.pop();
                    }
                }
            }
        }
        None
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// Undirected graph obtained by dropping arrow orientation.
    pub fn skeleton(&self) -> UndirectedGraph {
        UndirectedGraph::from_edges(
            self.nodes(),
            self.arrows().into_iter().map(|(a, b)| edge_key(a, b)),
        )
        .expect("arrows connect known nodes")
    }

    pub fn is_weakly_connected(&self) -> bool {
        self.skeleton().is_connected()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[Node]) -> BTreeSet<Node> {
        xs.iter().copied().collect()
    }

    #[test]
    fn triangle_is_cyclic() {
        let g = UndirectedGraph::from_edges(1..=3, [(1, 2), (2, 3), (1, 3)]).unwrap();
        assert!(!g.is_acyclic());
        assert!(!g.is_tree());
    }

    #[test]
    fn chained_parent_paths_form_a_cycle() {
        // 1 ~ 2 through 4, 2 ~ 3 through 6, 3 ~ 1 through 5
        let g = UndirectedGraph::from_edges(
            1..=6,
            [(1, 4), (4, 2), (2, 6), (6, 3), (3, 5), (5, 1)],
        )
        .unwrap();
        assert!(!g.is_acyclic());
    }

    #[test]
    fn directed_cycle_detection() {
        let mut g = DirectedGraph::new(1..=3, [(1, 2), (2, 3)]).unwrap();
        assert!(g.is_acyclic());
        g.add_arrow(3, 1).unwrap();
        let cycle = g.find_cycle().unwrap();
        assert_eq!(cycle.first(), cycle.last());
        assert_eq!(cycle.len(), 4);
    }

    #[test]
    fn mixed_orientation_rejected() {
        assert!(DirectedGraph::new(1..=2, [(1, 2), (2, 1)]).is_err());
        assert!(DirectedGraph::new(1..=2, [(1, 1)]).is_err());
    }

    #[test]
    fn paths_in_tree() {
        let t = UndirectedGraph::from_edges(
            1..=7,
            [(7, 5), (5, 4), (4, 3), (3, 1), (2, 3), (6, 5)],
        )
        .unwrap();
        assert_eq!(t.path_between(7, 1).unwrap().unwrap(), vec![7, 5, 4, 3, 1]);
        assert_eq!(t.distance(7, 1).unwrap(), Some(4));
        assert_eq!(t.path_between(4, 4).unwrap().unwrap(), vec![4]);
        assert!(t.path_between(4, 9).is_err());

        let split = UndirectedGraph::from_edges(1..=4, [(1, 2), (3, 4)]).unwrap();
        assert_eq!(split.path_between(1, 4).unwrap(), None);
    }

    #[test]
    fn induced_subgraphs() {
        let g = UndirectedGraph::from_edges(
            1..=5,
            [(1, 2), (2, 3), (1, 5), (3, 4), (4, 5), (2, 5)],
        )
        .unwrap();
        let keep = set(&[1, 2, 3, 5]);
        let sub = g.induced_subgraph(&keep).unwrap();
        assert_eq!(sub.edges(), vec![(1, 2), (1, 5), (2, 3), (2, 5)]);
        assert!(sub.is_induced_subgraph_of(&g));
        let partial = UndirectedGraph::from_edges(keep.iter().copied(), [(1, 2), (2, 5)]).unwrap();
        assert!(!partial.is_induced_subgraph_of(&g));

        assert_eq!(g.induced_subgraph(&g.node_set()).unwrap(), g);
        let single = g.induced_subgraph(&set(&[3])).unwrap();
        assert_eq!(single.node_count(), 1);
        assert_eq!(single.edge_count(), 0);
        assert!(g.induced_subgraph(&set(&[1, 9])).is_err());
    }

    #[test]
    fn separation_on_path() {
        let g = UndirectedGraph::from_edges(1..=3, [(1, 2), (2, 3)]).unwrap();
        assert!(g.separates(&set(&[2]), &set(&[1]), &set(&[3])).unwrap());
        assert!(!g.separates(&set(&[]), &set(&[1]), &set(&[3])).unwrap());
        assert!(matches!(
            g.separates(&set(&[1]), &set(&[1]), &set(&[3])),
            Err(Error::Overlap(1))
        ));
    }

    #[test]
    fn mst_keeps_trees_and_rejects_disconnected() {
        let tree =
            UndirectedGraph::from_weighted_edges(1..=4, [(1, 2, 0.3), (2, 3, -1.0), (2, 4, 5.0)])
                .unwrap();
        assert_eq!(tree.maximum_spanning_tree().unwrap().edges(), tree.edges());

        let split = UndirectedGraph::from_weighted_edges(1..=4, [(1, 2, 1.0), (3, 4, 1.0)]).unwrap();
        assert!(matches!(split.maximum_spanning_tree(), Err(Error::Disconnected)));
    }

    #[test]
    fn mst_tie_break_prefers_smaller_edges() {
        let g = UndirectedGraph::from_weighted_edges(
            1..=3,
            [(1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)],
        )
        .unwrap();
        assert_eq!(g.maximum_spanning_tree().unwrap().edges(), vec![(1, 2), (1, 3)]);
    }

    #[test]
    fn spanning_tree_counts() {
        // Cayley: n^(n-2) trees on the complete graph
        for n in 2..=5usize {
            let edges: Vec<(usize, usize)> =
                (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            assert_eq!(spanning_trees(n, &edges).len(), n.pow(n as u32 - 2));
        }
        assert_eq!(spanning_trees(4, &[(0, 1), (2, 3)]).len(), 0);
    }

    #[test]
    fn skeleton_of_directed_graph() {
        let g = DirectedGraph::new(1..=3, [(1, 3), (2, 3)]).unwrap();
        assert_eq!(g.skeleton().edges(), vec![(1, 3), (2, 3)]);
        assert!(g.is_weakly_connected());
    }
}
