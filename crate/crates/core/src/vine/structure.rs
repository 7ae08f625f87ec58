use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use rand::Rng;

use crate::graph::{edge_key, max_spanning_tree_indexed, spanning_trees, Node, UndirectedGraph};

/// Edge of a vine tree. In tree 1 `children` is `None`; in tree `t > 1` it
/// holds the indices of the two tree `t - 1` edges this edge joins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VineEdge {
    /// Conditioned pair, smaller label first.
    pub conditioned: (Node, Node),
    pub conditioning: BTreeSet<Node>,
    pub children: Option<(usize, usize)>,
}

impl VineEdge {
    pub fn complete_union(&self) -> BTreeSet<Node> {
        let mut a = self.conditioning.clone();
        a.insert(self.conditioned.0);
        a.insert(self.conditioned.1);
        a
    }

    pub fn has_conditioned(&self, v: Node) -> bool {
        self.conditioned.0 == v || self.conditioned.1 == v
    }

    /// The other conditioned variable, if `v` is one of them.
    pub fn partner(&self, v: Node) -> Option<Node> {
        match self.conditioned {
            (a, b) if a == v => Some(b),
            (a, b) if b == v => Some(a),
            _ => None,
        }
    }

    /// Compact label such as `4,1|2356` (conditioned pair as stored).
    pub fn label(&self) -> String {
        let (a, b) = self.conditioned;
        if self.conditioning.is_empty() {
            return format!("{a},{b}");
        }
        let d: Vec<String> = self.conditioning.iter().map(|v| v.to_string()).collect();
        let sep = if self.conditioning.iter().any(|&v| v >= 10) { "," } else { "" };
        format!("{a},{b}|{}", d.join(sep))
    }
}

/// Conditioned pair plus conditioning set; identifies an edge independent of
/// storage order.
pub type EdgeLabel = ((Node, Node), BTreeSet<Node>);

/// The trees `T1, ..., Tk` of a (possibly partial) regular vine on `1..=d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VineTreeSequence {
    d: usize,
    trees: Vec<Vec<VineEdge>>,
}

impl VineTreeSequence {
    /// Sequence with no trees yet.
    pub fn empty(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidVine("dimension must be at least 1".into()));
        }
        Ok(VineTreeSequence { d, trees: Vec::new() })
    }

    /// Builds from per-tree endpoint lists: labels for tree 1, indices into
    /// the previous tree's edges above that.
    pub fn from_tree_edges(d: usize, trees: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        let mut seq = Self::empty(d)?;
        for edges in trees {
            seq.push_tree(edges)?;
        }
        Ok(seq)
    }

    /// Builds from conditioned/conditioning labels, resolving the joined
    /// edges of the previous tree by complete union.
    pub fn from_edge_labels(d: usize, trees: Vec<Vec<((Node, Node), Vec<Node>)>>) -> Result<Self> {
        let mut seq = Self::empty(d)?;
        for (t0, edges) in trees.into_iter().enumerate() {
            let resolved = if t0 == 0 {
                edges
                    .into_iter()
                    .map(|((a, b), cond)| {
                        if !cond.is_empty() {
                            return Err(Error::InvalidVine("tree 1 edges have no conditioning set".into()));
                        }
                        Ok((a, b))
                    })
                    .collect::<Result<Vec<_>>>()?
            } else {
                let lookup = seq.union_index(t0);
                edges
                    .into_iter()
                    .map(|((a, b), cond)| {
                        let d: BTreeSet<Node> = cond.into_iter().collect();
                        let mut left = d.clone();
                        left.insert(a);
                        let mut right = d.clone();
                        right.insert(b);
                        match (lookup.get(&left), lookup.get(&right)) {
                            (Some(&i), Some(&j)) => Ok((i, j)),
                            _ => Err(Error::InvalidVine(format!(
                                "edge {a},{b}|{d:?} has no matching edges in tree {t0}"
                            ))),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            seq.push_tree(resolved)?;
        }
        Ok(seq)
    }

    /// D-vine: tree 1 is the path through `order`; each later tree joins
    /// consecutive edges.
    pub fn dvine(order: &[Node]) -> Result<Self> {
        let d = order.len();
        let mut seq = Self::empty(d)?;
        if d > 1 {
            seq.push_tree(order.windows(2).map(|w| (w[0], w[1])).collect())?;
        }
        for t in 2..d {
            seq.push_tree((0..d - t).map(|i| (i, i + 1)).collect())?;
        }
        Ok(seq)
    }

    /// Random complete vine: each tree is a maximum spanning tree of its
    /// candidate graph under i.i.d. uniform weights.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Self> {
        let mut seq = Self::empty(d)?;
        for t in 1..d {
            let (n, cands): (usize, Vec<(usize, usize)>) = if t == 1 {
                (d, (0..d).flat_map(|a| (a + 1..d).map(move |b| (a, b))).collect())
            } else {
                (d - t + 1, seq.proximity_candidates(t - 1))
            };
            let weighted: Vec<(usize, usize, f64, usize)> =
                cands.iter().enumerate().map(|(i, &(a, b))| (a, b, rng.random::<f64>(), i)).collect();
            let chosen = max_spanning_tree_indexed(n, &weighted)?;
            let offset = usize::from(t == 1);
            seq.push_tree(chosen.iter().map(|&i| (cands[i].0 + offset, cands[i].1 + offset)).collect())?;
        }
        Ok(seq)
    }

    /// Appends the next tree. Edges are label pairs for tree 1 and pairs of
    /// previous-tree edge indices otherwise.
    pub fn push_tree(&mut self, edges: Vec<(usize, usize)>) -> Result<()> {
        let t = self.trees.len() + 1;
        if t >= self.d {
            return Err(Error::InvalidVine(format!("a {}-dimensional vine has {} trees", self.d, self.d - 1)));
        }
        let n_nodes = self.d - t + 1;
        if edges.len() + 1 != n_nodes {
            return Err(Error::InvalidVine(format!(
                "tree {t} needs {} edges, got {}",
                n_nodes - 1,
                edges.len()
            )));
        }
        let nodes: Vec<usize> = if t == 1 {
            (1..=self.d).collect()
        } else {
            (0..n_nodes).collect()
        };
        let graph = UndirectedGraph::from_edges(nodes, edges.iter().map(|&(a, b)| edge_key(a, b)))
            .map_err(|e| Error::InvalidVine(format!("tree {t}: {e}")))?;
        if graph.edge_count() != edges.len() || !graph.is_tree() {
            return Err(Error::InvalidVine(format!("tree {t} is not a spanning tree")));
        }
        let mut built = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            let edge = if t == 1 {
                VineEdge {
                    conditioned: edge_key(a, b),
                    conditioning: BTreeSet::new(),
                    children: None,
                }
            } else {
                let prev = &self.trees[t - 2];
                let (ea, eb) = (&prev[a], &prev[b]);
                if !proximity(ea, eb) {
                    return Err(Error::InvalidVine(format!(
                        "tree {t}: edges {} and {} share no node in tree {}",
                        ea.label(),
                        eb.label(),
                        t - 1
                    )));
                }
                let ua = ea.complete_union();
                let ub = eb.complete_union();
                let dset: BTreeSet<Node> = ua.intersection(&ub).copied().collect();
                let ca: Vec<Node> = ua.difference(&dset).copied().collect();
                let cb: Vec<Node> = ub.difference(&dset).copied().collect();
                debug_assert!(ca.len() == 1 && cb.len() == 1);
                VineEdge {
                    conditioned: edge_key(ca[0], cb[0]),
                    conditioning: dset,
                    children: Some((a, b)),
                }
            };
            built.push(edge);
        }
        self.trees.push(built);
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of trees present.
    pub fn depth(&self) -> usize {
        self.trees.len()
    }

    pub fn is_complete(&self) -> bool {
        self.trees.len() + 1 == self.d
    }

    /// Edges of tree `t` (1-based).
    pub fn tree(&self, t: usize) -> &[VineEdge] {
        &self.trees[t - 1]
    }

    pub fn trees(&self) -> impl Iterator<Item = (usize, &[VineEdge])> {
        self.trees.iter().enumerate().map(|(i, e)| (i + 1, e.as_slice()))
    }

    /// Tree `t` as a graph: labels for tree 1, edge indices of tree `t - 1`
    /// otherwise.
    pub fn tree_graph(&self, t: usize) -> UndirectedGraph {
        let nodes: Vec<usize> = if t == 1 {
            (1..=self.d).collect()
        } else {
            (0..self.trees[t - 2].len()).collect()
        };
        let edges = self.trees[t - 1].iter().map(|e| match e.children {
            None => e.conditioned,
            Some((a, b)) => edge_key(a, b),
        });
        UndirectedGraph::from_edges(nodes, edges).expect("stored trees are valid")
    }

    /// Complete union, conditioning set and conditioned set of edge `idx` of
    /// tree `t`.
    pub fn edge_sets(&self, t: usize, idx: usize) -> Result<(BTreeSet<Node>, BTreeSet<Node>, BTreeSet<Node>)> {
        let e = self
            .trees
            .get(t.wrapping_sub(1))
            .and_then(|tr| tr.get(idx))
            .ok_or_else(|| Error::InvalidVine(format!("no edge {idx} in tree {t}")))?;
        // recompute by descending to tree 1 rather than trusting the cache
        let a = self.descend(t, idx);
        let dset = match e.children {
            None => BTreeSet::new(),
            Some((x, y)) => {
                let ax = self.descend(t - 1, x);
                let ay = self.descend(t - 1, y);
                ax.intersection(&ay).copied().collect()
            }
        };
        let c = a.difference(&dset).copied().collect();
        Ok((a, dset, c))
    }

    fn descend(&self, t: usize, idx: usize) -> BTreeSet<Node> {
        let e = &self.trees[t - 1][idx];
        match e.children {
            None => BTreeSet::from([e.conditioned.0, e.conditioned.1]),
            Some((x, y)) => {
                let mut s = self.descend(t - 1, x);
                s.extend(self.descend(t - 1, y));
                s
            }
        }
    }

    /// Map from complete union to edge index for tree `t`.
    pub fn union_index(&self, t: usize) -> BTreeMap<BTreeSet<Node>, usize> {
        self.trees[t - 1]
            .iter()
            .enumerate()
            .map(|(i, e)| (e.complete_union(), i))
            .collect()
    }

    /// Pairs of tree-`t` edges that may be joined in tree `t + 1`.
    pub fn proximity_candidates(&self, t: usize) -> Vec<(usize, usize)> {
        let edges = &self.trees[t - 1];
        let mut out = Vec::new();
        for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                if proximity(&edges[i], &edges[j]) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Every admissible next tree as an argument for [`Self::push_tree`].
    /// Exhaustive; only for small dimensions.
    pub fn next_tree_options(&self) -> Vec<Vec<(usize, usize)>> {
        let t = self.trees.len() + 1;
        if t >= self.d {
            return Vec::new();
        }
        if t == 1 {
            let edges: Vec<(usize, usize)> = (0..self.d)
                .flat_map(|a| (a + 1..self.d).map(move |b| (a, b)))
                .collect();
            return spanning_trees(self.d, &edges)
                .into_iter()
                .map(|idx| idx.iter().map(|&i| (edges[i].0 + 1, edges[i].1 + 1)).collect())
                .collect();
        }
        let cands = self.proximity_candidates(t - 1);
        spanning_trees(self.trees[t - 2].len(), &cands)
            .into_iter()
            .map(|idx| idx.iter().map(|&i| cands[i]).collect())
            .collect()
    }

    /// Order-independent description of every tree.
    pub fn edge_label_sets(&self) -> Vec<BTreeSet<EdgeLabel>> {
        self.trees
            .iter()
            .map(|tr| tr.iter().map(|e| (e.conditioned, e.conditioning.clone())).collect())
            .collect()
    }

    /// Structural equality ignoring edge storage order.
    pub fn same_structure(&self, other: &VineTreeSequence) -> bool {
        self.d == other.d && self.edge_label_sets() == other.edge_label_sets()
    }

    /// Keeps only trees `1..=k`.
    pub fn truncated(&self, k: usize) -> VineTreeSequence {
        VineTreeSequence {
            d: self.d,
            trees: self.trees.iter().take(k).cloned().collect(),
        }
    }
}

/// Proximity: two edges of the same tree may be joined iff they share a node.
/// Distinct edges are required.
pub fn proximity(a: &VineEdge, b: &VineEdge) -> bool {
    if a == b {
        return false;
    }
    match (a.children, b.children) {
        (None, None) => {
            let (a0, a1) = a.conditioned;
            b.has_conditioned(a0) || b.has_conditioned(a1)
        }
        (Some((a0, a1)), Some((b0, b1))) => a0 == b0 || a0 == b1 || a1 == b0 || a1 == b1,
        _ => false,
    }
}
