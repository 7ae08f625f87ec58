//! Edge-list text format and DOT export.
//!
//! One edge per line: `u v [w]` for undirected, `u -> v` for directed edges.
//! A line holding a single label declares an isolated node. `#` starts a
//! comment.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::graph::{Node, UndirectedGraph};
use crate::vine::VineTreeSequence;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EdgeList {
    pub nodes: BTreeSet<Node>,
    /// `None` until the first edge fixes the kind.
    pub directed: Option<bool>,
    pub edges: Vec<(Node, Node, Option<f64>)>,
}

fn parse_label(tok: &str, line: usize) -> Result<Node> {
    let v: Node = tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("expected a positive integer label, found {tok:?}"),
    })?;
    if v == 0 {
        return Err(Error::Parse {
            line,
            message: "labels are 1-based".into(),
        });
    }
    Ok(v)
}

fn parse_weight(tok: &str, line: usize) -> Result<f64> {
    let w: f64 = tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("expected a numeric weight, found {tok:?}"),
    })?;
    if !w.is_finite() {
        return Err(Error::Parse {
            line,
            message: "weight must be finite".into(),
        });
    }
    Ok(w)
}

pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    let mut out = EdgeList::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let (directed, a, b, w) = match toks.as_slice() {
            [v] => {
                out.nodes.insert(parse_label(v, line)?);
                continue;
            }
            [a, "->", b] => (true, a, b, None),
            [a, "->", b, w] => (true, a, b, Some(*w)),
            [a, b] => (false, a, b, None),
            [a, b, w] => (false, a, b, Some(*w)),
            _ => {
                return Err(Error::Parse {
                    line,
                    message: format!("cannot parse {content:?}"),
                })
            }
        };
        match out.directed {
            Some(kind) if kind != directed => {
                return Err(Error::Parse {
                    line,
                    message: "mixed directed and undirected edges".into(),
                })
            }
            _ => out.directed = Some(directed),
        }
        let a = parse_label(a, line)?;
        let b = parse_label(b, line)?;
        if a == b {
            return Err(Error::Parse {
                line,
                message: format!("self-loop at node {a}"),
            });
        }
        let w = w.map(|t| parse_weight(t, line)).transpose()?;
        out.nodes.extend([a, b]);
        out.edges.push((a, b, w));
    }
    Ok(out)
}

/// Parses a directed edge list. An input without edges yields an edgeless DAG.
pub fn parse_dag(text: &str) -> Result<Dag> {
    let list = parse_edge_list(text)?;
    if list.directed == Some(false) {
        return Err(Error::invalid("expected directed edges `u -> v`"));
    }
    if list.nodes.is_empty() {
        return Err(Error::invalid("edge list declares no nodes"));
    }
    Dag::from_arrows(list.nodes, list.edges.into_iter().map(|(a, b, _)| (a, b)))
}

pub fn parse_undirected(text: &str) -> Result<UndirectedGraph> {
    let list = parse_edge_list(text)?;
    if list.directed == Some(true) {
        return Err(Error::invalid("expected undirected edges `u v`"));
    }
    if list.edges.iter().any(|e| e.2.is_some()) {
        UndirectedGraph::from_weighted_edges(
            list.nodes,
            list.edges.into_iter().map(|(a, b, w)| (a, b, w.unwrap_or(0.0))),
        )
    } else {
        UndirectedGraph::from_edges(list.nodes, list.edges.into_iter().map(|(a, b, _)| (a, b)))
    }
}

pub fn write_dag(dag: &Dag) -> String {
    let mut s = String::new();
    for v in dag.nodes() {
        if dag.parents(v).is_empty() && dag.children(v).is_empty() {
            writeln!(s, "{v}").unwrap();
        }
    }
    for (a, b) in dag.arrows() {
        writeln!(s, "{a} -> {b}").unwrap();
    }
    s
}

pub fn write_undirected(g: &UndirectedGraph) -> String {
    let mut s = String::new();
    for v in g.nodes() {
        if g.degree(v) == 0 {
            writeln!(s, "{v}").unwrap();
        }
    }
    for (a, b) in g.edges() {
        match g.weight(a, b) {
            Some(w) => writeln!(s, "{a} {b} {w}").unwrap(),
            None => writeln!(s, "{a} {b}").unwrap(),
        }
    }
    s
}

/// DOT digraph; arrows into v-structure colliders are drawn red when asked.
pub fn dag_to_dot(dag: &Dag, highlight_v_structures: bool) -> String {
    let mut marked = BTreeSet::new();
    if highlight_v_structures {
        for (u, v, w) in dag.v_structures() {
            marked.insert((u, v));
            marked.insert((w, v));
        }
    }
    let mut s = String::from("digraph G {\n");
    for v in dag.nodes() {
        writeln!(s, "  {v};").unwrap();
    }
    for (a, b) in dag.arrows() {
        if marked.contains(&(a, b)) {
            writeln!(s, "  {a} -> {b} [color=red];").unwrap();
        } else {
            writeln!(s, "  {a} -> {b};").unwrap();
        }
    }
    s.push_str("}\n");
    s
}

pub fn graph_to_dot(g: &UndirectedGraph) -> String {
    let mut s = String::from("graph G {\n");
    for v in g.nodes() {
        writeln!(s, "  {v};").unwrap();
    }
    for (a, b) in g.edges() {
        match g.weight(a, b) {
            Some(w) => writeln!(s, "  {a} -- {b} [label=\"{w}\"];").unwrap(),
            None => writeln!(s, "  {a} -- {b};").unwrap(),
        }
    }
    s.push_str("}\n");
    s
}

/// One cluster per tree; nodes of tree `t > 1` are the edges of tree `t - 1`.
pub fn vine_to_dot(v: &VineTreeSequence) -> String {
    let mut s = String::from("graph V {\n");
    for (t, edges) in v.trees() {
        writeln!(s, "  subgraph cluster_t{t} {{\n    label=\"T{t}\";").unwrap();
        if t == 1 {
            for node in 1..=v.d() {
                writeln!(s, "    t1_{node} [label=\"{node}\"];").unwrap();
            }
        } else {
            for (i, e) in v.tree(t - 1).iter().enumerate() {
                writeln!(s, "    t{t}_{i} [label=\"{}\"];", e.label()).unwrap();
            }
        }
        for e in edges {
            let (a, b) = match e.children {
                None => (format!("t1_{}", e.conditioned.0), format!("t1_{}", e.conditioned.1)),
                Some((i, j)) => (format!("t{t}_{i}"), format!("t{t}_{j}")),
            };
            writeln!(s, "    {a} -- {b} [label=\"{}\"];", e.label()).unwrap();
        }
        s.push_str("  }\n");
    }
    s.push_str("}\n");
    s
}
