//! Small reference structures used by tests, the CLI and the demo.

use crate::dag::Dag;
use crate::graph::Node;
use crate::vine::{RVineMatrix, VineTreeSequence};

/// Six-dimensional vine matrix with diagonal (4, 5, 3, 6, 2, 1).
pub fn six_dim_matrix() -> RVineMatrix {
    RVineMatrix::new(vec![
        vec![4, 0, 0, 0, 0, 0],
        vec![1, 5, 0, 0, 0, 0],
        vec![3, 1, 3, 0, 0, 0],
        vec![6, 3, 1, 6, 0, 0],
        vec![2, 6, 2, 1, 2, 0],
        vec![5, 2, 6, 2, 1, 1],
    ])
    .expect("valid matrix")
}

/// Tree sequence encoded by [`six_dim_matrix`], listed tree by tree.
pub fn six_dim_vine() -> VineTreeSequence {
    VineTreeSequence::from_edge_labels(6, six_dim_edges()).expect("valid vine")
}

#[allow(clippy::type_complexity)]
pub fn six_dim_edges() -> Vec<Vec<((Node, Node), Vec<Node>)>> {
    vec![
        vec![((2, 1), vec![]), ((6, 2), vec![]), ((3, 6), vec![]), ((5, 2), vec![]), ((4, 5), vec![])],
        vec![((6, 1), vec![2]), ((3, 2), vec![6]), ((5, 6), vec![2]), ((4, 2), vec![5])],
        vec![((3, 1), vec![2, 6]), ((5, 3), vec![2, 6]), ((4, 6), vec![2, 5])],
        vec![((5, 1), vec![2, 3, 6]), ((4, 3), vec![2, 5, 6])],
        vec![((4, 1), vec![2, 3, 5, 6])],
    ]
}

/// 2-DAG compatible with the first two trees of [`six_dim_vine`].
pub fn g1() -> Dag {
    Dag::from_arrows(1..=6, [(1, 2), (2, 6), (2, 3), (6, 3), (2, 5), (6, 5), (2, 4), (5, 4)])
        .expect("acyclic")
}

/// 2-DAG with three v-structures that has no 2-truncated representation.
pub fn g2() -> Dag {
    Dag::from_arrows(1..=6, [(1, 4), (2, 4), (1, 5), (3, 5), (2, 6), (3, 6)]).expect("acyclic")
}

/// Collider at 5 on every 3-4 chain; {2, 3} blocks all 1-5 chains.
pub fn dsep_example() -> Dag {
    Dag::from_arrows(1..=5, [(1, 2), (1, 3), (2, 3), (3, 5), (4, 5)]).expect("acyclic")
}

/// Three nested DAGs with at most 1, 2 and 3 parents for the heuristic toy run.
pub fn toy_dags() -> [Dag; 3] {
    let g1 = Dag::from_arrows(1..=6, [(1, 3), (1, 4), (1, 5), (1, 6), (3, 2)]).expect("acyclic");
    let g2 = Dag::from_arrows(
        1..=6,
        [(3, 2), (4, 2), (1, 3), (1, 4), (3, 4), (1, 5), (1, 6), (4, 6)],
    )
    .expect("acyclic");
    let g3 = Dag::from_arrows(
        1..=6,
        [(3, 2), (4, 2), (5, 2), (1, 3), (1, 4), (3, 4), (5, 4), (1, 5), (1, 6), (4, 6)],
    )
    .expect("acyclic");
    [g1, g2, g3]
}

/// 2-DAG whose parents are always the two preceding nodes.
pub fn dvine_dag() -> Dag {
    Dag::from_arrows(1..=5, [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4), (3, 5), (4, 5)]).expect("acyclic")
}

/// 2-DAG whose parents always lie in {1, 2}.
pub fn cvine_dag() -> Dag {
    Dag::from_arrows(1..=5, [(1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (1, 5), (2, 5)]).expect("acyclic")
}
