//! Lower-triangular R-vine matrices.
//!
//! Rows and columns are 0-based here. Column `c` holds diagonal entry
//! `M[c][c]`; the cell in row `r > c` encodes an edge of tree `d - r` with
//! conditioned pair `{M[c][c], M[r][c]}` and conditioning set
//! `{M[r + 1][c], ..., M[d - 1][c]}`. The bottom row is tree 1.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::structure::VineTreeSequence;
use crate::error::{Error, Result};
use crate::graph::{edge_key, Node};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RVineMatrix {
    m: Vec<Vec<Node>>,
}

/// Outcome of [`validate_matrix`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatrixDiagnostics {
    pub problems: Vec<String>,
}

impl MatrixDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Checks shape, column rules and, if those pass, that the decoded trees are
/// spanning trees obeying proximity.
pub fn validate_matrix(m: &[Vec<Node>]) -> MatrixDiagnostics {
    let mut problems = Vec::new();
    let d = m.len();
    if d == 0 {
        problems.push("matrix is empty".to_string());
        return MatrixDiagnostics { problems };
    }
    for (r, row) in m.iter().enumerate() {
        if row.len() != d {
            problems.push(format!("row {} has {} entries, expected {d}", r + 1, row.len()));
        }
    }
    if !problems.is_empty() {
        return MatrixDiagnostics { problems };
    }
    for r in 0..d {
        for c in r + 1..d {
            if m[r][c] != 0 {
                problems.push(format!("nonzero entry above the diagonal at ({}, {})", r + 1, c + 1));
            }
        }
    }
    let diag: Vec<Node> = (0..d).map(|i| m[i][i]).collect();
    let sorted: BTreeSet<Node> = diag.iter().copied().collect();
    if sorted != (1..=d).collect::<BTreeSet<_>>() {
        problems.push(format!("diagonal {diag:?} is not a permutation of 1..{d}"));
    }
    for c in 0..d {
        let right: BTreeSet<Node> = diag[c + 1..].iter().copied().collect();
        let mut seen = BTreeSet::from([diag[c]]);
        for (r, row) in m.iter().enumerate().skip(c + 1) {
            let v = row[c];
            if !right.contains(&v) {
                problems.push(format!(
                    "entry {v} at ({}, {}) is not a diagonal entry right of column {}",
                    r + 1,
                    c + 1,
                    c + 1
                ));
            }
            if !seen.insert(v) {
                problems.push(format!("duplicate {v} in column {}", c + 1));
            }
        }
    }
    if problems.is_empty() {
        if let Err(e) = decode(m) {
            problems.push(e.to_string());
        }
    }
    MatrixDiagnostics { problems }
}

fn decode(m: &[Vec<Node>]) -> Result<VineTreeSequence> {
    let d = m.len();
    let mut trees = Vec::new();
    for t in 1..d {
        let r = d - t;
        let edges = (0..r)
            .map(|c| ((m[c][c], m[r][c]), m[r + 1..].iter().map(|row| row[c]).collect()))
            .collect();
        trees.push(edges);
    }
    VineTreeSequence::from_edge_labels(d, trees)
}

impl RVineMatrix {
    pub fn new(m: Vec<Vec<Node>>) -> Result<Self> {
        let diag = validate_matrix(&m);
        if !diag.is_valid() {
            return Err(Error::InvalidMatrix(diag.problems.join("; ")));
        }
        Ok(RVineMatrix { m })
    }

    pub fn d(&self) -> usize {
        self.m.len()
    }

    pub fn get(&self, r: usize, c: usize) -> Node {
        self.m[r][c]
    }

    pub fn rows(&self) -> &[Vec<Node>] {
        &self.m
    }

    pub fn diagonal(&self) -> Vec<Node> {
        (0..self.d()).map(|i| self.m[i][i]).collect()
    }

    /// Tree level of cell `(r, c)`, `r > c`.
    pub fn tree_of_row(&self, r: usize) -> usize {
        self.d() - r
    }

    pub fn row_of_tree(&self, t: usize) -> usize {
        self.d() - t
    }

    /// Conditioning set of cell `(r, c)`.
    pub fn conditioning(&self, r: usize, c: usize) -> BTreeSet<Node> {
        self.m[r + 1..].iter().map(|row| row[c]).collect()
    }

    /// Below-diagonal cells as `(row, col)`, bottom row (tree 1) first.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let d = self.d();
        (1..d)
            .flat_map(|t| {
                let r = d - t;
                (0..r).map(move |c| (r, c))
            })
            .collect()
    }

    /// Cell whose edge has conditioned pair `{a, b}`.
    pub fn find_pair(&self, a: Node, b: Node) -> Option<(usize, usize)> {
        let key = edge_key(a, b);
        self.cells()
            .into_iter()
            .find(|&(r, c)| edge_key(self.m[c][c], self.m[r][c]) == key)
    }

    pub fn to_trees(&self) -> VineTreeSequence {
        decode(&self.m).expect("validated matrix decodes")
    }

    /// Encodes a complete sequence. At each step the diagonal takes the
    /// larger conditioned label of the single edge in the current top tree.
    pub fn from_trees(v: &VineTreeSequence) -> Result<Self> {
        let d = v.d();
        if !v.is_complete() {
            return Err(Error::InvalidVine(format!(
                "sequence has {} of {} trees; complete it first",
                v.depth(),
                d - 1
            )));
        }
        // remaining edges per tree as (conditioned, conditioning)
        let mut remaining: Vec<Vec<((Node, Node), BTreeSet<Node>)>> = v
            .trees()
            .map(|(_, tr)| tr.iter().map(|e| (e.conditioned, e.conditioning.clone())).collect())
            .collect();
        let mut m = vec![vec![0; d]; d];
        let mut used = BTreeSet::new();
        for c in 0..d.saturating_sub(1) {
            let top = d - c - 1;
            let tree = &remaining[top - 1];
            if tree.len() != 1 {
                return Err(Error::InvalidVine(format!("tree {top} should have one remaining edge")));
            }
            let x = tree[0].0 .1.max(tree[0].0 .0);
            m[c][c] = x;
            used.insert(x);
            for t in (1..=top).rev() {
                let tree = &mut remaining[t - 1];
                let hits: Vec<usize> = (0..tree.len())
                    .filter(|&i| tree[i].0 .0 == x || tree[i].0 .1 == x)
                    .collect();
                if hits.len() != 1 {
                    return Err(Error::InvalidVine(format!(
                        "variable {x} is not a leaf of the remaining tree {t}"
                    )));
                }
                let ((a, b), _) = tree.remove(hits[0]);
                m[d - t][c] = if a == x { b } else { a };
            }
        }
        let last = (1..=d).find(|v| !used.contains(v)).expect("one label left");
        m[d - 1][d - 1] = last;
        RVineMatrix::new(m)
    }

    pub fn to_text(&self) -> String {
        write_int_matrix(&self.m)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        RVineMatrix::new(parse_int_matrix(text)?)
    }
}

/// 0/1 mask over the cells of an R-vine matrix; 0 marks an independence
/// pair copula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceMatrix {
    f: Vec<Vec<u8>>,
}

impl IndependenceMatrix {
    pub fn ones(d: usize) -> Self {
        Self::truncated(d, d.saturating_sub(1))
    }

    pub fn zeros(d: usize) -> Self {
        IndependenceMatrix { f: vec![vec![0; d]; d] }
    }

    /// Ones in trees `1..=k`, zeros above.
    pub fn truncated(d: usize, k: usize) -> Self {
        let mut f = Self::zeros(d);
        for t in 1..=k.min(d.saturating_sub(1)) {
            let r = d - t;
            for c in 0..r {
                f.f[r][c] = 1;
            }
        }
        f
    }

    pub fn from_rows(f: Vec<Vec<u8>>) -> Result<Self> {
        let d = f.len();
        for (r, row) in f.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidMatrix(format!("row {} has wrong length", r + 1)));
            }
            for (c, &x) in row.iter().enumerate() {
                if x > 1 {
                    return Err(Error::InvalidMatrix(format!("entry ({}, {}) is not 0/1", r + 1, c + 1)));
                }
                if x == 1 && r <= c {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({}, {}) lies on or above the diagonal",
                        r + 1,
                        c + 1
                    )));
                }
            }
        }
        Ok(IndependenceMatrix { f })
    }

    pub fn d(&self) -> usize {
        self.f.len()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.f[r][c] == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r > c, "only below-diagonal cells");
        self.f[r][c] = value as u8;
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.f
    }

    pub fn count_ones(&self) -> usize {
        self.f.iter().flatten().filter(|&&x| x == 1).count()
    }

    /// Smallest `k'` with every entry in trees above `k'` equal to 0.
    pub fn truncation_level(&self) -> usize {
        let d = self.d();
        (1..d)
            .rev()
            .find(|&t| self.f[d - t].iter().any(|&x| x == 1))
            .unwrap_or(0)
    }

    pub fn to_text(&self) -> String {
        let rows: Vec<Vec<usize>> = self
            .f
            .iter()
            .map(|r| r.iter().map(|&x| x as usize).collect())
            .collect();
        write_int_matrix(&rows)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let rows = parse_int_matrix(text)?;
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|x| x.min(255) as u8).collect())
            .collect();
        IndependenceMatrix::from_rows(rows)
    }
}

/// Shape check shared by structure and mask.
pub fn check_aligned(m: &RVineMatrix, f: &IndependenceMatrix) -> Result<()> {
    if m.d() != f.d() {
        return Err(Error::InvalidMatrix(format!(
            "independence matrix is {0}x{0} but the vine matrix is {1}x{1}",
            f.d(),
            m.d()
        )));
    }
    Ok(())
}

fn write_int_matrix(m: &[Vec<usize>]) -> String {
    let mut s = String::new();
    for row in m {
        let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        writeln!(s, "{}", line.join(" ")).unwrap();
    }
    s
}

fn parse_int_matrix(text: &str) -> Result<Vec<Vec<usize>>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("expected a non-negative integer, found {tok:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "matrix file is empty".into(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn printed() -> Vec<Vec<Node>> {
        vec![
            vec![4, 0, 0, 0, 0, 0],
            vec![1, 5, 0, 0, 0, 0],
            vec![3, 1, 3, 0, 0, 0],
            vec![6, 3, 1, 6, 0, 0],
            vec![2, 6, 2, 1, 2, 0],
            vec![5, 2, 6, 2, 1, 1],
        ]
    }

    #[test]
    fn printed_matrix_is_valid() {
        assert!(validate_matrix(&printed()).is_valid());
        let m = RVineMatrix::new(printed()).unwrap();
        let trees = m.to_trees();
        let t2: BTreeSet<_> = trees.tree(2).iter().map(|e| e.label()).collect();
        assert_eq!(
            t2,
            ["1,6|2", "2,3|6", "5,6|2", "2,4|5"].iter().map(|s| s.to_string()).collect()
        );
        assert_eq!(RVineMatrix::from_trees(&trees).unwrap(), m);
    }

    #[test]
    fn duplicate_entry_detected() {
        let mut m = printed();
        m[3][0] = 3;
        let diag = validate_matrix(&m);
        assert!(diag.problems.iter().any(|p| p.contains("duplicate 3 in column 1")));
    }

    #[test]
    fn two_dimensional() {
        let v = VineTreeSequence::from_tree_edges(2, vec![vec![(1, 2)]]).unwrap();
        let m = RVineMatrix::from_trees(&v).unwrap();
        assert_eq!(m.rows(), &[vec![2, 0], vec![1, 1]]);
        assert_eq!(m.to_trees().tree(1).len(), 1);
    }

    #[test]
    fn one_dimensional() {
        let v = VineTreeSequence::empty(1).unwrap();
        let m = RVineMatrix::from_trees(&v).unwrap();
        assert_eq!(m.rows(), &[vec![1]]);
    }

    #[test]
    fn text_roundtrip() {
        let m = RVineMatrix::new(printed()).unwrap();
        assert_eq!(RVineMatrix::from_text(&m.to_text()).unwrap(), m);
        let f = IndependenceMatrix::truncated(6, 2);
        assert_eq!(IndependenceMatrix::from_text(&f.to_text()).unwrap(), f);
    }

    #[test]
    fn truncation_levels() {
        assert_eq!(IndependenceMatrix::ones(6).truncation_level(), 5);
        assert_eq!(IndependenceMatrix::zeros(6).truncation_level(), 0);
        assert_eq!(IndependenceMatrix::truncated(6, 1).truncation_level(), 1);
        let mut f = IndependenceMatrix::truncated(6, 1);
        f.set(1, 0, true);
        assert_eq!(f.truncation_level(), 5);
        assert!(IndependenceMatrix::from_rows(vec![vec![1, 0], vec![0, 0]]).is_err());
    }
}
