//! Browser bindings. Each export takes plain text and returns a JSON string.

use std::collections::BTreeSet;

use serde::Serialize;
use vinedag::io::{dag_to_dot, parse_dag, vine_to_dot};
use vinedag::{represent_dag_rvine, Family, HeuristicOptions, Node, PairCopula};
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct TreeEdge {
    conditioned: (Node, Node),
    conditioning: Vec<Node>,
    weight: f64,
    independent: bool,
}

#[derive(Serialize)]
struct RepresentOut {
    matrix: String,
    independence: String,
    truncation_level: usize,
    lower_bound: usize,
    trees: Vec<Vec<TreeEdge>>,
    warnings: Vec<String>,
    dot: String,
}

#[derive(Serialize)]
struct DsepOut {
    separated: bool,
    v_structures: Vec<(Node, Node, Node)>,
    dot: String,
}

#[derive(Serialize)]
struct GridOut {
    tau: f64,
    n: usize,
    /// Row-major densities, row `i` at `v = (i + 0.5) / n`, column `j` at `u = (j + 0.5) / n`.
    density: Vec<f64>,
    max: f64,
}

fn numbers<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, String> {
    text.split([',', ' '])
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse().map_err(|_| format!("{what}: cannot parse '{}'", p.trim())))
        .collect()
}

fn json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// DAG edge lists separated by lines holding only `---`, ordered by parent cap.
pub fn represent_text(dags: &str, g: &str, mu0: Option<f64>) -> Result<String, String> {
    let mut parsed = Vec::new();
    let mut block = String::new();
    for line in dags.lines().chain(std::iter::once("---")) {
        if line.trim() == "---" {
            if !block.trim().is_empty() {
                parsed.push(parse_dag(&block).map_err(|e| format!("DAG {}: {e}", parsed.len() + 1))?);
            }
            block.clear();
        } else {
            block.push_str(line);
            block.push('\n');
        }
    }
    if parsed.is_empty() {
        return Err("no DAG given".into());
    }
    let opts = HeuristicOptions { g: numbers(g, "g")?, mu0 };
    let rep = represent_dag_rvine(&parsed, &opts).map_err(|e| e.to_string())?;
    let trees = rep
        .selected
        .iter()
        .map(|t| {
            t.iter()
                .map(|e| TreeEdge {
                    conditioned: e.conditioned,
                    conditioning: e.conditioning.clone(),
                    weight: e.weight,
                    independent: e.independent,
                })
                .collect()
        })
        .collect();
    json(&RepresentOut {
        matrix: rep.matrix.to_text(),
        independence: rep.independence.to_text(),
        truncation_level: rep.truncation_level,
        lower_bound: rep.lower_bound,
        trees,
        warnings: rep.warnings,
        dot: vine_to_dot(&rep.trees),
    })
}

pub fn d_separation_text(dag: &str, a: &str, b: &str, s: &str) -> Result<String, String> {
    let g = parse_dag(dag).map_err(|e| e.to_string())?;
    let set = |t: &str, w: &str| numbers::<Node>(t, w).map(|v| v.into_iter().collect::<BTreeSet<_>>());
    let separated = g.d_separated(&set(a, "A")?, &set(b, "B")?, &set(s, "S")?).map_err(|e| e.to_string())?;
    json(&DsepOut { separated, v_structures: g.v_structures().into_iter().collect(), dot: dag_to_dot(&g, true) })
}

pub fn copula_grid_text(family: &str, params: &str, rotation: u16, n: usize) -> Result<String, String> {
    if !(2..=200).contains(&n) {
        return Err(format!("grid size {n} outside 2..=200"));
    }
    let family: Family = family.parse().map_err(|e: vinedag::Error| e.to_string())?;
    let c = PairCopula::new(family, numbers(params, "parameters")?, rotation).map_err(|e| e.to_string())?;
    let at = |i: usize| (i as f64 + 0.5) / n as f64;
    let density: Vec<f64> = (0..n * n).map(|k| c.density(at(k % n), at(k / n))).collect();
    let max = density.iter().copied().filter(|x| x.is_finite()).fold(0.0, f64::max);
    json(&GridOut { tau: c.tau(), n, density, max })
}

#[wasm_bindgen]
pub fn represent(dags: &str, g: &str, mu0: Option<f64>) -> Result<String, JsError> {
    represent_text(dags, g, mu0).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn d_separation(dag: &str, a: &str, b: &str, s: &str) -> Result<String, JsError> {
    d_separation_text(dag, a, b, s).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn copula_grid(family: &str, params: &str, rotation: u16, n: usize) -> Result<String, JsError> {
    copula_grid_text(family, params, rotation, n).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use vinedag::fixtures;
    use vinedag::io::write_dag;

    #[test]
    fn represent_toy_dags() {
        let text: Vec<String> = fixtures::toy_dags().iter().map(write_dag).collect();
        let out: serde_json::Value = serde_json::from_str(&represent_text(&text.join("---\n"), "", None).unwrap()).unwrap();
        assert_eq!(out["lower_bound"], 3);
        assert_eq!(out["trees"].as_array().unwrap().len(), 5);
        assert!(out["dot"].as_str().unwrap().starts_with("graph"));
    }

    #[test]
    fn represent_rejects_bad_input() {
        assert!(represent_text("", "", None).is_err());
        assert!(represent_text("1 -> x\n", "", None).unwrap_err().contains("line 1"));
        assert!(represent_text("1 -> 2\n", "1,2", None).is_err());
    }

    #[test]
    fn chain_d_separation() {
        let dag = "1 -> 2\n2 -> 3\n";
        let sep = |s| serde_json::from_str::<serde_json::Value>(&d_separation_text(dag, "1", "3", s).unwrap()).unwrap();
        assert_eq!(sep("2")["separated"], true);
        assert_eq!(sep("")["separated"], false);
        assert!(d_separation_text(dag, "1", "9", "").is_err());
    }

    #[test]
    fn density_grid_averages_to_one() {
        let out: serde_json::Value = serde_json::from_str(&copula_grid_text("frank", "4", 0, 100).unwrap()).unwrap();
        let dens: Vec<f64> = out["density"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        let mean = dens.iter().sum::<f64>() / dens.len() as f64;
        assert!((mean - 1.0).abs() < 1e-2, "{mean}");
        assert!(out["tau"].as_f64().unwrap() > 0.3);
        assert!(copula_grid_text("nope", "1", 0, 10).is_err());
        assert!(copula_grid_text("clayton", "2", 45, 10).is_err());
    }

    #[test]
    fn demo_page_defaults() {
        let dags = "1 -> 2\n2 -> 3\n4\n---\n1 -> 2\n2 -> 3\n1 -> 3\n3 -> 4\n";
        represent_text(dags, "", None).unwrap();
        d_separation_text("1 -> 3\n2 -> 3\n3 -> 4\n", "1", "2", "4").unwrap();
        for (f, p) in [("gaussian", "0.5"), ("student-t", "0.5,4"), ("clayton", "2"), ("gumbel", "2"), ("frank", "5")] {
            copula_grid_text(f, p, 0, 100).unwrap();
        }
    }
}
