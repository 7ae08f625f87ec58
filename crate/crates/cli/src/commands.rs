use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use vinedag::copula::Family;
use vinedag::io::{dag_to_dot, graph_to_dot, parse_dag, parse_edge_list, parse_undirected, vine_to_dot, write_dag};
use vinedag::learning::{hill_climb_dag, to_z_scale, HillClimbOptions};
use vinedag::representation::truncation_lower_bound;
use vinedag::{
    dissmann_select, fit_rvine, represent_dag_rvine, BaselineConfig, Dag, Dataset, FitOptions, HeuristicOptions,
    IndependenceMatrix, Node, RVineMatrix, RVineModel, Representation, Scale,
};

use crate::files::{copula_data, ensure_dir, read_dataset, read_model, read_text, write_json, write_model, write_text};
use crate::{substream, CliError, CliResult, Stream};

pub(crate) fn seconds(start: Instant, timings: bool) -> Option<f64> {
    timings.then(|| start.elapsed().as_secs_f64())
}

// ---------------------------------------------------------------- learn-dags

#[derive(Clone, Debug)]
pub struct LearnArgs {
    pub input: PathBuf,
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    pub scale: Option<Scale>,
    pub out: PathBuf,
    pub timings: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LearnedDag {
    pub max_parents: usize,
    pub file: String,
    pub bic: f64,
    pub arrows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LearnReport {
    pub n: usize,
    pub d: usize,
    pub labels: Vec<String>,
    pub seed: u64,
    pub dags: Vec<LearnedDag>,
}

pub fn dag_file_name(i: usize) -> String {
    format!("dag_{i}.txt")
}

/// Learns one DAG per parent cap `1..=k` on normal scores.
pub(crate) fn learn_dags(data: &Dataset, k: usize, seed: u64, restarts: usize, timings: bool) -> CliResult<Vec<(Dag, LearnedDag)>> {
    if k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let z = to_z_scale(data)?;
    let mut out = Vec::with_capacity(k);
    for i in 1..=k {
        let start = Instant::now();
        let opts = HillClimbOptions {
            restarts,
            seed: substream(seed, Stream::Learning, i as u64),
            ..HillClimbOptions::new(i)
        };
        let res = hill_climb_dag(&z, &opts)?;
        let info = LearnedDag {
            max_parents: i,
            file: dag_file_name(i),
            bic: res.bic,
            arrows: res.dag.arrow_count(),
            seconds: seconds(start, timings),
        };
        out.push((res.dag, info));
    }
    Ok(out)
}

pub fn cmd_learn_dags(args: &LearnArgs) -> CliResult<LearnReport> {
    let data = read_dataset(&args.input, args.scale)?;
    let learned = learn_dags(&data, args.k, args.seed, args.restarts, args.timings)?;
    ensure_dir(&args.out)?;
    for (dag, info) in &learned {
        write_text(&args.out.join(&info.file), &write_dag(dag))?;
    }
    let report = LearnReport {
        n: data.n(),
        d: data.d(),
        labels: data.labels().to_vec(),
        seed: args.seed,
        dags: learned.into_iter().map(|(_, info)| info).collect(),
    };
    write_json(&args.out.join("learn_report.json"), &report)?;
    Ok(report)
}

// ---------------------------------------------------------------- represent

#[derive(Clone, Debug)]
pub struct RepresentArgs {
    /// DAGs ordered by parent cap.
    pub inputs: Vec<PathBuf>,
    pub g: Option<Vec<f64>>,
    pub mu0: Option<f64>,
    pub out: PathBuf,
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeEdge {
    pub edge: String,
    pub conditioned: (Node, Node),
    pub conditioning: Vec<Node>,
    pub weight: f64,
    pub independent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RepresentReport {
    pub d: usize,
    pub dags: usize,
    pub g: Vec<f64>,
    pub mu0: f64,
    pub truncation_level: usize,
    pub lower_bound: usize,
    /// Per node: `(parent, distance in tree 1)`.
    pub distances: BTreeMap<Node, Vec<(Node, usize)>>,
    pub trees: Vec<Vec<TreeEdge>>,
    pub warnings: Vec<String>,
}

pub(crate) fn read_dag(path: &Path) -> CliResult<Dag> {
    parse_dag(&read_text(path)?).map_err(|source| CliError::File { path: path.display().to_string(), source })
}

pub(crate) fn heuristic_options(k: usize, g: &Option<Vec<f64>>, mu0: Option<f64>) -> (HeuristicOptions, Vec<f64>, f64) {
    let g = g.clone().unwrap_or_else(|| vec![1.0; k]);
    let mu0_eff = mu0.unwrap_or(g.first().copied().unwrap_or(1.0) / 2.0);
    (HeuristicOptions { g: g.clone(), mu0: Some(mu0_eff) }, g, mu0_eff)
}

pub(crate) fn represent_report(dags: &[Dag], rep: &Representation, g: Vec<f64>, mu0: f64) -> CliResult<RepresentReport> {
    let last = dags.last().expect("at least one DAG");
    let distances = if last.len() > 1 {
        truncation_lower_bound(last, &rep.trees.tree_graph(1))?.1
    } else {
        BTreeMap::new()
    };
    let trees = rep
        .selected
        .iter()
        .map(|tree| {
            tree.iter()
                .map(|e| {
                    let (a, b) = e.conditioned;
                    let edge = if e.conditioning.is_empty() {
                        format!("{a},{b}")
                    } else {
                        let d: Vec<String> = e.conditioning.iter().map(|v| v.to_string()).collect();
                        format!("{a},{b}|{}", d.join(","))
                    };
                    TreeEdge {
                        edge,
                        conditioned: e.conditioned,
                        conditioning: e.conditioning.clone(),
                        weight: e.weight,
                        independent: e.independent,
                    }
                })
                .collect()
        })
        .collect();
    Ok(RepresentReport {
        d: last.len(),
        dags: dags.len(),
        g,
        mu0,
        truncation_level: rep.truncation_level,
        lower_bound: rep.lower_bound,
        distances,
        trees,
        warnings: rep.warnings.clone(),
    })
}

pub fn cmd_represent(args: &RepresentArgs) -> CliResult<RepresentReport> {
    if args.inputs.is_empty() {
        return Err(CliError::Usage("represent needs at least one DAG file".into()));
    }
    let dags = args.inputs.iter().map(|p| read_dag(p)).collect::<CliResult<Vec<_>>>()?;
    let (opts, g, mu0) = heuristic_options(dags.len(), &args.g, args.mu0);
    let rep = represent_dag_rvine(&dags, &opts)?;
    let report = represent_report(&dags, &rep, g, mu0)?;
    ensure_dir(&args.out)?;
    write_text(&args.out.join(crate::MATRIX_FILE), &rep.matrix.to_text())?;
    write_text(&args.out.join(crate::INDEPENDENCE_FILE), &rep.independence.to_text())?;
    write_json(&args.out.join("represent_report.json"), &report)?;
    Ok(report)
}

// ---------------------------------------------------------------- fit

#[derive(Clone, Debug)]
pub struct FitArgs {
    pub input: PathBuf,
    pub matrix: PathBuf,
    /// All ones when absent.
    pub independence: Option<PathBuf>,
    pub families: Vec<Family>,
    pub alpha: Option<f64>,
    pub truncate: Option<usize>,
    pub scale: Option<Scale>,
    pub out: PathBuf,
    pub timings: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub n: usize,
    pub d: usize,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub n_params: usize,
    pub n_nonindependent: usize,
    pub truncation_level: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

impl FitReport {
    pub(crate) fn new(model: &RVineModel, data: &Dataset, secs: Option<f64>) -> CliResult<Self> {
        let loglik = model.loglik(data)?;
        let p = model.n_params() as f64;
        Ok(FitReport {
            n: data.n(),
            d: data.d(),
            loglik,
            aic: -2.0 * loglik + 2.0 * p,
            bic: -2.0 * loglik + p * (data.n() as f64).ln(),
            n_params: model.n_params(),
            n_nonindependent: model.n_dependent(),
            truncation_level: model.truncation_level(),
            seconds: secs,
        })
    }
}

/// Clears every cell above tree `k`.
pub(crate) fn truncate(f: &IndependenceMatrix, k: usize) -> IndependenceMatrix {
    let d = f.d();
    let mut out = f.clone();
    for r in 1..d {
        if d - r > k {
            for c in 0..r {
                out.set(r, c, false);
            }
        }
    }
    out
}

fn check_truncation(t: Option<usize>, d: usize) -> CliResult<()> {
    match t {
        Some(k) if k == 0 || k >= d.max(2) => {
            Err(CliError::Usage(format!("--truncate {k} outside 1..{}", d.saturating_sub(1))))
        }
        _ => Ok(()),
    }
}

pub fn cmd_fit(args: &FitArgs) -> CliResult<FitReport> {
    let data = copula_data(&read_dataset(&args.input, args.scale)?)?;
    let matrix = RVineMatrix::from_text(&read_text(&args.matrix)?)
        .map_err(|source| CliError::File { path: args.matrix.display().to_string(), source })?;
    let mut f = match &args.independence {
        Some(p) => IndependenceMatrix::from_text(&read_text(p)?)
            .map_err(|source| CliError::File { path: p.display().to_string(), source })?,
        None => IndependenceMatrix::ones(matrix.d()),
    };
    check_truncation(args.truncate, matrix.d())?;
    if let Some(k) = args.truncate {
        f = truncate(&f, k);
    }
    let opts = FitOptions { families: args.families.clone(), alpha: args.alpha };
    let start = Instant::now();
    let model = fit_rvine(&data, &matrix, &f, &opts)?;
    let secs = seconds(start, args.timings);
    let report = FitReport::new(&model, &data, secs)?;
    write_model(&args.out, &model)?;
    write_json(&args.out.join("fit_report.json"), &report)?;
    Ok(report)
}

// ---------------------------------------------------------------- simulate

#[derive(Clone, Debug)]
pub struct SimulateArgs {
    /// Model directory.
    pub input: PathBuf,
    pub n: usize,
    pub seed: u64,
    /// CSV file.
    pub out: PathBuf,
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<Dataset> {
    let model = read_model(&args.input)?;
    let data = model.simulate(args.n, substream(args.seed, Stream::Simulation, 0))?;
    write_text(&args.out, &data.to_csv_string())?;
    Ok(data)
}

// ---------------------------------------------------------------- dissmann

#[derive(Clone, Debug)]
pub struct DissmannArgs {
    pub input: PathBuf,
    pub families: Vec<Family>,
    pub alpha: Option<f64>,
    pub truncate: Option<usize>,
    pub scale: Option<Scale>,
    pub out: PathBuf,
    pub timings: bool,
}

pub fn cmd_dissmann(args: &DissmannArgs) -> CliResult<FitReport> {
    let data = copula_data(&read_dataset(&args.input, args.scale)?)?;
    check_truncation(args.truncate, data.d())?;
    let cfg = BaselineConfig { families: args.families.clone(), truncation: args.truncate, alpha: args.alpha };
    let start = Instant::now();
    let model = dissmann_select(&data, &cfg)?;
    let secs = seconds(start, args.timings);
    let report = FitReport::new(&model, &data, secs)?;
    write_model(&args.out, &model)?;
    write_json(&args.out.join("dissmann_report.json"), &report)?;
    Ok(report)
}

// ---------------------------------------------------------------- export-dot

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DotKind {
    /// R-vine matrix if the file parses as one, else an edge list.
    Auto,
    Dag,
    Graph,
    Vine,
}

#[derive(Clone, Debug)]
pub struct ExportDotArgs {
    pub input: PathBuf,
    pub kind: DotKind,
    pub highlight: bool,
    pub out: PathBuf,
}

pub fn cmd_export_dot(args: &ExportDotArgs) -> CliResult<String> {
    let text = read_text(&args.input)?;
    let in_file = |source| CliError::File { path: args.input.display().to_string(), source };
    let kind = match args.kind {
        DotKind::Auto => match RVineMatrix::from_text(&text) {
            Ok(m) if m.d() > 1 => DotKind::Vine,
            _ => match parse_edge_list(&text).map_err(in_file)?.directed {
                Some(false) => DotKind::Graph,
                _ => DotKind::Dag,
            },
        },
        k => k,
    };
    let dot = match kind {
        DotKind::Vine => vine_to_dot(&RVineMatrix::from_text(&text).map_err(in_file)?.to_trees()),
        DotKind::Graph => graph_to_dot(&parse_undirected(&text).map_err(in_file)?),
        _ => dag_to_dot(&parse_dag(&text).map_err(in_file)?, args.highlight),
    };
    write_text(&args.out, &dot)?;
    Ok(dot)
}
