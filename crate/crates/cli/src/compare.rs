use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use vinedag::copula::Family;
use vinedag::learning::{
    fit_sem, implied_correlation_dag, implied_correlation_rvine, kl_divergence, sample_correlation, to_z_scale,
    vine_from_correlation,
};
use vinedag::{dissmann_select, fit_rvine, represent_dag_rvine, BaselineConfig, FitOptions, Scale};

use crate::commands::{heuristic_options, learn_dags, seconds, truncate};
use crate::files::{copula_data, ensure_dir, read_dataset, write_json, write_text};
use crate::{CliError, CliResult};

#[derive(Clone, Debug)]
pub struct CompareArgs {
    pub input: PathBuf,
    pub k: usize,
    pub g: Option<Vec<f64>>,
    pub mu0: Option<f64>,
    pub families: Vec<Family>,
    pub alpha: Option<f64>,
    /// Adds a truncated baseline row.
    pub truncate: Option<usize>,
    pub seed: u64,
    pub restarts: usize,
    pub scale: Option<Scale>,
    pub out: PathBuf,
    pub timings: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareRow {
    pub model: String,
    pub n_params: usize,
    pub loglik: f64,
    pub bic: f64,
    pub truncation_level: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

/// `KL(sample, DAG)`, `KL(DAG, its vine)` and `KL(sample, vine)` for the
/// Gaussian models of the `k`-th DAG.
#[derive(Clone, Debug, Serialize)]
pub struct KlRow {
    pub k: usize,
    pub sample_vs_dag: f64,
    pub dag_vs_vine: f64,
    pub sample_vs_vine: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub n: usize,
    pub d: usize,
    pub rows: Vec<CompareRow>,
    pub kl: Vec<KlRow>,
}

impl CompareReport {
    pub fn table(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{:<22} {:>8} {:>14} {:>14} {:>4} {:>10}", "model", "No. par", "log-Lik", "BIC", "k'", "time").unwrap();
        for r in &self.rows {
            let time = r.seconds.map_or_else(|| "-".to_string(), |t| format!("{t:.3}s"));
            writeln!(
                s,
                "{:<22} {:>8} {:>14.3} {:>14.3} {:>4} {:>10}",
                r.model, r.n_params, r.loglik, r.bic, r.truncation_level, time
            )
            .unwrap();
        }
        writeln!(s).unwrap();
        writeln!(s, "{:<4} {:>16} {:>16} {:>16}", "k", "KL(S, G_k)", "KL(G_k, V)", "KL(S, V)").unwrap();
        for r in &self.kl {
            writeln!(s, "{:<4} {:>16.6e} {:>16.6e} {:>16.6e}", r.k, r.sample_vs_dag, r.dag_vs_vine, r.sample_vs_vine).unwrap();
        }
        s
    }
}

/// Learns `G_1..G_k`, represents and fits each prefix, runs the baseline
/// and reports both side by side with Gaussian KL diagnostics.
pub fn cmd_compare(args: &CompareArgs) -> CliResult<CompareReport> {
    if args.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    if let Some(g) = &args.g {
        if g.len() != args.k {
            return Err(CliError::Usage(format!("--g has {} weights for --k {}", g.len(), args.k)));
        }
    }
    let raw = read_dataset(&args.input, args.scale)?;
    let data = copula_data(&raw)?;
    let z = to_z_scale(&raw)?;
    let d = raw.d();
    if let Some(t) = args.truncate {
        if t == 0 || t >= d.max(2) {
            return Err(CliError::Usage(format!("--truncate {t} outside 1..{}", d.saturating_sub(1))));
        }
    }
    let learned = learn_dags(&raw, args.k, args.seed, args.restarts, false)?;
    let dags: Vec<_> = learned.into_iter().map(|(g, _)| g).collect();
    let opts = FitOptions { families: args.families.clone(), alpha: args.alpha };
    let sigma_hat = sample_correlation(&z)?;

    let mut rows = Vec::new();
    let mut kl = Vec::new();
    for i in 1..=dags.len() {
        let (h, _, _) = heuristic_options(i, &args.g.as_ref().map(|g| g[..i].to_vec()), args.mu0);
        let start = Instant::now();
        let rep = represent_dag_rvine(&dags[..i], &h)?;
        let f = match args.truncate {
            Some(t) => truncate(&rep.independence, t),
            None => rep.independence.clone(),
        };
        let model = fit_rvine(&data, &rep.matrix, &f, &opts)?;
        let secs = seconds(start, args.timings);
        rows.push(CompareRow {
            model: format!("DAG-based k={i}"),
            n_params: model.n_params(),
            loglik: model.loglik(&data)?,
            bic: model.bic(&data)?,
            truncation_level: model.truncation_level(),
            seconds: secs,
        });

        let sigma_g = implied_correlation_dag(&fit_sem(&dags[i - 1], &z)?)?;
        let vine = vine_from_correlation(&sigma_g, &rep.matrix, &rep.independence)?;
        let sigma_v = implied_correlation_rvine(&vine)?;
        kl.push(KlRow {
            k: i,
            sample_vs_dag: kl_divergence(&sigma_hat, &sigma_g)?,
            dag_vs_vine: kl_divergence(&sigma_g, &sigma_v)?,
            sample_vs_vine: kl_divergence(&sigma_hat, &sigma_v)?,
        });
    }

    let mut baselines = vec![None];
    if args.truncate.is_some() {
        baselines.push(args.truncate);
    }
    for t in baselines {
        let cfg = BaselineConfig { families: args.families.clone(), truncation: t, alpha: args.alpha };
        let start = Instant::now();
        let model = dissmann_select(&data, &cfg)?;
        let secs = seconds(start, args.timings);
        rows.push(CompareRow {
            model: match t {
                Some(t) => format!("baseline t={t}"),
                None => "baseline".to_string(),
            },
            n_params: model.n_params(),
            loglik: model.loglik(&data)?,
            bic: model.bic(&data)?,
            truncation_level: model.truncation_level(),
            seconds: secs,
        });
    }

    let report = CompareReport { n: raw.n(), d, rows, kl };
    ensure_dir(&args.out)?;
    write_json(&args.out.join("compare.json"), &report)?;
    write_text(&args.out.join("compare.txt"), &report.table())?;
    Ok(report)
}
