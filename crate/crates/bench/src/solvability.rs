//! Per-solver solvability maps from the feature table and scored outcomes.

use gsee_core::catalog::Verdict;
use gsee_core::ml::solvability::{estimate_solvability, SolvabilityConfig, SolvabilityReport};
use gsee_core::ml::MlError;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::evaluate::SolverOutcomes;
use crate::features::FeatureTable;
use crate::output::{fmt_f64, write_csv, write_file, write_json, Stamp};
use crate::svg::latent_map_svg;
use crate::{sanitize, Result, RunConfig};

pub const SUMMARY_CSV: &str = "solvability_summary.csv";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverMap {
    pub solver_uuid: String,
    pub solver_short_name: String,
    /// Task behind each `report.data_points[i].row`.
    pub row_tasks: Vec<String>,
    pub report: SolvabilityReport,
}

pub fn ml_config(cfg: &RunConfig) -> SolvabilityConfig {
    SolvabilityConfig {
        latent: cfg.latent,
        latent_dim: cfg.latent_dim,
        n_samples: cfg.samples,
        threshold: cfg.threshold,
        seed: cfg.seed,
        folds: cfg.folds,
        ..Default::default()
    }
}

/// Joins features with outcomes: labeled rows train, guidestar rows are only placed on the map.
pub fn solvability_for(
    table: &FeatureTable,
    outcomes: &SolverOutcomes,
    cfg: &RunConfig,
) -> std::result::Result<SolverMap, MlError> {
    let pick = |f: &gsee_core::qubit_features::FeatureVector| -> Vec<f64> {
        cfg.features
            .iter()
            .map(|name| f.get(name).expect("validated feature name"))
            .collect()
    };
    let mut labeled: Vec<(String, Vec<f64>, bool)> = Vec::new();
    let mut unlabeled: Vec<(String, Vec<f64>)> = Vec::new();
    for o in &outcomes.outcomes {
        let Some(row) = table.get(&o.task_uuid) else {
            continue;
        };
        match o.verdict.label() {
            Some(label) => labeled.push((o.task_uuid.clone(), pick(&row.features), label)),
            None => unlabeled.push((o.task_uuid.clone(), pick(&row.features))),
        }
    }
    let d = cfg.features.len();
    let x = DMatrix::from_fn(labeled.len(), d, |r, c| labeled[r].1[c]);
    let labels: Vec<bool> = labeled.iter().map(|r| r.2).collect();
    let extra = DMatrix::from_fn(unlabeled.len(), d, |r, c| unlabeled[r].1[c]);
    let report = estimate_solvability(
        &x,
        &labels,
        &cfg.features,
        (!unlabeled.is_empty()).then_some(&extra),
        &ml_config(cfg),
    )?;
    let row_tasks = labeled
        .into_iter()
        .map(|r| r.0)
        .chain(unlabeled.into_iter().map(|r| r.0))
        .collect();
    Ok(SolverMap {
        solver_uuid: outcomes.solver_uuid.clone(),
        solver_short_name: outcomes.solver_short_name.clone(),
        row_tasks,
        report,
    })
}

fn verdict_name(label: Option<bool>) -> &'static str {
    match label {
        Some(true) => Verdict::Solved.as_str(),
        Some(false) => Verdict::Unsolved.as_str(),
        None => "guidestar",
    }
}

pub fn write_map(map: &SolverMap, cfg: &RunConfig, stamp: &Stamp) -> Result<()> {
    let id = sanitize(&map.solver_uuid);
    write_json(&cfg.out.join(format!("solvability_{id}.json")), stamp, map)?;

    let dim = map.report.latent.dim;
    let mut header = vec!["source".to_string(), "task_uuid".to_string()];
    header.extend((1..=dim).map(|i| format!("z{i}")));
    header.extend(["probability".to_string(), "label".to_string()]);
    let samples = map.report.latent_points.iter().map(|p| {
        let mut row = vec!["sample".to_string(), String::new()];
        row.extend(p.coords.iter().map(|v| fmt_f64(*v)));
        row.extend([fmt_f64(p.probability), String::new()]);
        row
    });
    let tasks = map.report.data_points.iter().map(|p| {
        let mut row = vec!["task".to_string(), map.row_tasks[p.row].clone()];
        row.extend(p.coords.iter().map(|v| fmt_f64(*v)));
        row.extend([fmt_f64(p.probability), verdict_name(p.label).to_string()]);
        row
    });
    write_csv(
        &cfg.out.join(format!("latent_{id}.csv")),
        stamp,
        &header,
        samples.chain(tasks),
    )?;

    let title = format!("{} ({})", map.solver_short_name, map.solver_uuid);
    let svg = latent_map_svg(&map.report, &title, &stamp.comment());
    write_file(&cfg.out.join(format!("latent_{id}.svg")), svg.as_bytes())
}

pub type SolverResult = (String, std::result::Result<SolverMap, MlError>);

/// One map per solver (in the given order), computed in parallel. Failures
/// such as too few labels are logged and listed in the summary.
pub fn run_solvability(
    table: &FeatureTable,
    solvers: &[SolverOutcomes],
    cfg: &RunConfig,
    pool: &rayon::ThreadPool,
) -> Result<Vec<SolverResult>> {
    let stamp = Stamp::new(cfg.hash());
    let selected: Vec<&SolverOutcomes> = solvers
        .iter()
        .filter(|s| cfg.solver.as_ref().is_none_or(|id| *id == s.solver_uuid))
        .collect();
    let results: Vec<SolverResult> = pool.install(|| {
        selected
            .par_iter()
            .map(|s| (s.solver_uuid.clone(), solvability_for(table, s, cfg)))
            .collect()
    });
    let mut summary = Vec::new();
    for (solver, result) in &results {
        match result {
            Ok(map) => {
                write_map(map, cfg, &stamp)?;
                let r = &map.report;
                summary.push(vec![
                    solver.clone(),
                    "ok".into(),
                    fmt_f64(r.solvability_ratio),
                    r.n_labeled.to_string(),
                    fmt_f64(r.metrics.precision),
                    fmt_f64(r.metrics.recall),
                    fmt_f64(r.metrics.f1),
                    String::new(),
                ]);
            }
            Err(e) => {
                log::warn!("solver {solver}: solvability skipped: {e}");
                let mut row = vec![solver.clone(), "skipped".into()];
                row.extend(std::iter::repeat_n(String::new(), 5));
                row.push(e.to_string());
                summary.push(row);
            }
        }
    }
    write_csv(
        &cfg.out.join(SUMMARY_CSV),
        &stamp,
        &[
            "solver_uuid",
            "status",
            "solvability_ratio",
            "n_labeled",
            "precision",
            "recall",
            "f1",
            "reason",
        ]
        .map(String::from),
        summary,
    )?;
    Ok(results)
}
