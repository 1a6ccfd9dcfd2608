//! The bundled `report` run: every artifact for one catalog.

use gsee_core::catalog::Catalog;
use serde::Serialize;

use crate::evaluate::{run_evaluate, summarize, SolverSummary};
use crate::features::run_features;
use crate::oracle::run_oracle;
use crate::output::{write_json, Stamp};
use crate::solvability::run_solvability;
use crate::{Result, RunConfig};

pub const REPORT_JSON: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverLine {
    #[serde(flatten)]
    pub summary: SolverSummary,
    pub solvability_ratio: Option<f64>,
    pub solvability_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportIndex {
    pub config: RunConfigView,
    pub instances: usize,
    pub tasks: usize,
    pub feature_rows: usize,
    pub feature_failures: Vec<(String, String)>,
    pub oracle_results: usize,
    pub oracle_failures: usize,
    pub solvers: Vec<SolverLine>,
}

/// The output-relevant part of the configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfigView {
    pub df_threshold: f64,
    pub df_absolute: bool,
    pub latent: gsee_core::ml::LatentKind,
    pub latent_dim: usize,
    pub samples: usize,
    pub threshold: f64,
    pub seed: u64,
    pub features: Vec<String>,
    pub folds: usize,
}

impl From<&RunConfig> for RunConfigView {
    fn from(c: &RunConfig) -> Self {
        Self {
            df_threshold: c.df_threshold,
            df_absolute: c.df_absolute,
            latent: c.latent,
            latent_dim: c.latent_dim,
            samples: c.samples,
            threshold: c.threshold,
            seed: c.seed,
            features: c.features.clone(),
            folds: c.folds,
        }
    }
}

pub fn run_report(cfg: &RunConfig) -> Result<ReportIndex> {
    cfg.validate()?;
    let catalog = Catalog::scan(&cfg.catalog)?;
    let pool = cfg.thread_pool()?;
    let table = run_features(&catalog, cfg, &pool)?;
    let solvers = run_evaluate(&catalog, cfg)?;
    let oracle = run_oracle(&catalog, cfg, &pool)?;
    let maps = run_solvability(&table, &solvers, cfg, &pool)?;
    let lines = solvers
        .iter()
        .map(|s| {
            let map = maps
                .iter()
                .find(|(id, _)| *id == s.solver_uuid)
                .map(|(_, r)| r);
            SolverLine {
                summary: summarize(s),
                solvability_ratio: map
                    .and_then(|r| r.as_ref().ok())
                    .map(|m| m.report.solvability_ratio),
                solvability_error: map.and_then(|r| r.as_ref().err()).map(|e| e.to_string()),
            }
        })
        .collect();
    let index = ReportIndex {
        config: cfg.into(),
        instances: catalog.instances.len(),
        tasks: catalog.tasks().count(),
        feature_rows: table.rows.len(),
        feature_failures: table.failures.clone(),
        oracle_results: oracle.results.len(),
        oracle_failures: oracle.failures.len(),
        solvers: lines,
    };
    write_json(&cfg.out.join(REPORT_JSON), &Stamp::new(cfg.hash()), &index)?;
    Ok(index)
}
