//! Exact FCI energies for catalog tasks.

use std::collections::BTreeMap;
use std::path::PathBuf;

use gsee_core::catalog::Catalog;
use gsee_core::fci;
use gsee_core::fcidump::read_fcidump;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{write_json, Stamp};
use crate::{Result, RunConfig};

pub const ORACLE_JSON: &str = "oracle.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRecord {
    pub task_uuid: String,
    pub e0: f64,
    pub e1: Option<f64>,
    pub gap: Option<f64>,
    pub dim: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleFailure {
    pub task_uuid: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct OracleRun {
    pub results: Vec<OracleRecord>,
    pub failures: Vec<OracleFailure>,
}

/// `(e0, e1, gap, dim, converged)`.
pub type Energies = (f64, Option<f64>, Option<f64>, usize, bool);

pub fn oracle_energies(path: &std::path::Path) -> std::result::Result<Energies, String> {
    let dump = read_fcidump(path).map_err(|e| e.to_string())?;
    let (basis, spectrum) =
        fci::solve(&dump, 2, fci::DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
    Ok((
        spectrum.energies[0],
        spectrum.energies.get(1).copied(),
        spectrum.gap,
        basis.len(),
        spectrum.converged,
    ))
}

pub fn compute_oracle(catalog: &Catalog, pool: &rayon::ThreadPool) -> OracleRun {
    let tasks: Vec<(String, PathBuf)> = catalog
        .tasks()
        .map(|(inst, t)| (t.task_uuid.clone(), inst.fcidump_path(t)))
        .collect();
    let mut unique: Vec<PathBuf> = tasks.iter().map(|t| t.1.clone()).collect();
    unique.sort();
    unique.dedup();
    let solved: Vec<_> = pool.install(|| unique.par_iter().map(|p| oracle_energies(p)).collect());
    let by_path: BTreeMap<&PathBuf, _> = unique.iter().zip(&solved).collect();
    let mut run = OracleRun::default();
    for (task_uuid, path) in tasks {
        match by_path[&path] {
            Ok((e0, e1, gap, dim, converged)) => {
                if !converged {
                    log::warn!("task {task_uuid}: eigensolver did not reach tolerance");
                }
                run.results.push(OracleRecord {
                    task_uuid,
                    e0: *e0,
                    e1: *e1,
                    gap: *gap,
                    dim: *dim,
                    converged: *converged,
                })
            }
            Err(reason) => {
                log::warn!("task {task_uuid}: oracle skipped: {reason}");
                run.failures.push(OracleFailure {
                    task_uuid,
                    reason: reason.clone(),
                });
            }
        }
    }
    run
}

pub fn run_oracle(
    catalog: &Catalog,
    cfg: &RunConfig,
    pool: &rayon::ThreadPool,
) -> Result<OracleRun> {
    let run = compute_oracle(catalog, pool);
    write_json(&cfg.out.join(ORACLE_JSON), &Stamp::new(cfg.hash()), &run)?;
    Ok(run)
}
