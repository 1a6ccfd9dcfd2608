//! Per-task feature extraction, the correlation matrix and the orbital-count
//! histogram.

use std::collections::BTreeMap;
use std::path::PathBuf;

use gsee_core::catalog::Catalog;
use gsee_core::fcidump::read_fcidump;
use gsee_core::qubit_features::{
    compute_features, correlation_matrix, histogram, FeatureVector, FEATURE_NAMES,
};
use rayon::prelude::*;

use crate::output::{fmt_f64, write_csv, Stamp};
use crate::{BenchError, Result, RunConfig};

pub const FEATURES_CSV: &str = "features.csv";
pub const CORRELATION_CSV: &str = "correlation.csv";
pub const HISTOGRAM_CSV: &str = "norb_histogram.csv";
pub const HISTOGRAM_BIN: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct TaskFeatures {
    pub task_uuid: String,
    pub instance_uuid: String,
    pub norb: usize,
    pub features: FeatureVector,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureTable {
    /// Catalog order.
    pub rows: Vec<TaskFeatures>,
    /// `(task_uuid, reason)` for tasks whose features could not be computed.
    pub failures: Vec<(String, String)>,
}

impl FeatureTable {
    pub fn get(&self, task_uuid: &str) -> Option<&TaskFeatures> {
        self.rows.iter().find(|r| r.task_uuid == task_uuid)
    }
}

/// Features for every task; each distinct FCIDUMP file is processed once.
pub fn compute_table(catalog: &Catalog, cfg: &RunConfig, pool: &rayon::ThreadPool) -> FeatureTable {
    let tasks: Vec<(String, String, PathBuf)> = catalog
        .tasks()
        .map(|(inst, t)| {
            (
                t.task_uuid.clone(),
                inst.instance_uuid.clone(),
                inst.fcidump_path(t),
            )
        })
        .collect();
    let mut unique: Vec<PathBuf> = tasks.iter().map(|t| t.2.clone()).collect();
    unique.sort();
    unique.dedup();
    let truncation = cfg.truncation();
    let computed: Vec<std::result::Result<(usize, FeatureVector), String>> = pool.install(|| {
        unique
            .par_iter()
            .map(|path| {
                let dump = read_fcidump(path).map_err(|e| format!("{}: {e}", path.display()))?;
                let report = compute_features(&dump, truncation)
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                Ok((dump.norb(), report.features))
            })
            .collect()
    });
    let by_path: BTreeMap<&PathBuf, &std::result::Result<(usize, FeatureVector), String>> =
        unique.iter().zip(&computed).collect();

    let mut table = FeatureTable::default();
    for (task_uuid, instance_uuid, path) in tasks {
        match by_path[&path] {
            Ok((norb, features)) => table.rows.push(TaskFeatures {
                task_uuid,
                instance_uuid,
                norb: *norb,
                features: features.clone(),
            }),
            Err(reason) => {
                log::warn!("task {task_uuid}: features skipped: {reason}");
                table.failures.push((task_uuid, reason.clone()));
            }
        }
    }
    table
}

/// Writes features.csv, correlation.csv (two or more rows) and the orbital histogram.
pub fn write_table(table: &FeatureTable, cfg: &RunConfig, stamp: &Stamp) -> Result<()> {
    let mut header = vec!["task_uuid".to_string()];
    header.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
    let rows = table.rows.iter().map(|r| {
        std::iter::once(r.task_uuid.clone())
            .chain(r.features.to_vec().into_iter().map(fmt_f64))
            .collect::<Vec<_>>()
    });
    write_csv(&cfg.out.join(FEATURES_CSV), stamp, &header, rows)?;

    let values: Vec<Vec<f64>> = table.rows.iter().map(|r| r.features.to_vec()).collect();
    match correlation_matrix(&FEATURE_NAMES, &values) {
        Ok(corr) => {
            let mut header = vec!["feature".to_string()];
            header.extend(corr.names.iter().cloned());
            let rows = corr.names.iter().zip(&corr.values).map(|(name, row)| {
                std::iter::once(name.clone())
                    .chain(row.iter().map(|v| fmt_f64(*v)))
                    .collect::<Vec<_>>()
            });
            write_csv(&cfg.out.join(CORRELATION_CSV), stamp, &header, rows)?;
        }
        Err(e) => log::warn!("correlation matrix skipped: {e}"),
    }

    let norbs: Vec<usize> = table.rows.iter().map(|r| r.norb).collect();
    let bins = histogram(&norbs, HISTOGRAM_BIN);
    write_csv(
        &cfg.out.join(HISTOGRAM_CSV),
        stamp,
        &["norb_lo".into(), "norb_hi".into(), "count".into()],
        bins.into_iter()
            .map(|(lo, hi, c)| vec![lo.to_string(), hi.to_string(), c.to_string()]),
    )
}

pub fn run_features(
    catalog: &Catalog,
    cfg: &RunConfig,
    pool: &rayon::ThreadPool,
) -> Result<FeatureTable> {
    if catalog.instances.is_empty() {
        return Err(BenchError::EmptyCatalog(cfg.catalog.display().to_string()));
    }
    let table = compute_table(catalog, cfg, pool);
    write_table(&table, cfg, &Stamp::new(cfg.hash()))?;
    log::info!(
        "features: {} rows, {} failures",
        table.rows.len(),
        table.failures.len()
    );
    Ok(table)
}
