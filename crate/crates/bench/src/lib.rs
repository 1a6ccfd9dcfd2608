//! Orchestration for a GSEE benchmark catalog: feature tables, solver
//! scoring, FCI reference energies and solvability maps.

pub mod config;
pub mod evaluate;
pub mod features;
pub mod oracle;
pub mod output;
pub mod report;
pub mod solvability;
pub mod svg;
pub mod synth;

use thiserror::Error;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("catalog {0} contains no problem instances")]
    EmptyCatalog(String),
    #[error(transparent)]
    Catalog(#[from] gsee_core::catalog::CatalogError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Fcidump(#[from] gsee_core::fcidump::FcidumpError),
    #[error(transparent)]
    Fci(#[from] gsee_core::fci::FciError),
    #[error("thread pool: {0}")]
    Pool(String),
}

pub type Result<T> = std::result::Result<T, BenchError>;

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// File-name-safe form of an identifier.
pub fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
