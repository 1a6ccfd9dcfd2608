//! Solvability-region estimation: scaling, latent spaces, an RBF support
//! vector classifier with Platt calibration, latent sampling, and exact
//! Shapley attributions.

use thiserror::Error;

pub mod latent;
pub mod metrics;
pub mod scaling;
pub mod shapley;
pub mod solvability;
pub mod svm;

pub use latent::{LatentKind, LatentModel};
pub use metrics::{classification_metrics, ClassificationMetrics};
pub use scaling::{minmax_scale, MinMaxScaler, ScaledDataset};
pub use shapley::{shapley_attribution, shapley_attribution_grouped, ShapleyValues};
pub use solvability::{estimate_solvability, SolvabilityConfig, SolvabilityReport};
pub use svm::{predict_proba, svm_fit_cv, SvmGrid, SvmModel};

#[derive(Debug, Error, PartialEq)]
pub enum MlError {
    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteInput { row: usize, col: usize },
    #[error("negative entry at row {row}, column {col}; non-negative factorization needs X >= 0")]
    NegativeInput { row: usize, col: usize },
    #[error("latent dimension {requested} is invalid for {features} features")]
    InvalidDimension { requested: usize, features: usize },
    #[error("only {distinct} distinct rows; cannot extract {requested} principal components")]
    RankDeficient { distinct: usize, requested: usize },
    #[error("labels contain a single class")]
    SingleClass,
    #[error("{samples} samples cannot be split into {folds} folds")]
    TooFewSamples { samples: usize, folds: usize },
    #[error("need at least {required} labeled rows, got {got}")]
    InsufficientLabels { required: usize, got: usize },
    #[error("expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("{0} features is too many for exact Shapley enumeration (limit {max})", max = shapley::MAX_FEATURES)]
    TooManyFeatures(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, MlError>;

pub(crate) fn check_finite(x: &nalgebra::DMatrix<f64>) -> Result<()> {
    for r in 0..x.nrows() {
        for c in 0..x.ncols() {
            if !x[(r, c)].is_finite() {
                return Err(MlError::NonFiniteInput { row: r, col: c });
            }
        }
    }
    Ok(())
}
