use std::path::{Path, PathBuf};

use gsee_core::catalog::DEFAULT_RUNTIME_LIMIT;
use gsee_core::fermionic::{Truncation, DEFAULT_DF_THRESHOLD};
use gsee_core::ml::LatentKind;
use gsee_core::qubit_features::FEATURE_NAMES;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{io_err, BenchError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub catalog: PathBuf,
    pub out: PathBuf,
    /// Relative DF cutoff, or absolute in Hartree when `df_absolute` is set.
    pub df_threshold: f64,
    pub df_absolute: bool,
    pub latent: LatentKind,
    pub latent_dim: usize,
    pub samples: usize,
    pub threshold: f64,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub solver: Option<String>,
    /// Feature columns handed to the classifier.
    pub features: Vec<String>,
    pub folds: usize,
    pub runtime_default: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            catalog: PathBuf::from("catalog"),
            out: PathBuf::from("out"),
            df_threshold: DEFAULT_DF_THRESHOLD,
            df_absolute: false,
            latent: LatentKind::Pca,
            latent_dim: 2,
            samples: 10_000,
            threshold: 0.5,
            seed: 0,
            jobs: 0,
            solver: None,
            features: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            folds: 5,
            runtime_default: DEFAULT_RUNTIME_LIMIT,
        }
    }
}

/// The settings that influence output contents.
#[derive(Serialize)]
struct HashedFields<'a> {
    df_threshold: f64,
    df_absolute: bool,
    latent: LatentKind,
    latent_dim: usize,
    samples: usize,
    threshold: f64,
    seed: u64,
    solver: &'a Option<String>,
    features: &'a [String],
    folds: usize,
    runtime_default: f64,
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        toml::from_str(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(BenchError::Config(msg));
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad(format!("threshold {} is outside [0, 1]", self.threshold));
        }
        if !(self.df_threshold >= 0.0 && self.df_threshold.is_finite()) {
            return bad(format!(
                "df_threshold {} must be finite and >= 0",
                self.df_threshold
            ));
        }
        if self.latent_dim == 0 || self.samples == 0 || self.folds < 2 {
            return bad("latent_dim and samples must be positive and folds >= 2".into());
        }
        if self.features.is_empty() {
            return bad("no classifier features selected".into());
        }
        if self.latent_dim > self.features.len() {
            return bad(format!(
                "latent_dim {} exceeds the {} selected features",
                self.latent_dim,
                self.features.len()
            ));
        }
        for f in &self.features {
            if !FEATURE_NAMES.contains(&f.as_str()) {
                return bad(format!("unknown feature '{f}'"));
            }
        }
        if self.runtime_default.is_nan() || self.runtime_default <= 0.0 {
            return bad("runtime_default must be > 0".into());
        }
        Ok(())
    }

    pub fn truncation(&self) -> Truncation {
        if self.df_absolute {
            Truncation::Absolute(self.df_threshold)
        } else {
            Truncation::Relative(self.df_threshold)
        }
    }

    /// SHA-256 over the output-relevant settings (paths and thread count
    /// excluded), first 16 hex digits.
    pub fn hash(&self) -> String {
        let fields = HashedFields {
            df_threshold: self.df_threshold,
            df_absolute: self.df_absolute,
            latent: self.latent,
            latent_dim: self.latent_dim,
            samples: self.samples,
            threshold: self.threshold,
            seed: self.seed,
            solver: &self.solver,
            features: &self.features,
            folds: self.folds,
            runtime_default: self.runtime_default,
        };
        let json = serde_json::to_vec(&fields).expect("config serializes");
        Sha256::digest(&json)
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn thread_pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| BenchError::Pool(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_overrides_defaults() {
        let cfg: RunConfig =
            toml::from_str("seed = 9\nlatent = \"nnmf\"\nfeatures = [\"one_norm\", \"df_gap\"]")
                .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.latent, LatentKind::Nnmf);
        assert_eq!(cfg.samples, 10_000);
        cfg.validate().unwrap();
        assert!(toml::from_str::<RunConfig>("bogus = 1").is_err());
    }

    #[test]
    fn validation() {
        let cfg = RunConfig {
            threshold: 1.5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            features: vec!["nope".into()],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn hash_ignores_paths_and_jobs() {
        let a = RunConfig::default();
        let b = RunConfig {
            out: "elsewhere".into(),
            catalog: "x".into(),
            jobs: 3,
            ..Default::default()
        };
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig {
            seed: 1,
            ..Default::default()
        };
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
