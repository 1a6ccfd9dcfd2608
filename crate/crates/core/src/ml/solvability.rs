//! End-to-end solvability-region estimation: scale, fit the classifier on
//! the full-dimensional features, build a latent space, sample it, map the
//! samples back to feature space and count the points predicted solvable.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::latent::{LatentKind, LatentModel, NnmfOptions};
use super::metrics::{classification_metrics, ClassificationMetrics};
use super::scaling::minmax_scale;
use super::shapley::{shapley_attribution_grouped, ShapleyValues, MAX_FEATURES};
use super::svm::{svm_fit_cv, GridScore, Platt, SvmGrid, SvmModel, SvmParams, DEFAULT_FOLDS};
use super::{MlError, Result};

pub const MIN_LABELED: usize = 10;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Anything that maps scaled feature rows to success probabilities.
pub trait ProbabilityModel {
    fn n_features(&self) -> usize;
    fn probability(&self, x: &[f64]) -> f64;
}

impl ProbabilityModel for SvmModel {
    fn n_features(&self) -> usize {
        self.n_features
    }
    fn probability(&self, x: &[f64]) -> f64 {
        SvmModel::probability(self, x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolvabilityConfig {
    pub latent: LatentKind,
    pub latent_dim: usize,
    pub n_samples: usize,
    pub threshold: f64,
    pub seed: u64,
    pub folds: usize,
    pub holdout_fraction: f64,
    /// `None` selects the default grid for the feature count.
    pub grid: Option<SvmGrid>,
    pub nnmf: NnmfOptions,
    pub shapley_points: usize,
    pub shapley_background: usize,
}

impl Default for SolvabilityConfig {
    fn default() -> Self {
        Self {
            latent: LatentKind::Pca,
            latent_dim: 2,
            n_samples: DEFAULT_SAMPLES,
            threshold: DEFAULT_THRESHOLD,
            seed: 0,
            folds: DEFAULT_FOLDS,
            holdout_fraction: 0.2,
            grid: None,
            nnmf: NnmfOptions::default(),
            shapley_points: 5,
            shapley_background: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatentPoint {
    pub coords: Vec<f64>,
    pub probability: f64,
}

/// A dataset row placed in the latent space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataPoint {
    pub row: usize,
    pub coords: Vec<f64>,
    pub label: Option<bool>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplainedPoint {
    pub row: usize,
    #[serde(flatten)]
    pub shapley: ShapleyValues,
}

/// Shapley values per player. Players are single features when there are at
/// most 15 of them, otherwise families of related features (for example the
/// four statistics of one hypergraph quantity) entering coalitions together.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attributions {
    pub players: Vec<String>,
    pub groups: Vec<Vec<usize>>,
    pub mean_abs: Vec<f64>,
    pub background_rows: usize,
    pub points: Vec<ExplainedPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvmSummary {
    pub params: SvmParams,
    pub n_support: usize,
    pub training_accuracy: f64,
    pub cv_mean_f1: f64,
    pub cv_metrics: Vec<ClassificationMetrics>,
    pub grid_scores: Vec<GridScore>,
    pub platt: Platt,
    pub degenerate: bool,
}

impl From<&SvmModel> for SvmSummary {
    fn from(m: &SvmModel) -> Self {
        Self {
            params: m.params,
            n_support: m.support_vectors.len(),
            training_accuracy: m.training_accuracy,
            cv_mean_f1: m.cv_mean_f1,
            cv_metrics: m.cv_metrics.clone(),
            grid_scores: m.grid_scores.clone(),
            platt: m.platt,
            degenerate: m.degenerate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatentSummary {
    pub kind: LatentKind,
    pub dim: usize,
    pub bounds: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explained_variance_ratio: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nnmf_reconstruction_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nnmf_converged: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolvabilityReport {
    pub solvability_ratio: f64,
    pub n_samples: usize,
    pub threshold: f64,
    pub seed: u64,
    pub feature_names: Vec<String>,
    pub n_labeled: usize,
    pub n_positive: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Held-out split.
    pub metrics: ClassificationMetrics,
    /// Every labeled row had the same label; the map is the constant
    /// probability of that class and no classifier was trained.
    pub single_class: bool,
    pub svm: Option<SvmSummary>,
    pub latent: LatentSummary,
    pub attributions: Option<Attributions>,
    pub data_points: Vec<DataPoint>,
    pub latent_points: Vec<LatentPoint>,
}

/// Fraction of probabilities at or above `threshold`.
pub fn solvability_ratio(probabilities: &[f64], threshold: f64) -> f64 {
    if probabilities.is_empty() {
        return 0.0;
    }
    probabilities.iter().filter(|&&p| p >= threshold).count() as f64 / probabilities.len() as f64
}

pub fn latent_bounds(z: &DMatrix<f64>) -> Vec<(f64, f64)> {
    (0..z.ncols())
        .map(|c| (z.column(c).min(), z.column(c).max()))
        .collect()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![(lo + hi) / 2.0];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Sample points in the latent box: an `r x r` grid with `r = ceil(sqrt(n))`
/// in two dimensions, `n` evenly spaced points in one, seeded uniform
/// sampling otherwise.
pub fn sample_latent(bounds: &[(f64, f64)], n_samples: usize, seed: u64) -> DMatrix<f64> {
    match bounds.len() {
        1 => {
            DMatrix::from_column_slice(n_samples, 1, &linspace(bounds[0].0, bounds[0].1, n_samples))
        }
        2 => {
            let r = (n_samples as f64).sqrt().ceil() as usize;
            let xs = linspace(bounds[0].0, bounds[0].1, r);
            let ys = linspace(bounds[1].0, bounds[1].1, r);
            DMatrix::from_fn(r * r, 2, |i, c| if c == 0 { xs[i / r] } else { ys[i % r] })
        }
        d => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            DMatrix::from_fn(n_samples, d, |_, c| {
                let (lo, hi) = bounds[c];
                if hi > lo {
                    rng.gen_range(lo..=hi)
                } else {
                    lo
                }
            })
        }
    }
}

/// Probabilities of latent samples, evaluated on their clipped inverse
/// images in scaled feature space.
pub fn map_latent_samples(
    model: &dyn ProbabilityModel,
    latent: &LatentModel,
    samples: &DMatrix<f64>,
) -> Result<Vec<LatentPoint>> {
    let mut x = latent.inverse_transform(samples)?;
    if x.ncols() != model.n_features() {
        return Err(MlError::DimensionMismatch {
            expected: model.n_features(),
            got: x.ncols(),
        });
    }
    x.apply(|v| *v = v.clamp(0.0, 1.0));
    Ok((0..samples.nrows())
        .map(|i| {
            let row: Vec<f64> = x.row(i).iter().copied().collect();
            LatentPoint {
                coords: samples.row(i).iter().copied().collect(),
                probability: model.probability(&row),
            }
        })
        .collect())
}

fn stratified_holdout(labels: &[bool], fraction: f64, seed: u64) -> Vec<bool> {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5e_ed0f_401d);
    let mut test = vec![false; labels.len()];
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        // keep at least one member of each class on both sides when possible
        let mut k = (fraction * idx.len() as f64).round() as usize;
        if idx.len() >= 2 {
            k = k.clamp(1, idx.len() - 1);
        } else {
            k = 0;
        }
        for &i in &idx[..k] {
            test[i] = true;
        }
    }
    test
}

fn evenly_spaced(n: usize, k: usize) -> Vec<usize> {
    if k >= n {
        return (0..n).collect();
    }
    (0..k).map(|i| i * n / k).collect()
}

/// Singletons when `names.len() <= 15`; otherwise features sharing a name
/// up to a `_max`/`_min`/`_mean`/`_std` suffix form one player.
pub fn attribution_players(names: &[String]) -> (Vec<String>, Vec<Vec<usize>>) {
    if names.len() <= MAX_FEATURES {
        return (names.to_vec(), (0..names.len()).map(|f| vec![f]).collect());
    }
    let mut players: Vec<String> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (f, name) in names.iter().enumerate() {
        let family = ["_max", "_min", "_mean", "_std"]
            .iter()
            .find_map(|suffix| name.strip_suffix(suffix))
            .unwrap_or(name);
        match players.iter().position(|p| p == family) {
            Some(g) => groups[g].push(f),
            None => {
                players.push(family.to_string());
                groups.push(vec![f]);
            }
        }
    }
    (players, groups)
}

fn attributions(
    model: &SvmModel,
    x: &DMatrix<f64>,
    names: &[String],
    n_points: usize,
    n_background: usize,
) -> Result<Option<Attributions>> {
    let (players, groups) = attribution_players(names);
    if players.len() > MAX_FEATURES {
        log::warn!(
            "{} attribution players exceed the exact Shapley limit of {MAX_FEATURES}; skipped",
            players.len()
        );
        return Ok(None);
    }
    if n_points == 0 || x.nrows() == 0 {
        return Ok(None);
    }
    let rows: Vec<Vec<f64>> = x.row_iter().map(|r| r.iter().copied().collect()).collect();
    // cap model evaluations near 2^players * background * points <= 2e6
    let budget = (2_000_000usize >> players.len()) / n_points;
    let n_bg = n_background.min(budget.max(1));
    let background: Vec<Vec<f64>> = evenly_spaced(rows.len(), n_bg)
        .into_iter()
        .map(|i| rows[i].clone())
        .collect();
    let mut points = Vec::new();
    for row in evenly_spaced(rows.len(), n_points) {
        let shapley = shapley_attribution_grouped(
            |v| model.probability(v),
            &rows[row],
            &background,
            &groups,
        )?;
        points.push(ExplainedPoint { row, shapley });
    }
    let mean_abs = (0..players.len())
        .map(|g| {
            points
                .iter()
                .map(|p| p.shapley.values[g].abs())
                .sum::<f64>()
                / points.len() as f64
        })
        .collect();
    Ok(Some(Attributions {
        players,
        groups,
        mean_abs,
        background_rows: background.len(),
        points,
    }))
}

struct ConstantModel {
    probability: f64,
    n_features: usize,
}

impl ProbabilityModel for ConstantModel {
    fn n_features(&self) -> usize {
        self.n_features
    }
    fn probability(&self, _: &[f64]) -> f64 {
        self.probability
    }
}

/// Runs the full pipeline on labeled rows. `unlabeled` rows (for example
/// guidestar tasks) are placed in the latent map but not used for training.
/// When all labels agree the map is the constant probability of that class.
pub fn estimate_solvability(
    features: &DMatrix<f64>,
    labels: &[bool],
    feature_names: &[String],
    unlabeled: Option<&DMatrix<f64>>,
    config: &SolvabilityConfig,
) -> Result<SolvabilityReport> {
    let n = features.nrows();
    let d = features.ncols();
    if labels.len() != n {
        return Err(MlError::LengthMismatch(labels.len(), n));
    }
    if feature_names.len() != d {
        return Err(MlError::LengthMismatch(feature_names.len(), d));
    }
    if n < MIN_LABELED {
        return Err(MlError::InsufficientLabels {
            required: MIN_LABELED,
            got: n,
        });
    }
    if !(0.0..1.0).contains(&config.holdout_fraction) || config.n_samples == 0 {
        return Err(MlError::InvalidConfig(
            "holdout fraction must be in [0, 1) and samples > 0".into(),
        ));
    }
    let single_class = labels.iter().all(|&v| v) || labels.iter().all(|&v| !v);

    // 1. scale
    let scaled = minmax_scale(features, None)?;
    let x = &scaled.x;

    // 2. classifier on full-dimensional features, trained on the non-held-out rows
    let (model, svm_summary, metrics, n_train, n_test, attributions): (
        Box<dyn ProbabilityModel>,
        _,
        _,
        _,
        _,
        _,
    ) = if single_class {
        let constant = ConstantModel {
            probability: if labels[0] { 1.0 } else { 0.0 },
            n_features: d,
        };
        let metrics = classification_metrics(&vec![labels[0]; n], labels)?;
        (Box::new(constant), None, metrics, n, 0, None)
    } else {
        let is_test = stratified_holdout(labels, config.holdout_fraction, config.seed);
        let train: Vec<usize> = (0..n).filter(|&i| !is_test[i]).collect();
        let test: Vec<usize> = (0..n).filter(|&i| is_test[i]).collect();
        let x_train = x.select_rows(&train);
        let y_train: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
        let grid = config
            .grid
            .clone()
            .unwrap_or_else(|| SvmGrid::default_for(d));
        let svm = svm_fit_cv(&x_train, &y_train, &grid, config.folds, config.seed)?;
        let metrics = if test.is_empty() {
            classification_metrics(&svm.predict(&x_train)?, &y_train)?
        } else {
            let pred = svm.predict(&x.select_rows(&test))?;
            let truth: Vec<bool> = test.iter().map(|&i| labels[i]).collect();
            classification_metrics(&pred, &truth)?
        };
        let attributions = attributions(
            &svm,
            &x_train,
            feature_names,
            config.shapley_points,
            config.shapley_background,
        )?;
        let summary = SvmSummary::from(&svm);
        (
            Box::new(svm),
            Some(summary),
            metrics,
            train.len(),
            test.len(),
            attributions,
        )
    };

    // 3-4. latent space and its bounding box
    let latent = LatentModel::fit(
        config.latent,
        x,
        config.latent_dim,
        NnmfOptions {
            seed: config.seed,
            ..config.nnmf
        },
    )?;
    let z = latent.transform(x)?;
    let bounds = latent_bounds(&z);

    // 5-7. sample, invert, clip, predict
    let samples = sample_latent(&bounds, config.n_samples, config.seed);
    let latent_points = map_latent_samples(model.as_ref(), &latent, &samples)?;
    let probs: Vec<f64> = latent_points.iter().map(|p| p.probability).collect();
    let solvability_ratio = solvability_ratio(&probs, config.threshold);

    let mut data_points: Vec<DataPoint> = (0..n)
        .map(|i| {
            let row: Vec<f64> = x.row(i).iter().copied().collect();
            DataPoint {
                row: i,
                coords: z.row(i).iter().copied().collect(),
                label: Some(labels[i]),
                probability: model.probability(&row),
            }
        })
        .collect();
    if let Some(extra) = unlabeled {
        let xs = minmax_scale(extra, Some(&scaled.scaler))?.x;
        let ze = latent.transform(&xs)?;
        for i in 0..xs.nrows() {
            let row: Vec<f64> = xs.row(i).iter().copied().collect();
            data_points.push(DataPoint {
                row: n + i,
                coords: ze.row(i).iter().copied().collect(),
                label: None,
                probability: model.probability(&row),
            });
        }
    }

    let latent_summary = match &latent {
        LatentModel::Pca(p) => LatentSummary {
            kind: LatentKind::Pca,
            dim: latent.dim(),
            bounds,
            explained_variance_ratio: Some(p.explained_variance_ratio.clone()),
            nnmf_reconstruction_error: None,
            nnmf_converged: None,
        },
        LatentModel::Nnmf(m) => LatentSummary {
            kind: LatentKind::Nnmf,
            dim: latent.dim(),
            bounds,
            explained_variance_ratio: None,
            nnmf_reconstruction_error: Some(m.reconstruction_error),
            nnmf_converged: Some(m.converged),
        },
    };

    Ok(SolvabilityReport {
        solvability_ratio,
        n_samples: latent_points.len(),
        threshold: config.threshold,
        seed: config.seed,
        feature_names: feature_names.to_vec(),
        n_labeled: n,
        n_positive: labels.iter().filter(|v| **v).count(),
        n_train,
        n_test,
        metrics,
        single_class,
        svm: svm_summary,
        latent: latent_summary,
        attributions,
        data_points,
        latent_points,
    })
}
