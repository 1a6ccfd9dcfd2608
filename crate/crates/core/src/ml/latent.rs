//! Linear latent spaces: PCA and non-negative matrix factorization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_finite, MlError, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatentKind {
    #[default]
    Pca,
    Nnmf,
}

impl std::str::FromStr for LatentKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "pca" => Ok(LatentKind::Pca),
            "nnmf" | "nmf" => Ok(LatentKind::Nnmf),
            other => Err(format!(
                "unknown latent space '{other}' (expected pca or nnmf)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: DVector<f64>,
    /// One principal axis per row, unit norm.
    pub components: DMatrix<f64>,
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
}

impl Pca {
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_cols(x, self.mean.len())?;
        let mut centered = x.clone();
        for mut row in centered.row_iter_mut() {
            row -= self.mean.transpose();
        }
        Ok(centered * self.components.transpose())
    }

    pub fn inverse_transform(&self, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_cols(z, self.n_components())?;
        let mut x = z * &self.components;
        for mut row in x.row_iter_mut() {
            row += self.mean.transpose();
        }
        Ok(x)
    }
}

fn check_cols(x: &DMatrix<f64>, expected: usize) -> Result<()> {
    if x.ncols() != expected {
        return Err(MlError::DimensionMismatch {
            expected,
            got: x.ncols(),
        });
    }
    Ok(())
}

fn distinct_rows(x: &DMatrix<f64>) -> usize {
    let mut rows: Vec<Vec<u64>> = x
        .row_iter()
        .map(|r| r.iter().map(|v| (v + 0.0).to_bits()).collect())
        .collect();
    rows.sort_unstable();
    rows.dedup();
    rows.len()
}

pub fn pca_fit(x: &DMatrix<f64>, n_components: usize) -> Result<Pca> {
    check_finite(x)?;
    let d = x.ncols();
    if n_components == 0 || n_components > d {
        return Err(MlError::InvalidDimension {
            requested: n_components,
            features: d,
        });
    }
    let distinct = distinct_rows(x);
    if distinct < n_components {
        return Err(MlError::RankDeficient {
            distinct,
            requested: n_components,
        });
    }
    let n = x.nrows();
    let mean = x.row_mean().transpose();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let denom = (n.max(2) - 1) as f64;
    let cov = centered.transpose() * &centered / denom;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    let mut components = DMatrix::zeros(n_components, d);
    let mut explained_variance = Vec::with_capacity(n_components);
    for (row, &idx) in order.iter().take(n_components).enumerate() {
        let mut axis = eig.eigenvectors.column(idx).into_owned();
        // Sign convention: largest-magnitude coordinate positive (first on ties).
        let pivot = axis.iter().copied().fold(0.0f64, |best, v| {
            if v.abs() > best.abs() + 1e-12 {
                v
            } else {
                best
            }
        });
        if pivot < 0.0 {
            axis = -axis;
        }
        components.set_row(row, &axis.transpose());
        explained_variance.push(eig.eigenvalues[idx].max(0.0));
    }
    let explained_variance_ratio = explained_variance
        .iter()
        .map(|v| if total > 0.0 { v / total } else { 0.0 })
        .collect();
    Ok(Pca {
        mean,
        components,
        explained_variance,
        explained_variance_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NnmfOptions {
    pub max_iterations: usize,
    /// Stop when the relative drop in reconstruction error over one check
    /// interval falls below this.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for NnmfOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            tolerance: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nnmf {
    /// Latent coordinates of the training rows.
    pub w: DMatrix<f64>,
    /// Basis, one component per row.
    pub h: DMatrix<f64>,
    pub reconstruction_error: f64,
    pub iterations: usize,
    pub converged: bool,
}

const MU_EPS: f64 = 1e-16;

fn update_h(x: &DMatrix<f64>, w: &DMatrix<f64>, h: &mut DMatrix<f64>) {
    let num = w.transpose() * x;
    let den = (w.transpose() * w) * &*h;
    h.zip_zip_apply(&num, &den, |v, n, d| *v *= n / (d + MU_EPS));
}

fn update_w(x: &DMatrix<f64>, w: &mut DMatrix<f64>, h: &DMatrix<f64>) {
    let num = x * h.transpose();
    let den = &*w * (h * h.transpose());
    w.zip_zip_apply(&num, &den, |v, n, d| *v *= n / (d + MU_EPS));
}

fn check_nonnegative(x: &DMatrix<f64>) -> Result<()> {
    check_finite(x)?;
    for r in 0..x.nrows() {
        for c in 0..x.ncols() {
            if x[(r, c)] < 0.0 {
                return Err(MlError::NegativeInput { row: r, col: c });
            }
        }
    }
    Ok(())
}

const CHECK_EVERY: usize = 10;

/// Multiplicative-update NNMF, `X ~ W H`. Non-convergence within the
/// iteration budget is reported through `converged`, not as an error.
pub fn nnmf_fit(x: &DMatrix<f64>, n_components: usize, opts: NnmfOptions) -> Result<Nnmf> {
    check_nonnegative(x)?;
    let (n, d) = x.shape();
    if n_components == 0 || n_components > d {
        return Err(MlError::InvalidDimension {
            requested: n_components,
            features: d,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let scale = (x.mean() / n_components as f64).sqrt().max(1e-3);
    let mut w = DMatrix::from_fn(n, n_components, |_, _| scale * rng.gen_range(0.01..1.0));
    let mut h = DMatrix::from_fn(n_components, d, |_, _| scale * rng.gen_range(0.01..1.0));

    let error = |w: &DMatrix<f64>, h: &DMatrix<f64>| (x - w * h).norm();
    let mut last = error(&w, &h);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        update_h(x, &w, &mut h);
        update_w(x, &mut w, &h);
        iterations += 1;
        if iterations % CHECK_EVERY == 0 {
            let err = error(&w, &h);
            if err <= f64::EPSILON * x.norm().max(1.0) || (last - err) <= opts.tolerance * last {
                converged = true;
                break;
            }
            last = err;
        }
    }
    let reconstruction_error = error(&w, &h);
    if !converged {
        log::warn!("NNMF stopped after {iterations} iterations (error {reconstruction_error:.3e})");
    }
    Ok(Nnmf {
        w,
        h,
        reconstruction_error,
        iterations,
        converged,
    })
}

impl Nnmf {
    pub fn n_components(&self) -> usize {
        self.h.nrows()
    }

    /// Latent coordinates for new rows: `W` solved by multiplicative updates with `H` fixed.
    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_cols(x, self.h.ncols())?;
        check_nonnegative(x)?;
        let k = self.n_components();
        let mut w = DMatrix::from_element(x.nrows(), k, 0.5);
        let hht = &self.h * self.h.transpose();
        let num = x * self.h.transpose();
        for _ in 0..500 {
            let den = &w * &hht;
            w.zip_zip_apply(&num, &den, |v, n, d| *v *= n / (d + MU_EPS));
        }
        Ok(w)
    }

    pub fn inverse_transform(&self, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_cols(w, self.n_components())?;
        Ok(w * &self.h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LatentModel {
    Pca(Pca),
    Nnmf(Nnmf),
}

impl LatentModel {
    pub fn fit(kind: LatentKind, x: &DMatrix<f64>, dim: usize, nnmf: NnmfOptions) -> Result<Self> {
        Ok(match kind {
            LatentKind::Pca => LatentModel::Pca(pca_fit(x, dim)?),
            LatentKind::Nnmf => LatentModel::Nnmf(nnmf_fit(x, dim, nnmf)?),
        })
    }

    pub fn kind(&self) -> LatentKind {
        match self {
            LatentModel::Pca(_) => LatentKind::Pca,
            LatentModel::Nnmf(_) => LatentKind::Nnmf,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            LatentModel::Pca(p) => p.n_components(),
            LatentModel::Nnmf(m) => m.n_components(),
        }
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match self {
            LatentModel::Pca(p) => p.transform(x),
            LatentModel::Nnmf(m) => m.transform(x),
        }
    }

    pub fn inverse_transform(&self, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match self {
            LatentModel::Pca(p) => p.inverse_transform(z),
            LatentModel::Nnmf(m) => m.inverse_transform(z),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng_matrix(rows: usize, cols: usize, seed: u64, lo: f64, hi: f64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(lo..hi))
    }

    #[test]
    fn pca_on_diagonal_line() {
        let x = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 1.0, 2.0, 2.0]);
        let p = pca_fit(&x, 1).unwrap();
        let s = 0.5f64.sqrt();
        assert!((p.components[(0, 0)] - s).abs() < 1e-12);
        assert!((p.components[(0, 1)] - s).abs() < 1e-12);
        assert!((p.explained_variance_ratio[0] - 1.0).abs() < 1e-12);
        let z = p.transform(&x).unwrap();
        let back = p.inverse_transform(&z).unwrap();
        assert!((back - &x).amax() < 1e-12);
    }

    #[test]
    fn pca_full_rank_round_trip_and_orthonormal() {
        let x = rng_matrix(50, 5, 1, 0.0, 1.0);
        let p = pca_fit(&x, 5).unwrap();
        let gram = &p.components * p.components.transpose();
        assert!((gram - DMatrix::identity(5, 5)).amax() < 1e-10);
        let back = p.inverse_transform(&p.transform(&x).unwrap()).unwrap();
        assert!((back - &x).amax() < 1e-10);
        for w in p.explained_variance.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!((p.explained_variance_ratio.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pca_matches_two_pass_variance_along_axis() {
        let x = rng_matrix(30, 3, 9, -1.0, 1.0);
        let p = pca_fit(&x, 2).unwrap();
        let z = p.transform(&x).unwrap();
        for c in 0..2 {
            let col = z.column(c);
            let mean = col.mean();
            assert!(mean.abs() < 1e-12);
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 29.0;
            assert!((var - p.explained_variance[c]).abs() < 1e-10);
        }
    }

    #[test]
    fn pca_errors() {
        let x = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(
            pca_fit(&x, 2).unwrap_err(),
            MlError::RankDeficient {
                distinct: 1,
                requested: 2
            }
        );
        assert!(matches!(
            pca_fit(&x, 4),
            Err(MlError::InvalidDimension { .. })
        ));
    }

    #[test]
    fn nnmf_recovers_planted_factorization() {
        let w = rng_matrix(20, 2, 3, 0.1, 1.0);
        let h = rng_matrix(2, 5, 4, 0.1, 1.0);
        let x = &w * &h;
        let m = nnmf_fit(
            &x,
            2,
            NnmfOptions {
                max_iterations: 200_000,
                tolerance: 0.0,
                seed: 1,
            },
        )
        .unwrap();
        assert!(m.reconstruction_error < 1e-6, "{}", m.reconstruction_error);
        assert!(m.w.iter().chain(m.h.iter()).all(|v| *v >= 0.0));
        let back = m.inverse_transform(&m.w).unwrap();
        assert!((back - &x).norm() < 1e-6);
    }

    #[test]
    fn nnmf_transform_new_rows() {
        let w = rng_matrix(30, 2, 5, 0.1, 1.0);
        let h = rng_matrix(2, 4, 6, 0.1, 1.0);
        let x = &w * &h;
        let m = nnmf_fit(
            &x,
            2,
            NnmfOptions {
                max_iterations: 50_000,
                tolerance: 0.0,
                seed: 2,
            },
        )
        .unwrap();
        let z = m.transform(&x.rows(0, 5).into_owned()).unwrap();
        let rec = m.inverse_transform(&z).unwrap();
        assert!((rec - x.rows(0, 5)).amax() < 1e-3);
    }

    #[test]
    fn nnmf_flags_non_convergence_and_rejects_negatives() {
        let x = rng_matrix(10, 4, 7, 0.0, 1.0);
        let m = nnmf_fit(
            &x,
            2,
            NnmfOptions {
                max_iterations: 10,
                tolerance: 0.0,
                seed: 0,
            },
        )
        .unwrap();
        assert!(!m.converged);
        assert_eq!(m.iterations, 10);
        let mut bad = x.clone();
        bad[(1, 2)] = -0.5;
        assert_eq!(
            nnmf_fit(&bad, 2, NnmfOptions::default()).unwrap_err(),
            MlError::NegativeInput { row: 1, col: 2 }
        );
    }
}
