//! Fermionic-representation features: problem sizes, FCI dimension and the
//! double factorization of the two-electron tensor.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

use crate::fcidump::FciDump;

/// Default relative cutoff on `|lambda| / |lambda_max|`.
pub const DEFAULT_DF_THRESHOLD: f64 = 1e-6;

/// Eigenvalues below this fraction of `|lambda_max|` are treated as exact
/// zeros regardless of the configured threshold (round-off floor of the
/// symmetric eigensolver).
pub const DF_NUMERICAL_ZERO: f64 = 1e-13;

#[derive(Debug, Error, PartialEq)]
pub enum FermionicError {
    #[error("occupation ({n_alpha}, {n_beta}) does not fit in {norb} orbitals")]
    InvalidOccupation {
        norb: usize,
        n_alpha: usize,
        n_beta: usize,
    },
    #[error("eigendecomposition did not converge")]
    EigenFailure,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SizeFeatures {
    pub n_elec: usize,
    pub n_spin_orbitals: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub log_fci_size: f64,
}

pub fn size_features(dump: &FciDump) -> SizeFeatures {
    let (na, nb) = (dump.n_alpha(), dump.n_beta());
    SizeFeatures {
        n_elec: dump.nelec(),
        n_spin_orbitals: 2 * dump.norb(),
        n_alpha: na,
        n_beta: nb,
        log_fci_size: log_fci_size(dump.norb(), na, nb)
            .expect("FciDump invariants bound occupations"),
    }
}

fn log10_binomial(n: usize, k: usize) -> f64 {
    let ln = libm::lgamma(n as f64 + 1.0)
        - libm::lgamma(k as f64 + 1.0)
        - libm::lgamma((n - k) as f64 + 1.0);
    ln / std::f64::consts::LN_10
}

/// `log10(C(norb, n_alpha) * C(norb, n_beta))`, via log-gamma.
pub fn log_fci_size(norb: usize, n_alpha: usize, n_beta: usize) -> Result<f64, FermionicError> {
    if n_alpha > norb || n_beta > norb {
        return Err(FermionicError::InvalidOccupation {
            norb,
            n_alpha,
            n_beta,
        });
    }
    // lgamma rounding can leave tiny negatives for C(n, 0) and C(n, n).
    Ok((log10_binomial(norb, n_alpha) + log10_binomial(norb, n_beta)).max(0.0))
}

/// How small DF eigenvalues are discarded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", content = "value", rename_all = "lowercase")]
pub enum Truncation {
    /// Keep `|lambda| > t * |lambda_max|`.
    Relative(f64),
    /// Keep `|lambda| > t` (Hartree).
    Absolute(f64),
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Relative(DEFAULT_DF_THRESHOLD)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DfResult {
    pub norb: usize,
    /// Sorted by descending absolute value.
    pub lambdas: Vec<f64>,
    /// Row-major symmetric `norb x norb` matrices with unit Frobenius norm.
    #[serde(skip)]
    pub g_matrices: Vec<DMatrix<f64>>,
    pub rank: usize,
    pub gap: f64,
    pub truncation: Truncation,
}

/// The two-electron tensor reshaped to the `norb^2 x norb^2` supermatrix
/// `V[(i,j),(k,l)] = (ij|kl)`.
pub fn supermatrix(dump: &FciDump) -> DMatrix<f64> {
    let n = dump.norb();
    DMatrix::from_fn(n * n, n * n, |row, col| {
        dump.h2(row / n, row % n, col / n, col % n)
    })
}

/// Eigendecomposes the two-electron supermatrix into `sum_l lambda_l g_l (x) g_l`.
pub fn double_factorize(
    dump: &FciDump,
    truncation: Truncation,
) -> Result<DfResult, FermionicError> {
    let n = dump.norb();
    let v = supermatrix(dump);
    let eig =
        SymmetricEigen::try_new(v, f64::EPSILON, 10_000).ok_or(FermionicError::EigenFailure)?;

    let mut pairs: Vec<(f64, DMatrix<f64>)> = Vec::with_capacity(n * n);
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        let col = eig.eigenvectors.column(idx);
        let g = DMatrix::from_fn(n, n, |i, j| col[i * n + j]);
        let g = (&g + g.transpose()) * 0.5;
        let norm = g.norm();
        // Antisymmetric eigenvectors have zero eigenvalue; symmetrizing kills them.
        if norm < 1e-8 {
            continue;
        }
        let mut g = g / norm;
        // Sign convention: the largest-magnitude entry (first in row-major order) is positive.
        let pivot = g.transpose().iter().copied().fold(0.0f64, |best, x| {
            if x.abs() > best.abs() + 1e-12 {
                x
            } else {
                best
            }
        });
        if pivot < 0.0 {
            g = -g;
        }
        pairs.push((lambda * norm * norm, g));
    }
    pairs.sort_by(|a, b| {
        b.0.abs()
            .total_cmp(&a.0.abs())
            .then_with(|| lexicographic(&a.1, &b.1))
    });

    let lambda_max = pairs.first().map_or(0.0, |p| p.0.abs());
    let cutoff = match truncation {
        Truncation::Relative(t) => t * lambda_max,
        Truncation::Absolute(t) => t,
    }
    .max(DF_NUMERICAL_ZERO * lambda_max);
    let kept: Vec<(f64, DMatrix<f64>)> = pairs
        .into_iter()
        .filter(|(l, _)| l.abs() > cutoff && *l != 0.0)
        .collect();

    let rank = kept.len();
    let gap = if rank >= 2 {
        (kept[0].0 - kept[1].0).abs()
    } else {
        0.0
    };
    let (lambdas, g_matrices) = kept.into_iter().unzip();
    Ok(DfResult {
        norb: n,
        lambdas,
        g_matrices,
        rank,
        gap,
        truncation,
    })
}

fn lexicographic(a: &DMatrix<f64>, b: &DMatrix<f64>) -> std::cmp::Ordering {
    a.transpose()
        .iter()
        .zip(b.transpose().iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Dense chemist tensor `T[i][j][k][l]` flattened row-major.
pub fn df_reconstruct(df: &DfResult) -> Vec<f64> {
    let n = df.norb;
    let mut out = vec![0.0; n * n * n * n];
    for (lambda, g) in df.lambdas.iter().zip(&df.g_matrices) {
        for i in 0..n {
            for j in 0..n {
                let gij = lambda * g[(i, j)];
                if gij == 0.0 {
                    continue;
                }
                let base = (i * n + j) * n * n;
                for k in 0..n {
                    for l in 0..n {
                        out[base + k * n + l] += gij * g[(k, l)];
                    }
                }
            }
        }
    }
    out
}
