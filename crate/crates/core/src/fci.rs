//! Exact diagonalization in the determinant basis.
//!
//! Determinants are pairs of alpha/beta occupation bitmasks. Matrix elements
//! follow the Slater-Condon rules with fermionic signs taken in the
//! interleaved spin-orbital order used by [`crate::pauli`], so the matrix
//! coincides with the Jordan-Wigner qubit Hamiltonian restricted to the
//! same particle sector.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

use crate::fcidump::FciDump;

pub const MAX_NORB: usize = 16;
pub const DEFAULT_MAX_DIM: usize = 2_000_000;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum FciError {
    #[error("{reason}")]
    TooLarge { reason: String },
    #[error("occupation ({n_alpha}, {n_beta}) does not fit in {norb} orbitals")]
    InvalidOccupation {
        norb: usize,
        n_alpha: usize,
        n_beta: usize,
    },
    #[error("basis ({basis_norb} orbitals, {basis_alpha}a/{basis_beta}b) does not match the Hamiltonian ({norb} orbitals, {n_alpha}a/{n_beta}b)")]
    InconsistentBasis {
        basis_norb: usize,
        basis_alpha: usize,
        basis_beta: usize,
        norb: usize,
        n_alpha: usize,
        n_beta: usize,
    },
    #[error("requested {k} eigenvalues of a {dim}-dimensional matrix")]
    BadRootCount { k: usize, dim: usize },
    #[error("eigensolver stopped after {iterations} iterations with residual {residual:e}")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, FciError>;

/// All bitmasks over `norb` bits with exactly `n` bits set, ascending.
fn occupation_strings(norb: usize, n: usize) -> Vec<u32> {
    (0u32..1 << norb)
        .filter(|m| m.count_ones() as usize == n)
        .collect()
}

#[derive(Debug, Clone)]
pub struct DeterminantBasis {
    norb: usize,
    n_alpha: usize,
    n_beta: usize,
    alpha: Vec<u32>,
    beta: Vec<u32>,
    /// Position of each occupation mask in `alpha`/`beta`, `u32::MAX` if absent.
    alpha_pos: Vec<u32>,
    beta_pos: Vec<u32>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn build_basis(norb: usize, n_alpha: usize, n_beta: usize) -> Result<DeterminantBasis> {
    build_basis_capped(norb, n_alpha, n_beta, DEFAULT_MAX_DIM)
}

pub fn build_basis_capped(
    norb: usize,
    n_alpha: usize,
    n_beta: usize,
    max_dim: usize,
) -> Result<DeterminantBasis> {
    if norb > MAX_NORB {
        return Err(FciError::TooLarge {
            reason: format!("{norb} orbitals exceeds the cap of {MAX_NORB}"),
        });
    }
    if n_alpha > norb || n_beta > norb {
        return Err(FciError::InvalidOccupation {
            norb,
            n_alpha,
            n_beta,
        });
    }
    let dim = binomial(norb, n_alpha) * binomial(norb, n_beta);
    if dim > max_dim as f64 {
        return Err(FciError::TooLarge {
            reason: format!("FCI dimension {dim} exceeds the cap of {max_dim}"),
        });
    }
    let alpha = occupation_strings(norb, n_alpha);
    let beta = occupation_strings(norb, n_beta);
    let positions = |strings: &[u32]| {
        let mut pos = vec![u32::MAX; 1 << norb];
        for (i, &m) in strings.iter().enumerate() {
            pos[m as usize] = i as u32;
        }
        pos
    };
    Ok(DeterminantBasis {
        norb,
        n_alpha,
        n_beta,
        alpha_pos: positions(&alpha),
        beta_pos: positions(&beta),
        alpha,
        beta,
    })
}

impl DeterminantBasis {
    pub fn norb(&self) -> usize {
        self.norb
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn n_beta(&self) -> usize {
        self.n_beta
    }

    pub fn len(&self) -> usize {
        self.alpha.len() * self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(alpha, beta)` masks of determinant `index`.
    pub fn det(&self, index: usize) -> (u32, u32) {
        (
            self.alpha[index / self.beta.len()],
            self.beta[index % self.beta.len()],
        )
    }

    pub fn dets(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.alpha
            .iter()
            .flat_map(move |&a| self.beta.iter().map(move |&b| (a, b)))
    }

    pub fn index_of(&self, alpha: u32, beta: u32) -> Option<usize> {
        let ia = *self.alpha_pos.get(alpha as usize)?;
        let ib = *self.beta_pos.get(beta as usize)?;
        (ia != u32::MAX && ib != u32::MAX).then(|| ia as usize * self.beta.len() + ib as usize)
    }

    /// Interleaved spin-orbital mask: bit `2p` alpha, bit `2p+1` beta.
    pub fn qubit_state(&self, index: usize) -> u64 {
        let (a, b) = self.det(index);
        interleave(a, b)
    }
}

pub fn interleave(alpha: u32, beta: u32) -> u64 {
    let mut out = 0u64;
    for p in 0..32 {
        out |= (((alpha >> p) & 1) as u64) << (2 * p);
        out |= (((beta >> p) & 1) as u64) << (2 * p + 1);
    }
    out
}

fn deinterleave(mask: u64) -> (u32, u32) {
    let (mut a, mut b) = (0u32, 0u32);
    for p in 0..32 {
        a |= (((mask >> (2 * p)) & 1) as u32) << p;
        b |= (((mask >> (2 * p + 1)) & 1) as u32) << p;
    }
    (a, b)
}

/// Applies `a_p` (or `a+_p`) to an occupation mask; `None` if the result vanishes.
#[inline]
fn apply(mask: u64, p: usize, create: bool, sign: &mut f64) -> Option<u64> {
    let bit = 1u64 << p;
    if (mask & bit != 0) == create {
        return None;
    }
    if (mask & (bit - 1)).count_ones() % 2 == 1 {
        *sign = -*sign;
    }
    Some(mask ^ bit)
}

/// Symmetric matrix in compressed-row form with both triangles stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymmetric {
    /// Assembles from upper-triangle entries `(row, col, value)` with `row <= col`.
    /// Duplicate entries are summed.
    pub fn from_upper(dim: usize, mut upper: Vec<(usize, usize, f64)>) -> Self {
        let mut all = Vec::with_capacity(upper.len() * 2);
        for &(r, c, v) in &upper {
            assert!(
                r <= c && c < dim,
                "entry ({r},{c}) is not in the upper triangle"
            );
            all.push((r, c, v));
            if r != c {
                all.push((c, r, v));
            }
        }
        upper.clear();
        all.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(all.len());
        let mut vals: Vec<f64> = Vec::with_capacity(all.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in all {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut upper = Vec::new();
        for r in 0..m.nrows() {
            for c in r..m.ncols() {
                if m[(r, c)] != 0.0 {
                    upper.push((r, c, m[(r, c)]));
                }
            }
        }
        Self::from_upper(m.nrows(), upper)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&col) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> DVector<f64> {
        DVector::from_fn(self.dim, |i, _| self.get(i, i))
    }

    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim, |r, _| self.row(r).map(|(c, v)| v * x[c]).sum())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }
}

/// Spatial part of the integral over spin-orbitals `(pq|rs)`, zero unless
/// `p,q` and `r,s` share spin.
#[inline]
fn so_chem(dump: &FciDump, p: usize, q: usize, r: usize, s: usize) -> f64 {
    if p % 2 != q % 2 || r % 2 != s % 2 {
        return 0.0;
    }
    dump.h2(p / 2, q / 2, r / 2, s / 2)
}

fn occupied(mask: u64) -> Vec<usize> {
    (0..64).filter(|&p| mask >> p & 1 == 1).collect()
}

fn diagonal_element(dump: &FciDump, occ: &[usize]) -> f64 {
    let mut e = dump.e_core();
    for &i in occ {
        e += dump.h1(i / 2, i / 2);
    }
    for &i in occ {
        for &j in occ {
            e += 0.5 * (so_chem(dump, i, i, j, j) - so_chem(dump, i, j, j, i));
        }
    }
    e
}

fn single_element(dump: &FciDump, occ: &[usize], i: usize, a: usize) -> f64 {
    let mut v = dump.h1(a / 2, i / 2);
    for &j in occ {
        v += so_chem(dump, a, i, j, j) - so_chem(dump, a, j, j, i);
    }
    v
}

/// Hamiltonian matrix over the determinant basis via Slater-Condon rules.
pub fn build_fci_matrix(dump: &FciDump, basis: &DeterminantBasis) -> Result<SparseSymmetric> {
    if basis.norb != dump.norb() || basis.n_alpha != dump.n_alpha() || basis.n_beta != dump.n_beta()
    {
        return Err(FciError::InconsistentBasis {
            basis_norb: basis.norb,
            basis_alpha: basis.n_alpha,
            basis_beta: basis.n_beta,
            norb: dump.norb(),
            n_alpha: dump.n_alpha(),
            n_beta: dump.n_beta(),
        });
    }
    let nso = 2 * basis.norb;
    let mut upper = Vec::new();
    for row in 0..basis.len() {
        let mask = basis.qubit_state(row);
        let occ = occupied(mask);
        let virt: Vec<usize> = (0..nso).filter(|p| mask >> p & 1 == 0).collect();
        upper.push((row, row, diagonal_element(dump, &occ)));

        let mut push = |target: u64, value: f64| {
            if value == 0.0 {
                return;
            }
            let (a, b) = deinterleave(target);
            if let Some(col) = basis.index_of(a, b) {
                if col > row {
                    upper.push((row, col, value));
                }
            }
        };

        for &i in &occ {
            for &a in virt.iter().filter(|&&a| a % 2 == i % 2) {
                let mut sign = 1.0;
                let target =
                    apply(mask, i, false, &mut sign).and_then(|m| apply(m, a, true, &mut sign));
                if let Some(t) = target {
                    push(t, sign * single_element(dump, &occ, i, a));
                }
            }
        }

        for (x, &i) in occ.iter().enumerate() {
            for &j in &occ[x + 1..] {
                for (y, &a) in virt.iter().enumerate() {
                    for &b in &virt[y + 1..] {
                        if (i % 2 + j % 2) != (a % 2 + b % 2) {
                            continue;
                        }
                        let value = so_chem(dump, a, i, b, j) - so_chem(dump, a, j, b, i);
                        if value == 0.0 {
                            continue;
                        }
                        let mut sign = 1.0;
                        let target = apply(mask, i, false, &mut sign)
                            .and_then(|m| apply(m, j, false, &mut sign))
                            .and_then(|m| apply(m, b, true, &mut sign))
                            .and_then(|m| apply(m, a, true, &mut sign));
                        if let Some(t) = target {
                            push(t, sign * value);
                        }
                    }
                }
            }
        }
    }
    Ok(SparseSymmetric::from_upper(basis.len(), upper))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SpectrumResult {
    /// Ascending.
    pub energies: Vec<f64>,
    /// `e1 - e0` when at least two roots were computed.
    pub gap: Option<f64>,
    pub n_iterations: usize,
    pub converged: bool,
    pub max_residual: f64,
}

impl SpectrumResult {
    fn from_energies(
        energies: Vec<f64>,
        n_iterations: usize,
        converged: bool,
        max_residual: f64,
    ) -> Self {
        let gap = (energies.len() >= 2).then(|| (energies[1] - energies[0]).max(0.0));
        Self {
            energies,
            gap,
            n_iterations,
            converged,
            max_residual,
        }
    }

    /// Converts an unconverged result into [`FciError::NoConvergence`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(FciError::NoConvergence {
                iterations: self.n_iterations,
                residual: self.max_residual,
                best: self.energies,
            })
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DavidsonOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub max_subspace: usize,
    /// Matrices up to this dimension are diagonalized densely.
    pub dense_cutoff: usize,
}

impl Default for DavidsonOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOLERANCE,
            max_iterations: 1000,
            max_subspace: 30,
            dense_cutoff: 2000,
        }
    }
}

/// Lowest `k` eigenvalues; dense below 2000 rows, Davidson above.
pub fn lowest_eigenvalues(matrix: &SparseSymmetric, k: usize, tol: f64) -> Result<SpectrumResult> {
    lowest_eigenvalues_with(
        matrix,
        k,
        DavidsonOptions {
            tol,
            ..Default::default()
        },
    )
}

pub fn lowest_eigenvalues_with(
    matrix: &SparseSymmetric,
    k: usize,
    opts: DavidsonOptions,
) -> Result<SpectrumResult> {
    let dim = matrix.dim();
    if k == 0 || k > dim {
        return Err(FciError::BadRootCount { k, dim });
    }
    if dim <= opts.dense_cutoff {
        let mut evals: Vec<f64> = SymmetricEigen::new(matrix.to_dense())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        evals.sort_by(f64::total_cmp);
        evals.truncate(k);
        return Ok(SpectrumResult::from_energies(evals, 1, true, 0.0));
    }
    Ok(davidson(matrix, k, opts))
}

fn orthonormalize_against(v: &mut DVector<f64>, basis: &[DVector<f64>]) -> f64 {
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let overlap = b.dot(v);
            v.axpy(-overlap, b, 1.0);
        }
    }
    let norm = v.norm();
    if norm > 0.0 {
        *v /= norm;
    }
    norm
}

fn davidson(matrix: &SparseSymmetric, k: usize, opts: DavidsonOptions) -> SpectrumResult {
    let dim = matrix.dim();
    let diag = matrix.diagonal();
    let max_subspace = opts.max_subspace.max(3 * k).min(dim);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
    let n_guess = (2 * k).min(dim).min(max_subspace);
    let mut basis: Vec<DVector<f64>> = order[..n_guess]
        .iter()
        .map(|&i| {
            let mut e = DVector::zeros(dim);
            e[i] = 1.0;
            e
        })
        .collect();
    let mut images: Vec<DVector<f64>> = basis.iter().map(|v| matrix.matvec(v)).collect();

    let mut theta = vec![0.0; k];
    let mut max_residual = f64::INFINITY;
    for iteration in 1..=opts.max_iterations {
        let m = basis.len();
        let sub = DMatrix::from_fn(m, m, |r, c| basis[r].dot(&images[c]));
        let sub = (&sub + sub.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sub);
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let ritz = |col: usize, vecs: &[DVector<f64>]| {
            let y = eig.eigenvectors.column(col);
            vecs.iter()
                .zip(y.iter())
                .fold(DVector::zeros(dim), |acc, (v, &c)| acc + v * c)
        };

        let mut corrections = Vec::new();
        max_residual = 0.0f64;
        for r in 0..k {
            let col = idx[r];
            theta[r] = eig.eigenvalues[col];
            let x = ritz(col, &basis);
            let ax = ritz(col, &images);
            let residual = &ax - &x * theta[r];
            let rn = residual.norm();
            max_residual = max_residual.max(rn);
            if rn >= opts.tol {
                let t = DVector::from_fn(dim, |i, _| {
                    let denom = theta[r] - diag[i];
                    let denom = if denom.abs() < 1e-8 {
                        1e-8f64.copysign(denom)
                    } else {
                        denom
                    };
                    residual[i] / denom
                });
                corrections.push(t);
            }
        }
        if corrections.is_empty() {
            return SpectrumResult::from_energies(theta, iteration, true, max_residual);
        }

        if basis.len() + corrections.len() > max_subspace {
            // Restart from the lowest Ritz vectors.
            let keep = (2 * k).min(m);
            let restart: Vec<DVector<f64>> = idx[..keep].iter().map(|&c| ritz(c, &basis)).collect();
            // Images are recomputed rather than rotated so round-off does not accumulate.
            let mut ortho: Vec<DVector<f64>> = Vec::with_capacity(keep);
            let mut ortho_images = Vec::with_capacity(keep);
            for mut w in restart {
                if orthonormalize_against(&mut w, &ortho) > 1e-10 {
                    ortho_images.push(matrix.matvec(&w));
                    ortho.push(w);
                }
            }
            basis = ortho;
            images = ortho_images;
        }

        let mut added = 0;
        for mut t in corrections {
            if basis.len() >= max_subspace {
                break;
            }
            if orthonormalize_against(&mut t, &basis) > 1e-10 {
                images.push(matrix.matvec(&t));
                basis.push(t);
                added += 1;
            }
        }
        if added == 0 {
            log::warn!("Davidson stagnated at iteration {iteration}, residual {max_residual:e}");
            return SpectrumResult::from_energies(theta, iteration, false, max_residual);
        }
    }
    SpectrumResult::from_energies(theta, opts.max_iterations, false, max_residual)
}

/// Convenience: lowest `k` FCI energies (including the core energy) of a Hamiltonian.
pub fn solve(dump: &FciDump, k: usize, tol: f64) -> Result<(DeterminantBasis, SpectrumResult)> {
    let basis = build_basis(dump.norb(), dump.n_alpha(), dump.n_beta())?;
    let h = build_fci_matrix(dump, &basis)?;
    let k = k.min(basis.len());
    let spectrum = lowest_eigenvalues(&h, k, tol)?;
    Ok((basis, spectrum))
}
