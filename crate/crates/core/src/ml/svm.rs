//! RBF support vector classifier trained by SMO, with grid search over
//! `(C, gamma)`, stratified k-fold cross-validation and Platt calibration.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{classification_metrics, ClassificationMetrics};
use super::{check_finite, MlError, Result};

pub const SMO_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_FOLDS: usize = 5;
const TAU: f64 = 1e-12;
/// Kernel rows kept in memory when the Gram matrix is not precomputed.
const CACHE_ROWS: usize = 2048;
const PRECOMPUTE_LIMIT: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmGrid {
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl SvmGrid {
    /// C in {0.1, 1, 10, 100}, gamma in {0.01, 0.1, 1, 1/D}.
    pub fn default_for(n_features: usize) -> Self {
        let mut gamma = vec![0.01, 0.1, 1.0];
        let inv = 1.0 / n_features.max(1) as f64;
        if !gamma.contains(&inv) {
            gamma.push(inv);
        }
        Self {
            c: vec![0.1, 1.0, 10.0, 100.0],
            gamma,
        }
    }

    fn points(&self) -> Vec<SvmParams> {
        self.c
            .iter()
            .flat_map(|&c| self.gamma.iter().map(move |&gamma| SvmParams { c, gamma }))
            .collect()
    }
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

fn rows_of(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    x.row_iter().map(|r| r.iter().copied().collect()).collect()
}

struct Kernel<'a> {
    rows: &'a [Vec<f64>],
    gamma: f64,
    full: Option<Vec<f64>>,
    cache: HashMap<usize, Vec<f64>>,
}

impl<'a> Kernel<'a> {
    fn new(rows: &'a [Vec<f64>], gamma: f64) -> Self {
        let n = rows.len();
        let full = (n <= PRECOMPUTE_LIMIT).then(|| {
            let mut k = vec![0.0; n * n];
            for i in 0..n {
                k[i * n + i] = 1.0;
                for j in 0..i {
                    let v = rbf(&rows[i], &rows[j], gamma);
                    k[i * n + j] = v;
                    k[j * n + i] = v;
                }
            }
            k
        });
        Self {
            rows,
            gamma,
            full,
            cache: HashMap::new(),
        }
    }

    fn row(&mut self, i: usize) -> &[f64] {
        let n = self.rows.len();
        if let Some(full) = &self.full {
            return &full[i * n..(i + 1) * n];
        }
        if !self.cache.contains_key(&i) {
            if self.cache.len() >= CACHE_ROWS {
                self.cache.clear();
            }
            let row = self
                .rows
                .iter()
                .map(|r| rbf(&self.rows[i], r, self.gamma))
                .collect();
            self.cache.insert(i, row);
        }
        &self.cache[&i]
    }
}

/// Raw SMO solution: `f(x) = sum_i coef_i K(sv_i, x) - rho`.
#[derive(Debug, Clone, PartialEq)]
struct Machine {
    support: Vec<Vec<f64>>,
    coef: Vec<f64>,
    rho: f64,
    gamma: f64,
}

impl Machine {
    fn decision(&self, x: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(s, c)| c * rbf(s, x, self.gamma))
            .sum::<f64>()
            - self.rho
    }
}

/// Dual problem `min 1/2 a'Qa - e'a`, `0 <= a <= C`, `y'a = 0`, solved with
/// second-order working-set selection.
fn smo(rows: &[Vec<f64>], y: &[bool], params: SvmParams) -> Machine {
    let n = rows.len();
    let pos = y.iter().filter(|v| **v).count();
    if pos == 0 || pos == n {
        // one class only (possible inside a CV fold): constant decision
        let rho = if pos == n { -1.0 } else { 1.0 };
        return Machine {
            support: vec![],
            coef: vec![],
            rho,
            gamma: params.gamma,
        };
    }
    let ys: Vec<f64> = y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect();
    let c = params.c;
    let mut kernel = Kernel::new(rows, params.gamma);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = (100 * n).max(10_000_000);

    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    for _ in 0..max_iter {
        // i: maximal violator in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            let in_up = if ys[t] > 0.0 {
                !upper(alpha[t])
            } else {
                !lower(alpha[t])
            };
            if in_up && -ys[t] * grad[t] >= gmax {
                gmax = -ys[t] * grad[t];
                i = t;
            }
        }
        if i == usize::MAX {
            break;
        }
        let ki: Vec<f64> = kernel.row(i).to_vec();
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            let in_low = if ys[t] > 0.0 {
                !lower(alpha[t])
            } else {
                !upper(alpha[t])
            };
            if !in_low {
                continue;
            }
            let yg = ys[t] * grad[t];
            gmax2 = gmax2.max(yg);
            let diff = gmax + yg;
            if diff > 0.0 {
                let quad = (2.0 - 2.0 * ki[t]).max(TAU);
                let obj = -diff * diff / quad;
                if obj <= best {
                    best = obj;
                    j = t;
                }
            }
        }
        if gmax + gmax2 < SMO_TOLERANCE || j == usize::MAX {
            break;
        }
        let kj: Vec<f64> = kernel.row(j).to_vec();
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let kij = ki[j];
        if ys[i] != ys[j] {
            let quad = (2.0 - 2.0 * kij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (2.0 - 2.0 * kij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += ys[t] * (ys[i] * ki[t] * di + ys[j] * kj[t] * dj);
        }
    }

    // rho: mean over free vectors, else midpoint of the feasible interval
    let (mut ub, mut lb, mut sum, mut free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..n {
        let yg = ys[t] * grad[t];
        if upper(alpha[t]) {
            if ys[t] < 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else if lower(alpha[t]) {
            if ys[t] > 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else {
            sum += yg;
            free += 1;
        }
    }
    let rho = if free > 0 {
        sum / free as f64
    } else {
        (ub + lb) / 2.0
    };
    let (support, coef) = (0..n)
        .filter(|&t| alpha[t] > 0.0)
        .map(|t| (rows[t].clone(), alpha[t] * ys[t]))
        .unzip();
    Machine {
        support,
        coef,
        rho,
        gamma: params.gamma,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Platt {
    pub a: f64,
    pub b: f64,
    /// The fit was not decreasing in the decision value and was replaced by
    /// the plain logistic `A = -1, B = 0`.
    pub fallback: bool,
}

impl Platt {
    pub fn probability(&self, decision: f64) -> f64 {
        let f = decision * self.a + self.b;
        if f >= 0.0 {
            (-f).exp() / (1.0 + (-f).exp())
        } else {
            1.0 / (1.0 + f.exp())
        }
    }
}

/// Newton fit of `P(y=1|f) = 1 / (1 + exp(A f + B))` with regularized targets.
pub fn platt_fit(decisions: &[f64], labels: &[bool]) -> Platt {
    let prior1 = labels.iter().filter(|v| **v).count() as f64;
    let prior0 = labels.len() as f64 - prior1;
    let hi = (prior1 + 1.0) / (prior1 + 2.0);
    let lo = 1.0 / (prior0 + 2.0);
    let t: Vec<f64> = labels.iter().map(|&y| if y { hi } else { lo }).collect();
    let objective = |a: f64, b: f64| -> f64 {
        decisions
            .iter()
            .zip(&t)
            .map(|(d, ti)| {
                let f = d * a + b;
                if f >= 0.0 {
                    ti * f + (-f).exp().ln_1p()
                } else {
                    (ti - 1.0) * f + f.exp().ln_1p()
                }
            })
            .sum()
    };
    let (mut a, mut b) = (0.0, ((prior0 + 1.0) / (prior1 + 1.0)).ln());
    let mut fval = objective(a, b);
    for _ in 0..100 {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (1e-12, 1e-12, 0.0, 0.0, 0.0);
        for (d, ti) in decisions.iter().zip(&t) {
            let f = d * a + b;
            let (p, q) = if f >= 0.0 {
                let e = (-f).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = f.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += d * d * d2;
            h22 += d2;
            h21 += d * d2;
            let d1 = ti - p;
            g1 += d * d1;
            g2 += d1;
        }
        if g1.abs() < 1e-5 && g2.abs() < 1e-5 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        while step >= 1e-10 {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if step < 1e-10 {
            break;
        }
    }
    if a < 0.0 && a.is_finite() && b.is_finite() {
        Platt {
            a,
            b,
            fallback: false,
        }
    } else {
        Platt {
            a: -1.0,
            b: 0.0,
            fallback: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridScore {
    pub params: SvmParams,
    pub mean_f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub params: SvmParams,
    pub n_features: usize,
    pub support_vectors: Vec<Vec<f64>>,
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub platt: Platt,
    pub cv_metrics: Vec<ClassificationMetrics>,
    pub cv_mean_f1: f64,
    pub grid_scores: Vec<GridScore>,
    pub training_accuracy: f64,
    /// Training rows are all identical; the classifier carries no information
    /// and predicts the negative class everywhere.
    pub degenerate: bool,
}

impl SvmModel {
    fn check(&self, x: &DMatrix<f64>) -> Result<()> {
        if x.ncols() != self.n_features {
            return Err(MlError::DimensionMismatch {
                expected: self.n_features,
                got: x.ncols(),
            });
        }
        Ok(())
    }

    pub fn decision_value(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(s, c)| c * rbf(s, x, self.params.gamma))
            .sum::<f64>()
            + self.bias
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        self.platt.probability(self.decision_value(x))
    }

    pub fn decision_function(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(rows_of(x).iter().map(|r| self.decision_value(r)).collect())
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<bool>> {
        Ok(self
            .decision_function(x)?
            .into_iter()
            .map(|d| d >= 0.0)
            .collect())
    }

    pub fn predict_proba(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        Ok(self
            .decision_function(x)?
            .into_iter()
            .map(|d| self.platt.probability(d))
            .collect())
    }
}

pub fn predict_proba(model: &SvmModel, x: &DMatrix<f64>) -> Result<Vec<f64>> {
    model.predict_proba(x)
}

/// Stratified assignment of samples to `k` folds; each class is shuffled and
/// dealt round-robin, continuing where the previous class stopped.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; labels.len()];
    let mut next = 0;
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            fold[i] = next % k;
            next += 1;
        }
    }
    fold
}

fn fit_machine(rows: &[Vec<f64>], labels: &[bool], params: SvmParams, degenerate: bool) -> Machine {
    if degenerate {
        return Machine {
            support: vec![],
            coef: vec![],
            rho: 1.0,
            gamma: params.gamma,
        };
    }
    smo(rows, labels, params)
}

fn all_rows_identical(rows: &[Vec<f64>]) -> bool {
    rows.windows(2).all(|w| w[0] == w[1])
}

/// Grid search with stratified k-fold CV on F1, refit of the best point on
/// all data, and Platt calibration on the out-of-fold decision values.
pub fn svm_fit_cv(
    x: &DMatrix<f64>,
    labels: &[bool],
    grid: &SvmGrid,
    k: usize,
    seed: u64,
) -> Result<SvmModel> {
    check_finite(x)?;
    let n = x.nrows();
    if labels.len() != n {
        return Err(MlError::LengthMismatch(labels.len(), n));
    }
    if k < 2 || n < k {
        return Err(MlError::TooFewSamples {
            samples: n,
            folds: k,
        });
    }
    let pos = labels.iter().filter(|v| **v).count();
    if pos == 0 || pos == n {
        return Err(MlError::SingleClass);
    }
    let points = grid.points();
    if points.is_empty() || points.iter().any(|p| !(p.c > 0.0 && p.gamma > 0.0)) {
        return Err(MlError::InvalidConfig(
            "SVM grid needs positive C and gamma values".into(),
        ));
    }
    let rows = rows_of(x);
    let degenerate = all_rows_identical(&rows);
    let fold = stratified_folds(labels, k, seed);

    let mut best: Option<(f64, SvmParams, Vec<f64>, Vec<ClassificationMetrics>)> = None;
    let mut grid_scores = Vec::with_capacity(points.len());
    for params in points {
        let mut oof = vec![0.0; n];
        let mut fold_metrics = Vec::with_capacity(k);
        for f in 0..k {
            let (train, test): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| fold[i] != f);
            let train_rows: Vec<Vec<f64>> = train.iter().map(|&i| rows[i].clone()).collect();
            let train_labels: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
            let m = fit_machine(&train_rows, &train_labels, params, degenerate);
            for &i in &test {
                oof[i] = m.decision(&rows[i]);
            }
            let pred: Vec<bool> = test.iter().map(|&i| oof[i] >= 0.0).collect();
            let truth: Vec<bool> = test.iter().map(|&i| labels[i]).collect();
            fold_metrics.push(classification_metrics(&pred, &truth)?);
        }
        let mean_f1 = fold_metrics.iter().map(|m| m.f1).sum::<f64>() / k as f64;
        grid_scores.push(GridScore { params, mean_f1 });
        if best.as_ref().is_none_or(|b| mean_f1 > b.0) {
            best = Some((mean_f1, params, oof, fold_metrics));
        }
    }
    let (cv_mean_f1, params, oof, cv_metrics) = best.expect("grid is non-empty");
    let platt = platt_fit(&oof, labels);
    let machine = fit_machine(&rows, labels, params, degenerate);
    let correct = rows
        .iter()
        .zip(labels)
        .filter(|(r, &y)| (machine.decision(r) >= 0.0) == y)
        .count();
    Ok(SvmModel {
        params,
        n_features: x.ncols(),
        support_vectors: machine.support,
        dual_coef: machine.coef,
        bias: -machine.rho,
        platt,
        cv_metrics,
        cv_mean_f1,
        grid_scores,
        training_accuracy: correct as f64 / n as f64,
        degenerate,
    })
}

impl SvmModel {
    /// Single fit without cross-validation or calibration (identity-like Platt).
    pub fn fit_fixed(x: &DMatrix<f64>, labels: &[bool], params: SvmParams) -> Result<Self> {
        check_finite(x)?;
        if labels.len() != x.nrows() {
            return Err(MlError::LengthMismatch(labels.len(), x.nrows()));
        }
        let rows = rows_of(x);
        let degenerate = all_rows_identical(&rows);
        let m = fit_machine(&rows, labels, params, degenerate);
        let correct = rows
            .iter()
            .zip(labels)
            .filter(|(r, &y)| (m.decision(r) >= 0.0) == y)
            .count();
        Ok(SvmModel {
            params,
            n_features: x.ncols(),
            support_vectors: m.support,
            dual_coef: m.coef,
            bias: -m.rho,
            platt: Platt {
                a: -1.0,
                b: 0.0,
                fallback: true,
            },
            cv_metrics: vec![],
            cv_mean_f1: f64::NAN,
            grid_scores: vec![],
            training_accuracy: correct as f64 / rows.len().max(1) as f64,
            degenerate,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn planted_rbf(n: usize, seed: u64) -> (DMatrix<f64>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::<f64>::from_fn(n, 2, |_, _| rng.gen_range(0.0..1.0));
        // disc of radius 0.35 around (0.5, 0.5): exp(-g r^2) rule with a fixed cut
        let labels = (0..n)
            .map(|i| (x[(i, 0)] - 0.5).powi(2) + (x[(i, 1)] - 0.5).powi(2) < 0.35 * 0.35)
            .collect();
        (x, labels)
    }

    #[test]
    fn separable_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 40;
        let x = DMatrix::from_fn(n, 2, |i, _| {
            if i < n / 2 {
                rng.gen_range(0.0..0.3)
            } else {
                rng.gen_range(1.3..1.6)
            }
        });
        let labels: Vec<bool> = (0..n).map(|i| i >= n / 2).collect();
        let m = svm_fit_cv(&x, &labels, &SvmGrid::default_for(2), 5, 0).unwrap();
        assert_eq!(m.training_accuracy, 1.0);
        let pred = m.predict(&x).unwrap();
        assert_eq!(classification_metrics(&pred, &labels).unwrap().f1, 1.0);
        // support vector deep in the positive region
        let deep = DMatrix::from_row_slice(1, 2, &[1.5, 1.5]);
        assert!(m.predict_proba(&deep).unwrap()[0] > 0.5);
    }

    #[test]
    fn planted_rule_recovered_and_calibrated() {
        let (x, labels) = planted_rbf(200, 2);
        let m = svm_fit_cv(&x, &labels, &SvmGrid::default_for(2), 5, 7).unwrap();
        assert!(m.cv_mean_f1 >= 0.9, "cv f1 {}", m.cv_mean_f1);
        assert_eq!(m.cv_metrics.len(), 5);
        assert!(!m.platt.fallback && m.platt.a < 0.0);

        let (xt, lt) = planted_rbf(2000, 3);
        let p = m.predict_proba(&xt).unwrap();
        // reliability over probability deciles, weighted by bin population
        let mut err = 0.0;
        for b in 0..10 {
            let (lo, hi) = (b as f64 / 10.0, (b + 1) as f64 / 10.0);
            let idx: Vec<usize> = (0..p.len())
                .filter(|&i| p[i] >= lo && (p[i] < hi || b == 9))
                .collect();
            if idx.is_empty() {
                continue;
            }
            let mean_p = idx.iter().map(|&i| p[i]).sum::<f64>() / idx.len() as f64;
            let freq = idx.iter().filter(|&&i| lt[i]).count() as f64 / idx.len() as f64;
            err += (mean_p - freq).abs() * idx.len() as f64;
        }
        let mace = err / p.len() as f64;
        assert!(mace <= 0.15, "calibration error {mace}");
    }

    #[test]
    fn probability_strictly_monotone_in_decision() {
        let (x, labels) = planted_rbf(100, 4);
        let m = svm_fit_cv(&x, &labels, &SvmGrid::default_for(2), 5, 1).unwrap();
        let mut last = 0.0;
        for i in -200..=200 {
            let p = m.platt.probability(i as f64 * 0.05);
            assert!(p > last && p < 1.0);
            last = p;
        }
    }

    #[test]
    fn identical_features_are_degenerate() {
        let x = DMatrix::from_element(20, 3, 0.4);
        let labels: Vec<bool> = (0..20).map(|i| i % 3 == 0).collect();
        let m = svm_fit_cv(&x, &labels, &SvmGrid::default_for(3), 5, 0).unwrap();
        assert!(m.degenerate);
        let prior = labels.iter().filter(|v| **v).count() as f64 / 20.0;
        let max_prior = prior.max(1.0 - prior);
        let f1 = classification_metrics(&m.predict(&x).unwrap(), &labels)
            .unwrap()
            .f1;
        assert!(f1 <= max_prior);
        assert!(m.cv_mean_f1 <= max_prior);
    }

    #[test]
    fn errors() {
        let x = DMatrix::from_element(6, 2, 0.1);
        assert_eq!(
            svm_fit_cv(&x, &[true; 6], &SvmGrid::default_for(2), 3, 0).unwrap_err(),
            MlError::SingleClass
        );
        let labels = [true, false, true, false, true, false];
        assert!(matches!(
            svm_fit_cv(&x, &labels, &SvmGrid::default_for(2), 7, 0),
            Err(MlError::TooFewSamples { .. })
        ));
        let (x, labels) = planted_rbf(30, 5);
        let m = svm_fit_cv(&x, &labels, &SvmGrid::default_for(2), 3, 0).unwrap();
        assert!(matches!(
            m.predict_proba(&DMatrix::zeros(2, 3)),
            Err(MlError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn stratified_folds_contain_both_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let k = rng.gen_range(2..7);
            let n = rng.gen_range(2 * k..80);
            let minority = rng.gen_range(k..=n / 2);
            let mut labels = vec![false; n];
            labels[..minority].iter_mut().for_each(|v| *v = true);
            labels.shuffle(&mut rng);
            let folds = stratified_folds(&labels, k, rng.gen());
            for f in 0..k {
                let members: Vec<bool> = (0..n)
                    .filter(|&i| folds[i] == f)
                    .map(|i| labels[i])
                    .collect();
                assert!(members.contains(&true) && members.contains(&false));
            }
        }
    }

    #[test]
    fn smo_satisfies_kkt_against_brute_force_dual() {
        // dual objective at the SMO solution is no worse than random feasible points
        let (x, labels) = planted_rbf(30, 11);
        let rows = rows_of(&x);
        let params = SvmParams {
            c: 10.0,
            gamma: 1.0,
        };
        let m = smo(&rows, &labels, params);
        let ys: Vec<f64> = labels.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect();
        let n = rows.len();
        let alpha_of = |coef: &[f64], sv: &[Vec<f64>]| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    sv.iter()
                        .position(|s| *s == rows[i])
                        .map_or(0.0, |p| coef[p] * ys[i])
                })
                .collect()
        };
        let dual = |a: &[f64]| -> f64 {
            let mut q = 0.0;
            for i in 0..n {
                for j in 0..n {
                    q += a[i] * a[j] * ys[i] * ys[j] * rbf(&rows[i], &rows[j], params.gamma);
                }
            }
            0.5 * q - a.iter().sum::<f64>()
        };
        let a = alpha_of(&m.coef, &m.support);
        assert!(a.iter().all(|v| (0.0..=params.c + 1e-12).contains(v)));
        assert!(a.iter().zip(&ys).map(|(ai, yi)| ai * yi).sum::<f64>().abs() < 1e-9);
        let opt = dual(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            // perturb along a feasible direction that keeps y'a = 0
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let mut b = a.clone();
            let step = rng.gen_range(-0.5..0.5);
            b[i] += step;
            b[j] -= step * ys[i] * ys[j];
            if b.iter().all(|v| (0.0..=params.c).contains(v)) {
                assert!(dual(&b) >= opt - 1e-2, "{} < {}", dual(&b), opt);
            }
        }
    }
}
