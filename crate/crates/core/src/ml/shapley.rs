//! Exact Shapley values by coalition enumeration.
//!
//! Absent features are marginalized over a background set: the value of a
//! coalition `S` is the mean model output over background rows with the
//! features in `S` replaced by those of the explained point.

use serde::{Deserialize, Serialize};

use super::{MlError, Result};

pub const MAX_FEATURES: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleyValues {
    pub values: Vec<f64>,
    /// Model output at the explained point.
    pub prediction: f64,
    /// Mean model output over the background.
    pub baseline: f64,
}

pub fn shapley_attribution<F>(
    model: F,
    point: &[f64],
    background: &[Vec<f64>],
) -> Result<ShapleyValues>
where
    F: Fn(&[f64]) -> f64,
{
    let groups: Vec<Vec<usize>> = (0..point.len()).map(|f| vec![f]).collect();
    shapley_attribution_grouped(model, point, background, &groups)
}

/// Shapley values of the game whose players are disjoint feature groups;
/// every feature of a group enters a coalition together.
pub fn shapley_attribution_grouped<F>(
    model: F,
    point: &[f64],
    background: &[Vec<f64>],
    groups: &[Vec<usize>],
) -> Result<ShapleyValues>
where
    F: Fn(&[f64]) -> f64,
{
    let d = point.len();
    let players = groups.len();
    if players > MAX_FEATURES {
        return Err(MlError::TooManyFeatures(players));
    }
    if background.is_empty() {
        return Err(MlError::InvalidConfig(
            "Shapley background set is empty".into(),
        ));
    }
    if let Some(row) = background.iter().find(|r| r.len() != d) {
        return Err(MlError::DimensionMismatch {
            expected: d,
            got: row.len(),
        });
    }
    let mut owner = vec![usize::MAX; d];
    for (g, members) in groups.iter().enumerate() {
        for &f in members {
            if f >= d || owner[f] != usize::MAX {
                return Err(MlError::InvalidConfig(format!(
                    "feature {f} is out of range or in two groups"
                )));
            }
            owner[f] = g;
        }
    }
    if owner.contains(&usize::MAX) {
        return Err(MlError::InvalidConfig(
            "every feature must belong to a group".into(),
        ));
    }

    let n_coalitions = 1usize << players;
    let mut scratch = vec![0.0; d];
    let coalition_value: Vec<f64> = (0..n_coalitions)
        .map(|mask| {
            let total: f64 = background
                .iter()
                .map(|bg| {
                    for f in 0..d {
                        scratch[f] = if mask >> owner[f] & 1 == 1 {
                            point[f]
                        } else {
                            bg[f]
                        };
                    }
                    model(&scratch)
                })
                .sum();
            total / background.len() as f64
        })
        .collect();

    let factorial: Vec<f64> = (0..=players)
        .scan(1.0, |acc, k| {
            if k > 0 {
                *acc *= k as f64;
            }
            Some(*acc)
        })
        .collect();
    let weight = |size: usize| factorial[size] * factorial[players - size - 1] / factorial[players];

    let values = (0..players)
        .map(|p| {
            (0..n_coalitions)
                .filter(|mask| mask >> p & 1 == 0)
                .map(|mask| {
                    weight(mask.count_ones() as usize)
                        * (coalition_value[mask | 1 << p] - coalition_value[mask])
                })
                .sum()
        })
        .collect();
    Ok(ShapleyValues {
        values,
        prediction: coalition_value[n_coalitions - 1],
        baseline: coalition_value[0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn background(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn dummy_feature_gets_nothing() {
        let bg = background(20, 3, 1);
        let s = shapley_attribution(|x| (3.0 * x[1]).sin(), &[0.2, 0.9, 0.4], &bg).unwrap();
        assert!(s.values[0].abs() < 1e-9);
        assert!(s.values[2].abs() < 1e-9);
        assert!((s.values[1] - (s.prediction - s.baseline)).abs() < 1e-12);
    }

    #[test]
    fn symmetric_features_share_equally() {
        // identical marginals: background rows symmetric under swapping features 0 and 1
        let mut bg = background(15, 3, 2);
        let swapped: Vec<Vec<f64>> = bg.iter().map(|r| vec![r[1], r[0], r[2]]).collect();
        bg.extend(swapped);
        let s =
            shapley_attribution(|x| (x[0] + x[1]).powi(3) + x[2], &[0.7, 0.7, 0.1], &bg).unwrap();
        assert!((s.values[0] - s.values[1]).abs() < 1e-12);
    }

    #[test]
    fn additive_closed_form() {
        let bg = background(30, 3, 3);
        let (a, b, c) = (1.5, -2.0, 0.25);
        let x = [0.3, 0.8, 0.6];
        let s = shapley_attribution(|v| a * v[0] + b * v[1] + c * v[2], &x, &bg).unwrap();
        for (f, coef) in [a, b, c].iter().enumerate() {
            let mean = bg.iter().map(|r| r[f]).sum::<f64>() / bg.len() as f64;
            assert!((s.values[f] - coef * (x[f] - mean)).abs() < 1e-9);
        }
    }

    #[test]
    fn efficiency() {
        let bg = background(10, 5, 4);
        let s = shapley_attribution(
            |x| x[0] * x[1] - x[2] * x[3] * x[4] + x[0].exp(),
            &[0.1, 0.5, 0.9, 0.3, 0.7],
            &bg,
        )
        .unwrap();
        let total: f64 = s.values.iter().sum();
        assert!((total - (s.prediction - s.baseline)).abs() < 1e-12);
    }

    #[test]
    fn grouped_game_matches_merged_feature() {
        // f depends on x0 + x1; grouping {0,1} must equal the singleton game on the sum
        let bg = background(12, 3, 5);
        let f = |x: &[f64]| (x[0] + x[1]).powi(2) + 0.5 * x[2];
        let point = [0.4, 0.1, 0.8];
        let grouped = shapley_attribution_grouped(f, &point, &bg, &[vec![0, 1], vec![2]]).unwrap();
        let merged_bg: Vec<Vec<f64>> = bg.iter().map(|r| vec![r[0] + r[1], r[2]]).collect();
        let merged =
            shapley_attribution(|x| x[0].powi(2) + 0.5 * x[1], &[0.5, 0.8], &merged_bg).unwrap();
        for (a, b) in grouped.values.iter().zip(&merged.values) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(shapley_attribution_grouped(f, &point, &bg, &[vec![0, 1], vec![1, 2]]).is_err());
        assert!(shapley_attribution_grouped(f, &point, &bg, &[vec![0, 1]]).is_err());
    }

    #[test]
    fn too_many_features() {
        let point = vec![0.0; 16];
        assert_eq!(
            shapley_attribution(|_| 0.0, &point, std::slice::from_ref(&point)).unwrap_err(),
            MlError::TooManyFeatures(16)
        );
    }
}
