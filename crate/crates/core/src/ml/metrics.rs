use serde::{Deserialize, Serialize};

use super::{MlError, Result};

/// Precision/recall/F1 for the positive (solvable) class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
    /// Some ratio had a zero denominator and was reported as 0.
    pub zero_division: bool,
}

pub fn classification_metrics(predicted: &[bool], truth: &[bool]) -> Result<ClassificationMetrics> {
    if predicted.len() != truth.len() {
        return Err(MlError::LengthMismatch(predicted.len(), truth.len()));
    }
    let mut m = ClassificationMetrics::default();
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p, t) {
            (true, true) => m.true_positives += 1,
            (true, false) => m.false_positives += 1,
            (false, true) => m.false_negatives += 1,
            (false, false) => m.true_negatives += 1,
        }
    }
    let ratio = |num: usize, den: usize, flag: &mut bool| {
        if den == 0 {
            *flag = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let mut zero = false;
    m.precision = ratio(
        m.true_positives,
        m.true_positives + m.false_positives,
        &mut zero,
    );
    m.recall = ratio(
        m.true_positives,
        m.true_positives + m.false_negatives,
        &mut zero,
    );
    m.f1 = if m.precision + m.recall > 0.0 {
        2.0 * m.precision * m.recall / (m.precision + m.recall)
    } else {
        zero = true;
        0.0
    };
    m.accuracy = ratio(m.true_positives + m.true_negatives, truth.len(), &mut zero);
    m.zero_division = zero;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hand_example() {
        let pred = [vec![true; 10], vec![false; 5]].concat();
        let truth = [vec![true; 8], vec![false; 7]].concat();
        let m = classification_metrics(&pred, &truth).unwrap();
        assert_eq!(
            (m.true_positives, m.false_positives, m.false_negatives),
            (8, 2, 0)
        );
        assert!((m.precision - 0.8).abs() < 1e-15);
        assert_eq!(m.recall, 1.0);
        assert!((m.f1 - 16.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn perfect_and_degenerate() {
        let y = [true, false, true];
        let m = classification_metrics(&y, &y).unwrap();
        assert_eq!(
            (m.precision, m.recall, m.f1, m.accuracy),
            (1.0, 1.0, 1.0, 1.0)
        );
        let m = classification_metrics(&[false, false], &[false, false]).unwrap();
        assert!(m.zero_division);
        assert_eq!(m.f1, 0.0);
        assert_eq!(
            classification_metrics(&[true], &[true, false]).unwrap_err(),
            MlError::LengthMismatch(1, 2)
        );
    }

    #[test]
    fn random_confusions_match_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let n = rng.gen_range(1..60);
            let p: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            let t: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            let m = classification_metrics(&p, &t).unwrap();
            let tp = p.iter().zip(&t).filter(|(a, b)| **a && **b).count() as f64;
            let pp = p.iter().filter(|a| **a).count() as f64;
            let ap = t.iter().filter(|a| **a).count() as f64;
            let precision = if pp > 0.0 { tp / pp } else { 0.0 };
            let recall = if ap > 0.0 { tp / ap } else { 0.0 };
            let f1 = if tp > 0.0 { 2.0 * tp / (pp + ap) } else { 0.0 };
            assert_eq!(m.precision, precision);
            assert_eq!(m.recall, recall);
            assert!((m.f1 - f1).abs() < 1e-15);
        }
    }
}
