use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{check_finite, MlError, Result};

/// Per-column min-max parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(x: &DMatrix<f64>) -> Result<Self> {
        check_finite(x)?;
        let (mins, maxs) = (0..x.ncols())
            .map(|c| {
                let col = x.column(c);
                (col.min(), col.max())
            })
            .unzip();
        Ok(Self { mins, maxs })
    }

    pub fn n_features(&self) -> usize {
        self.mins.len()
    }

    fn check(&self, x: &DMatrix<f64>) -> Result<()> {
        if x.ncols() != self.n_features() {
            return Err(MlError::DimensionMismatch {
                expected: self.n_features(),
                got: x.ncols(),
            });
        }
        Ok(())
    }

    /// `(x - min) / (max - min)`; constant columns map to 0.
    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check(x)?;
        check_finite(x)?;
        Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| {
            let span = self.maxs[c] - self.mins[c];
            if span > 0.0 {
                (x[(r, c)] - self.mins[c]) / span
            } else {
                0.0
            }
        }))
    }

    pub fn inverse_transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check(x)?;
        Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| {
            self.mins[c] + x[(r, c)] * (self.maxs[c] - self.mins[c])
        }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledDataset {
    pub x: DMatrix<f64>,
    pub scaler: MinMaxScaler,
    pub labels: Option<Vec<bool>>,
}

impl ScaledDataset {
    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn with_labels(mut self, labels: Vec<bool>) -> Result<Self> {
        if labels.len() != self.x.nrows() {
            return Err(MlError::LengthMismatch(labels.len(), self.x.nrows()));
        }
        self.labels = Some(labels);
        Ok(self)
    }
}

/// Fits new parameters, or reuses `params`. Data scaled with reused
/// parameters is clipped to `[0, 1]`.
pub fn minmax_scale(x_raw: &DMatrix<f64>, params: Option<&MinMaxScaler>) -> Result<ScaledDataset> {
    let (scaler, clip) = match params {
        Some(p) => (p.clone(), true),
        None => (MinMaxScaler::fit(x_raw)?, false),
    };
    let mut x = scaler.transform(x_raw)?;
    if clip {
        x.apply(|v| *v = v.clamp(0.0, 1.0));
    }
    Ok(ScaledDataset {
        x,
        scaler,
        labels: None,
    })
}
