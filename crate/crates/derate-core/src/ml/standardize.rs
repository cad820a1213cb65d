//! Column standardization fitted on training rows only.

use serde::{Deserialize, Serialize};

use super::linalg::Matrix;

/// Per-column mean removal and scaling to unit variance (population
/// variance). Constant columns keep a recorded deviation of 0 and transform
/// to 0 instead of dividing by it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Standardizer {
        let n = x.rows() as f64;
        let d = x.cols();
        let mut mean = vec![0.0; d];
        for row in x.row_iter() {
            for (m, &v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; d];
        for row in x.row_iter() {
            for ((s, &v), &m) in var.iter_mut().zip(row).zip(&mean) {
                let c = v - m;
                *s += c * c;
            }
        }
        let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
        Standardizer { mean, std }
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        assert_eq!(x.cols(), self.mean.len());
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for (r, row) in x.row_iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                let z = if self.std[c] == 0.0 {
                    0.0
                } else {
                    (v - self.mean[c]) / self.std[c]
                };
                out.set(r, c, z);
            }
        }
        out
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }
}
