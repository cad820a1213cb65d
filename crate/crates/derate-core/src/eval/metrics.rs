//! Prediction quality scores.

use serde::{Deserialize, Serialize};

use super::EvalError;

/// The five report scores. `ev` and `r2` use the population variance of the
/// true targets; they differ exactly by `mean(error)² / var(y_true)`, so
/// `ev >= r2` always.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub mae: f64,
    pub max: f64,
    pub rmse: f64,
    pub ev: f64,
    pub r2: f64,
}

pub fn metrics(y_true: &[f64], y_pred: &[f64]) -> Result<Scores, EvalError> {
    if y_true.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch {
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    let n = y_true.len() as f64;
    let lo = y_true.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = y_true.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Err(EvalError::DegenerateTargets);
    }

    let errors: Vec<f64> = y_true.iter().zip(y_pred).map(|(t, p)| t - p).collect();
    let mae = errors.iter().map(|e| e.abs()).sum::<f64>() / n;
    let max = errors.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let sse: f64 = errors.iter().map(|e| e * e).sum();
    let rmse = (sse / n).sqrt();

    let y_mean = y_true.iter().sum::<f64>() / n;
    let var_y = y_true.iter().map(|y| (y - y_mean) * (y - y_mean)).sum::<f64>() / n;
    let e_mean = errors.iter().sum::<f64>() / n;
    let var_e = errors.iter().map(|e| (e - e_mean) * (e - e_mean)).sum::<f64>() / n;

    Ok(Scores {
        mae,
        max,
        rmse,
        ev: 1.0 - var_e / var_y,
        r2: 1.0 - sse / (var_y * n),
    })
}
