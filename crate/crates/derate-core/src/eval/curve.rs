//! Learning curves: cross-validated scores as the training fraction grows.

use crate::ml::{Dataset, ModelSpec};

use super::cv::{cv_evaluate, CvPlan};
use super::EvalError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    /// Training fraction, not a row count.
    pub train_size: f64,
    pub train_mean: f64,
    pub train_std: f64,
    pub test_mean: f64,
    pub test_std: f64,
    pub fit_time_mean: f64,
    pub fit_time_std: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Runs the full CV plan once per training fraction. The fold permutations
/// depend only on (seed, fold), so larger fractions extend smaller ones
/// instead of reshuffling.
pub fn learning_curve(
    spec: &ModelSpec,
    data: &Dataset,
    sizes: &[f64],
    plan: &CvPlan,
) -> Result<Vec<CurvePoint>, EvalError> {
    if sizes.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut points = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let step = CvPlan { train_fraction: size, ..*plan };
        let out = cv_evaluate(spec, data, &step)?;
        let train: Vec<f64> = out.folds.iter().map(|f| f.train.r2).collect();
        let test: Vec<f64> = out.folds.iter().map(|f| f.test.r2).collect();
        let fit: Vec<f64> = out.folds.iter().map(|f| f.fit_time_s).collect();
        let (train_mean, train_std) = mean_std(&train);
        let (test_mean, test_std) = mean_std(&test);
        let (fit_time_mean, fit_time_std) = mean_std(&fit);
        points.push(CurvePoint {
            train_size: size,
            train_mean,
            train_std,
            test_mean,
            test_std,
            fit_time_mean,
            fit_time_std,
        });
    }
    Ok(points)
}

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("train size,train mean,train std,test mean,test std,fit time mean,fit time std\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.train_size, p.train_mean, p.train_std, p.test_mean, p.test_std, p.fit_time_mean, p.fit_time_std
        ));
    }
    out
}
