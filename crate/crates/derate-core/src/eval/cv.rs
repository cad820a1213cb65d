//! Monte-Carlo cross validation.
//!
//! Each fold draws an independent permutation of the row indices from its own
//! RNG stream, so fold `f` of a given plan is the same set of rows no matter
//! how many folds run or in which order.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ml::{fit, Dataset, ModelSpec};
use crate::rng::{shuffle, stream_rng, STREAM_CV};

use super::metrics::{metrics, Scores};
use super::EvalError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvPlan {
    pub folds: u32,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for CvPlan {
    fn default() -> Self {
        CvPlan {
            folds: 10,
            train_fraction: 0.5,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FoldOutcome {
    pub fold: u32,
    pub train: Scores,
    pub test: Scores,
    pub fit_time_s: f64,
    pub predict_time_s: f64,
}

#[derive(Clone, Debug)]
pub struct CvOutcome {
    pub folds: Vec<FoldOutcome>,
    pub mean_train_r2: f64,
    pub mean_test_r2: f64,
    pub mean_fit_time_s: f64,
    pub mean_predict_time_s: f64,
}

/// Returns the (train, test) row indices for one fold. Train rows are the
/// first `ceil(n * train_fraction)` entries of the fold's permutation, test
/// rows are the remainder; both keep permutation order.
pub fn fold_split(n: usize, plan: &CvPlan, fold: u32) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    if !(plan.train_fraction > 0.0 && plan.train_fraction < 1.0) {
        return Err(EvalError::BadFraction {
            value: plan.train_fraction,
        });
    }
    if n < 2 {
        return Err(EvalError::TooFewRows { needed: 2, got: n });
    }
    let n_train = ((n as f64) * plan.train_fraction).ceil() as usize;
    if n_train == 0 || n_train >= n {
        return Err(EvalError::TooFewRows { needed: n_train + 1, got: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = stream_rng(plan.seed, STREAM_CV, fold as u64);
    shuffle(&mut rng, &mut order);
    let test = order.split_off(n_train);
    Ok((order, test))
}

pub fn cv_evaluate(spec: &ModelSpec, data: &Dataset, plan: &CvPlan) -> Result<CvOutcome, EvalError> {
    if plan.folds == 0 {
        return Err(EvalError::EmptyInput);
    }
    let mut folds = Vec::with_capacity(plan.folds as usize);
    for fold in 0..plan.folds {
        let (train_idx, test_idx) = fold_split(data.n(), plan, fold)?;
        let train = data.subset(&train_idx);
        let test = data.subset(&test_idx);

        let t0 = Instant::now();
        let model = fit(spec, &train)?;
        let fit_time_s = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let train_pred = model.predict(train.x())?;
        let test_pred = model.predict(test.x())?;
        let predict_time_s = t1.elapsed().as_secs_f64();

        folds.push(FoldOutcome {
            fold,
            train: metrics(train.y(), &train_pred)?,
            test: metrics(test.y(), &test_pred)?,
            fit_time_s,
            predict_time_s,
        });
    }
    let k = folds.len() as f64;
    Ok(CvOutcome {
        mean_train_r2: folds.iter().map(|f| f.train.r2).sum::<f64>() / k,
        mean_test_r2: folds.iter().map(|f| f.test.r2).sum::<f64>() / k,
        mean_fit_time_s: folds.iter().map(|f| f.fit_time_s).sum::<f64>() / k,
        mean_predict_time_s: folds.iter().map(|f| f.predict_time_s).sum::<f64>() / k,
        folds,
    })
}
