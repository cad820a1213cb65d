//! Model evaluation: scoring metrics, Monte-Carlo cross validation,
//! hyperparameter search, and learning curves.

pub mod curve;
pub mod cv;
pub mod metrics;
pub mod tune;

pub use curve::{curve_csv, learning_curve, CurvePoint};
pub use cv::{cv_evaluate, fold_split, CvOutcome, CvPlan, FoldOutcome};
pub use metrics::{metrics, Scores};
pub use tune::{
    build_spec, default_space, default_spec, tune, Domain, KernelFamily, ModelId, ParamValue,
    SearchPlan, SearchSpace, Stage, TrialRecord, TuneOutcome,
};

use thiserror::Error;

use crate::ml::MlError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty input")]
    EmptyInput,
    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("target vector is constant; explained variance and r2 are undefined")]
    DegenerateTargets,
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("train fraction must be in (0, 1), got {value}")]
    BadFraction { value: f64 },
    #[error("bad search space: {0}")]
    BadSearchSpace(String),
    #[error("no trial produced a finite score")]
    NoScoredTrials,
    #[error(transparent)]
    Model(#[from] MlError),
}
