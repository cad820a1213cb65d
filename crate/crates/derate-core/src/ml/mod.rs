//! Regression model families, written out in full rather than wrapped from
//! an ML crate so their numerics can be pinned down and cross-checked
//! against independent oracles.
//!
//! Every family trains on standardized features (per-column mean removal and
//! unit variance, fitted on the training rows only) and clips predictions to
//! the valid de-rating range `[0, 1]` at prediction time. The standardizer
//! travels with the trained model, so callers always pass raw feature rows.

pub mod kernel;
pub mod knn;
pub mod linalg;
pub mod ols;
pub mod ridge;
pub mod standardize;
pub mod svr;
pub mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use kernel::KernelKind;
pub use linalg::Matrix;
pub use standardize::Standardizer;
pub use svr::{SvrDiagnostics, SvrSolution};
pub use tree::TreeLimits;

#[derive(Debug, Error)]
pub enum MlError {
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("{what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("k = {k} exceeds the {n} training rows")]
    KTooLarge { k: usize, n: usize },
    #[error("linear system is singular beyond recovery")]
    SingularSystem,
    #[error("model file schema version {0} is not supported")]
    SchemaVersion(u32),
    #[error("model file is not valid: {0}")]
    Decode(#[from] serde_json::Error),
}

/// Feature matrix, targets and row identities (flip-flop names).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    x: Matrix,
    y: Vec<f64>,
    ids: Vec<String>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<f64>, ids: Vec<String>) -> Result<Dataset, MlError> {
        if x.rows() == 0 {
            return Err(MlError::EmptyDataset);
        }
        if y.len() != x.rows() {
            return Err(MlError::LengthMismatch {
                what: "targets",
                expected: x.rows(),
                got: y.len(),
            });
        }
        if ids.len() != x.rows() {
            return Err(MlError::LengthMismatch {
                what: "row ids",
                expected: x.rows(),
                got: ids.len(),
            });
        }
        Ok(Dataset { x, y, ids })
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let x = Matrix::from_rows(
            &rows
                .iter()
                .map(|&r| self.x.row(r).to_vec())
                .collect::<Vec<_>>(),
        );
        Dataset {
            x,
            y: rows.iter().map(|&r| self.y[r]).collect(),
            ids: rows.iter().map(|&r| self.ids[r].clone()).collect(),
        }
    }
}

/// Distance used by the k-NN model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Manhattan,
    Euclidean,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// A model family plus its hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    LeastSquares,
    Knn { k: usize, metric: Metric },
    Tree { limits: TreeLimits },
    KernelRidge { alpha: f64, kernel: KernelKind },
    Svr { c: f64, epsilon: f64, kernel: KernelKind },
}

impl ModelSpec {
    pub fn validate(&self, n_train: usize) -> Result<(), MlError> {
        let positive = |name: &str, v: f64| -> Result<(), MlError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(MlError::InvalidHyperparameter(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        match self {
            ModelSpec::LeastSquares | ModelSpec::Tree { .. } => Ok(()),
            ModelSpec::Knn { k, .. } => {
                if *k == 0 {
                    return Err(MlError::InvalidHyperparameter("k must be at least 1".into()));
                }
                if *k > n_train {
                    return Err(MlError::KTooLarge {
                        k: *k,
                        n: n_train,
                    });
                }
                Ok(())
            }
            ModelSpec::KernelRidge { alpha, kernel } => {
                if !alpha.is_finite() || *alpha < 0.0 {
                    return Err(MlError::InvalidHyperparameter(format!(
                        "alpha must be non-negative and finite, got {alpha}"
                    )));
                }
                kernel.validate()
            }
            ModelSpec::Svr { c, epsilon, kernel } => {
                positive("C", *c)?;
                if !epsilon.is_finite() || *epsilon < 0.0 {
                    return Err(MlError::InvalidHyperparameter(format!(
                        "epsilon must be non-negative and finite, got {epsilon}"
                    )));
                }
                kernel.validate()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum FitState {
    Linear {
        weights: Vec<f64>,
        bias: f64,
    },
    Knn {
        x: Matrix,
        y: Vec<f64>,
    },
    Tree {
        tree: tree::Tree,
    },
    KernelRidge {
        x: Matrix,
        coef: Vec<f64>,
        intercept: f64,
    },
    Svr {
        support_x: Matrix,
        support_coef: Vec<f64>,
        bias: f64,
        diagnostics: SvrDiagnostics,
    },
}

/// A fitted model: hyperparameters, the training standardizer, the fitted
/// parameters and the prediction clip range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    spec: ModelSpec,
    standardizer: Standardizer,
    clip: (f64, f64),
    fit: FitState,
}

const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SavedModel {
    schema_version: u32,
    model: TrainedModel,
}

pub fn fit(spec: &ModelSpec, train: &Dataset) -> Result<TrainedModel, MlError> {
    spec.validate(train.n())?;
    let standardizer = Standardizer::fit(train.x());
    let z = standardizer.transform(train.x());
    let fit = match spec {
        ModelSpec::LeastSquares => {
            let (weights, bias) = ols::fit(&z, train.y())?;
            FitState::Linear { weights, bias }
        }
        ModelSpec::Knn { .. } => FitState::Knn {
            x: z,
            y: train.y().to_vec(),
        },
        ModelSpec::Tree { limits } => FitState::Tree {
            tree: tree::grow(&z, train.y(), *limits),
        },
        ModelSpec::KernelRidge { alpha, kernel } => {
            let (coef, intercept) = ridge::fit(&z, train.y(), *alpha, kernel)?;
            FitState::KernelRidge { x: z, coef, intercept }
        }
        ModelSpec::Svr { c, epsilon, kernel } => {
            let (support_x, support_coef, bias, diagnostics) =
                svr::fit(&z, train.y(), *c, *epsilon, kernel);
            FitState::Svr {
                support_x,
                support_coef,
                bias,
                diagnostics,
            }
        }
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        standardizer,
        clip: (0.0, 1.0),
        fit,
    })
}

impl TrainedModel {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    pub fn svr_diagnostics(&self) -> Option<&SvrDiagnostics> {
        match &self.fit {
            FitState::Svr { diagnostics, .. } => Some(diagnostics),
            _ => None,
        }
    }

    /// Predictions clipped to the valid target range.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>, MlError> {
        let (lo, hi) = self.clip;
        Ok(self
            .predict_raw(x)?
            .into_iter()
            .map(|v| v.clamp(lo, hi))
            .collect())
    }

    /// Unclipped model output, mostly useful for diagnostics and tests.
    pub fn predict_raw(&self, x: &Matrix) -> Result<Vec<f64>, MlError> {
        if x.cols() != self.standardizer.width() {
            return Err(MlError::LengthMismatch {
                what: "feature columns",
                expected: self.standardizer.width(),
                got: x.cols(),
            });
        }
        let z = self.standardizer.transform(x);
        let out = match (&self.fit, &self.spec) {
            (FitState::Linear { weights, bias }, _) => z
                .row_iter()
                .map(|row| linalg::dot(row, weights) + bias)
                .collect(),
            (FitState::Knn { x, y }, ModelSpec::Knn { k, metric }) => z
                .row_iter()
                .map(|row| knn::predict_one(x, y, *k, *metric, row))
                .collect(),
            (FitState::Tree { tree }, _) => z.row_iter().map(|row| tree.predict_one(row)).collect(),
            (
                FitState::KernelRidge { x, coef, intercept },
                ModelSpec::KernelRidge { kernel, .. },
            ) => z
                .row_iter()
                .map(|row| {
                    x.row_iter()
                        .zip(coef)
                        .map(|(xi, &ci)| ci * kernel.eval(xi, row))
                        .sum::<f64>()
                        + intercept
                })
                .collect(),
            (
                FitState::Svr {
                    support_x,
                    support_coef,
                    bias,
                    ..
                },
                ModelSpec::Svr { kernel, .. },
            ) => z
                .row_iter()
                .map(|row| {
                    support_x
                        .row_iter()
                        .zip(support_coef)
                        .map(|(xi, &ci)| ci * kernel.eval(xi, row))
                        .sum::<f64>()
                        + bias
                })
                .collect(),
            _ => unreachable!("fit state always matches the model family"),
        };
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SavedModel {
            schema_version: MODEL_SCHEMA_VERSION,
            model: self.clone(),
        })
        .expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<TrainedModel, MlError> {
        let saved: SavedModel = serde_json::from_str(text)?;
        if saved.schema_version != MODEL_SCHEMA_VERSION {
            return Err(MlError::SchemaVersion(saved.schema_version));
        }
        Ok(saved.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_dataset() -> Dataset {
        // y = 0.1 + 0.2*x0 - 0.05*x1, well inside the clip range
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![f64::from(i), f64::from((i * 7) % 5)])
            .collect();
        let y: Vec<f64> = rows.iter().map(|r| 0.1 + 0.02 * r[0] - 0.005 * r[1]).collect();
        let ids = (0..12).map(|i| format!("ff{i}")).collect();
        Dataset::new(Matrix::from_rows(&rows), y, ids).unwrap()
    }

    #[test]
    fn dataset_shape_is_validated() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0]]);
        assert!(matches!(
            Dataset::new(x.clone(), vec![1.0], vec!["a".into(), "b".into()]),
            Err(MlError::LengthMismatch { what: "targets", .. })
        ));
        assert!(matches!(
            Dataset::new(Matrix::zeros(0, 3), vec![], vec![]),
            Err(MlError::EmptyDataset)
        ));
        let ds = Dataset::new(x, vec![1.0, 2.0], vec!["a".into(), "b".into()]).unwrap();
        let sub = ds.subset(&[1]);
        assert_eq!(sub.n(), 1);
        assert_eq!(sub.y(), [2.0]);
        assert_eq!(sub.ids(), ["b".to_string()]);
    }

    #[test]
    fn every_family_fits_and_predicts_in_range() {
        let ds = toy_dataset();
        let specs = [
            ModelSpec::LeastSquares,
            ModelSpec::Knn {
                k: 3,
                metric: Metric::Manhattan,
            },
            ModelSpec::Tree {
                limits: TreeLimits::default(),
            },
            ModelSpec::KernelRidge {
                alpha: 1e-3,
                kernel: KernelKind::Rbf { gamma: 0.5 },
            },
            ModelSpec::Svr {
                c: 10.0,
                epsilon: 0.01,
                kernel: KernelKind::Linear,
            },
        ];
        for spec in &specs {
            let model = fit(spec, &ds).unwrap();
            let preds = model.predict(ds.x()).unwrap();
            assert_eq!(preds.len(), ds.n());
            assert!(preds.iter().all(|p| (0.0..=1.0).contains(p)), "{spec:?}");
        }
    }

    #[test]
    fn predictions_are_clipped_to_the_target_range() {
        // Steep line pushes raw predictions outside [0, 1] at the ends.
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![f64::from(i)]).collect();
        let y: Vec<f64> = rows.iter().map(|r| -1.0 + 0.4 * r[0]).collect();
        let ids = (0..8).map(|i| format!("ff{i}")).collect();
        let ds = Dataset::new(Matrix::from_rows(&rows), y, ids).unwrap();
        let model = fit(&ModelSpec::LeastSquares, &ds).unwrap();
        let raw = model.predict_raw(ds.x()).unwrap();
        let clipped = model.predict(ds.x()).unwrap();
        assert!(raw.iter().any(|&v| v < 0.0));
        assert!(raw.iter().any(|&v| v > 1.0));
        assert!(clipped.iter().all(|p| (0.0..=1.0).contains(p)));
        assert_eq!(clipped[0], 0.0);
        assert_eq!(clipped[7], 1.0);
    }

    #[test]
    fn hyperparameters_are_validated() {
        let ds = toy_dataset();
        let bad = [
            ModelSpec::Knn {
                k: 0,
                metric: Metric::Euclidean,
            },
            ModelSpec::Knn {
                k: 13,
                metric: Metric::Euclidean,
            },
            ModelSpec::KernelRidge {
                alpha: -1.0,
                kernel: KernelKind::Linear,
            },
            ModelSpec::KernelRidge {
                alpha: 1.0,
                kernel: KernelKind::Rbf { gamma: 0.0 },
            },
            ModelSpec::Svr {
                c: 0.0,
                epsilon: 0.1,
                kernel: KernelKind::Linear,
            },
            ModelSpec::Svr {
                c: 1.0,
                epsilon: -0.1,
                kernel: KernelKind::Linear,
            },
        ];
        for spec in &bad {
            assert!(fit(spec, &ds).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn feature_width_mismatch_is_reported() {
        let ds = toy_dataset();
        let model = fit(&ModelSpec::LeastSquares, &ds).unwrap();
        let narrow = Matrix::from_rows(&[vec![1.0]]);
        assert!(matches!(
            model.predict(&narrow),
            Err(MlError::LengthMismatch {
                what: "feature columns",
                ..
            })
        ));
    }

    #[test]
    fn model_json_round_trips() {
        let ds = toy_dataset();
        for spec in [
            ModelSpec::LeastSquares,
            ModelSpec::Knn {
                k: 2,
                metric: Metric::Euclidean,
            },
            ModelSpec::Tree {
                limits: TreeLimits {
                    max_depth: 3,
                    max_leaf_nodes: 0,
                    min_samples_leaf: 1,
                },
            },
            ModelSpec::KernelRidge {
                alpha: 0.1,
                kernel: KernelKind::Polynomial {
                    gamma: 0.2,
                    coef0: 1.0,
                    degree: 2,
                },
            },
            ModelSpec::Svr {
                c: 2.0,
                epsilon: 0.05,
                kernel: KernelKind::Sigmoid {
                    gamma: 0.1,
                    coef0: -0.2,
                },
            },
        ] {
            let model = fit(&spec, &ds).unwrap();
            let json = model.to_json();
            let loaded = TrainedModel::from_json(&json).unwrap();
            assert_eq!(model, loaded);
            assert_eq!(
                model.predict(ds.x()).unwrap(),
                loaded.predict(ds.x()).unwrap()
            );
        }
        let json = fit(&ModelSpec::LeastSquares, &ds).unwrap().to_json();
        let bumped = json.replace("\"schema_version\": 1", "\"schema_version\": 99");
        assert!(matches!(
            TrainedModel::from_json(&bumped),
            Err(MlError::SchemaVersion(99))
        ));
    }
}
