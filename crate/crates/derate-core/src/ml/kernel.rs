//! Kernel functions shared by kernel ridge and support vector regression.

use serde::{Deserialize, Serialize};

use super::linalg::{dot, Matrix};
use super::MlError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    Linear,
    Polynomial { gamma: f64, coef0: f64, degree: u32 },
    Rbf { gamma: f64 },
    Sigmoid { gamma: f64, coef0: f64 },
}

impl KernelKind {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            KernelKind::Linear => dot(a, b),
            KernelKind::Polynomial {
                gamma,
                coef0,
                degree,
            } => (gamma * dot(a, b) + coef0).powi(degree as i32),
            KernelKind::Rbf { gamma } => {
                let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * sq).exp()
            }
            KernelKind::Sigmoid { gamma, coef0 } => (gamma * dot(a, b) + coef0).tanh(),
        }
    }

    pub fn validate(&self) -> Result<(), MlError> {
        let gamma_ok = |gamma: f64| -> Result<(), MlError> {
            if gamma.is_finite() && gamma > 0.0 {
                Ok(())
            } else {
                Err(MlError::InvalidHyperparameter(format!(
                    "gamma must be positive and finite, got {gamma}"
                )))
            }
        };
        let coef0_ok = |coef0: f64| -> Result<(), MlError> {
            if coef0.is_finite() {
                Ok(())
            } else {
                Err(MlError::InvalidHyperparameter("coef0 must be finite".into()))
            }
        };
        match *self {
            KernelKind::Linear => Ok(()),
            KernelKind::Polynomial {
                gamma,
                coef0,
                degree,
            } => {
                gamma_ok(gamma)?;
                coef0_ok(coef0)?;
                if degree < 1 {
                    return Err(MlError::InvalidHyperparameter(
                        "polynomial degree must be at least 1".into(),
                    ));
                }
                Ok(())
            }
            KernelKind::Rbf { gamma } => gamma_ok(gamma),
            KernelKind::Sigmoid { gamma, coef0 } => {
                gamma_ok(gamma)?;
                coef0_ok(coef0)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Linear => "linear",
            KernelKind::Polynomial { .. } => "polynomial",
            KernelKind::Rbf { .. } => "rbf",
            KernelKind::Sigmoid { .. } => "sigmoid",
        }
    }
}

/// Pairwise kernel values, `out[i][j] = k(a_i, b_j)`.
pub fn kernel_matrix(kernel: &KernelKind, a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.rows(), b.rows());
    for (i, ra) in a.row_iter().enumerate() {
        for (j, rb) in b.row_iter().enumerate() {
            out.set(i, j, kernel.eval(ra, rb));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_kernel_values() {
        let a = [1.0, 2.0];
        let b = [0.5, -1.0];
        assert_eq!(KernelKind::Linear.eval(&a, &b), -1.5);
        let poly = KernelKind::Polynomial {
            gamma: 2.0,
            coef0: 1.0,
            degree: 2,
        };
        assert_eq!(poly.eval(&a, &b), 4.0); // (2*-1.5 + 1)^2
        let rbf = KernelKind::Rbf { gamma: 0.5 };
        assert!((rbf.eval(&a, &b) - (-0.5f64 * 9.25).exp()).abs() < 1e-15);
        assert_eq!(rbf.eval(&a, &a), 1.0);
        let sig = KernelKind::Sigmoid {
            gamma: 1.0,
            coef0: 0.5,
        };
        assert!((sig.eval(&a, &b) - (-1.0f64).tanh()).abs() < 1e-15);
    }

    #[test]
    fn kernel_matrices_are_symmetric_on_shared_inputs() {
        let x = Matrix::from_rows(&[
            vec![0.1, 0.9, -0.4],
            vec![1.4, -0.2, 0.3],
            vec![-0.7, 0.8, 1.1],
        ]);
        for kernel in [
            KernelKind::Linear,
            KernelKind::Polynomial {
                gamma: 0.7,
                coef0: -0.3,
                degree: 3,
            },
            KernelKind::Rbf { gamma: 1.3 },
            KernelKind::Sigmoid {
                gamma: 0.4,
                coef0: 0.2,
            },
        ] {
            let k = kernel_matrix(&kernel, &x, &x);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((k.get(i, j) - k.get(j, i)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(KernelKind::Rbf { gamma: -1.0 }.validate().is_err());
        assert!(KernelKind::Rbf { gamma: f64::NAN }.validate().is_err());
        assert!(KernelKind::Polynomial {
            gamma: 1.0,
            coef0: 0.0,
            degree: 0
        }
        .validate()
        .is_err());
        assert!(KernelKind::Sigmoid {
            gamma: 1.0,
            coef0: f64::INFINITY
        }
        .validate()
        .is_err());
        assert!(KernelKind::Linear.validate().is_ok());
    }
}
