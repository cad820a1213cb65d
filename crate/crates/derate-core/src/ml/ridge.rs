//! Kernel ridge regression. The targets are centred, then `(K + αI) c = y − ȳ`
//! is solved on the training kernel matrix; predictions are
//! `f(x) = Σ cᵢ k(xᵢ, x) + ȳ`. Centring matters for kernels whose span does
//! not contain the constant function (the linear kernel on standardized
//! features in particular).

use super::kernel::{kernel_matrix, KernelKind};
use super::linalg::{cholesky_solve, ldl_solve, Matrix};
use super::MlError;

pub fn fit(
    z: &Matrix,
    y: &[f64],
    alpha: f64,
    kernel: &KernelKind,
) -> Result<(Vec<f64>, f64), MlError> {
    let intercept = y.iter().sum::<f64>() / y.len() as f64;
    let centered: Vec<f64> = y.iter().map(|v| v - intercept).collect();
    let mut k = kernel_matrix(kernel, z, z);
    k.add_to_diagonal(alpha);
    // sigmoid kernels are not positive semi-definite, so keep an indefinite
    // solver behind the fast path
    let coef = cholesky_solve(&k, &centered)
        .or_else(|| ldl_solve(&k, &centered))
        .ok_or(MlError::SingularSystem)?;
    Ok((coef, intercept))
}
