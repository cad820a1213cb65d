//! Ordinary least squares via the normal equations.

use super::linalg::{lu_solve, Matrix};
use super::MlError;

/// Fits `y ≈ Xw + b` on standardized features. Returns `(weights, bias)`.
///
/// The normal matrix of a standardized design is usually well conditioned;
/// when it is singular anyway (duplicated or constant columns), an
/// escalating ridge jitter is added to the diagonal until the solve
/// succeeds.
pub fn fit(z: &Matrix, y: &[f64]) -> Result<(Vec<f64>, f64), MlError> {
    let n = z.rows();
    let d = z.cols();
    // augmented design [Z | 1] folds the intercept into the same solve
    let mut gram = Matrix::zeros(d + 1, d + 1);
    {
        let base = z.xtx();
        for i in 0..d {
            for j in 0..d {
                gram.set(i, j, base.get(i, j));
            }
        }
        let mut col_sums = vec![0.0; d];
        for row in z.row_iter() {
            for (s, &v) in col_sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        for (i, &s) in col_sums.iter().enumerate() {
            gram.set(i, d, s);
            gram.set(d, i, s);
        }
        gram.set(d, d, n as f64);
    }
    let mut rhs = z.xty(y);
    rhs.push(y.iter().sum());

    let mut jitter = 0.0;
    loop {
        let mut attempt = gram.clone();
        if jitter > 0.0 {
            attempt.add_to_diagonal(jitter);
        }
        if let Some(mut solution) = lu_solve(&attempt, &rhs) {
            let bias = solution.pop().unwrap();
            return Ok((solution, bias));
        }
        jitter = if jitter == 0.0 { 1e-12 } else { jitter * 1e3 };
        if jitter > 1.0 {
            return Err(MlError::SingularSystem);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_linear_coefficients() {
        let z = Matrix::from_rows(&[
            vec![1.0, -1.0],
            vec![-1.0, 0.5],
            vec![0.25, 1.5],
            vec![-0.25, -1.0],
        ]);
        let y: Vec<f64> = z.row_iter().map(|r| 0.3 + 2.0 * r[0] - 0.5 * r[1]).collect();
        let (w, b) = fit(&z, &y).unwrap();
        assert!((w[0] - 2.0).abs() < 1e-10);
        assert!((w[1] + 0.5).abs() < 1e-10);
        assert!((b - 0.3).abs() < 1e-10);
    }

    #[test]
    fn minimises_squared_error_for_overdetermined_systems() {
        let z = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = [0.0, 0.9, 2.1, 3.0];
        let (w, b) = fit(&z, &y).unwrap();
        // residuals must be orthogonal to the design and to the intercept
        let mut dot_x = 0.0;
        let mut sum_r = 0.0;
        for (row, &yi) in z.row_iter().zip(&y) {
            let r = yi - (w[0] * row[0] + b);
            dot_x += r * row[0];
            sum_r += r;
        }
        assert!(dot_x.abs() < 1e-10);
        assert!(sum_r.abs() < 1e-10);
    }

    #[test]
    fn duplicated_columns_fall_back_to_jitter() {
        let z = Matrix::from_rows(&[
            vec![1.0, 1.0],
            vec![2.0, 2.0],
            vec![3.0, 3.0],
        ]);
        let y = [1.0, 2.0, 3.0];
        let (w, b) = fit(&z, &y).unwrap();
        // the jittered solution splits the weight across the twin columns
        for (row, &yi) in z.row_iter().zip(&y) {
            let pred = w[0] * row[0] + w[1] * row[1] + b;
            assert!((pred - yi).abs() < 1e-5);
        }
    }
}
