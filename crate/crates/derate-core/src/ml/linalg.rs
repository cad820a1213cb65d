//! Just enough dense linear algebra for the model families: a row-major
//! matrix, symmetric solves (Cholesky with an LDL fallback for indefinite
//! systems) and a partially pivoted LU for the normal equations.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds from row slices; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Matrix {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1))
    }

    /// `AᵀA`, the Gram matrix of the columns.
    pub fn xtx(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.cols);
        for row in self.row_iter() {
            for i in 0..self.cols {
                if row[i] == 0.0 {
                    continue;
                }
                for j in i..self.cols {
                    out.data[i * self.cols + j] += row[i] * row[j];
                }
            }
        }
        for i in 0..self.cols {
            for j in 0..i {
                out.data[i * self.cols + j] = out.data[j * self.cols + i];
            }
        }
        out
    }

    /// `Aᵀy`.
    pub fn xty(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (row, &yi) in self.row_iter().zip(y) {
            for (o, &x) in out.iter_mut().zip(row) {
                *o += x * yi;
            }
        }
        out
    }

    /// `Av`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        self.row_iter()
            .map(|row| dot(row, v))
            .collect()
    }

    pub fn add_to_diagonal(&mut self, value: f64) {
        assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            self.data[i * self.cols + i] += value;
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `Ax = b` for symmetric positive definite `A`. Returns `None` when
/// a pivot is not strictly positive.
pub fn cholesky_solve(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    let mut l = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    // forward then back substitution
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= l[i * n + k] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            x[i] -= l[k * n + i] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    Some(x)
}

/// Solves `Ax = b` for symmetric (possibly indefinite) `A` via an LDLᵀ
/// factorisation without pivoting. Returns `None` on a vanishing pivot.
pub fn ldl_solve(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    let scale = (0..n)
        .map(|i| a.get(i, i).abs())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let mut l = vec![0.0f64; n * n];
    let mut d = vec![0.0f64; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k] * d[k];
            }
            if i == j {
                if !sum.is_finite() || sum.abs() <= scale * 1e-14 {
                    return None;
                }
                d[i] = sum;
                l[i * n + i] = 1.0;
            } else {
                l[i * n + j] = sum / d[j];
            }
        }
    }
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= l[i * n + k] * x[k];
        }
    }
    for i in 0..n {
        x[i] /= d[i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            x[i] -= l[k * n + i] * x[k];
        }
    }
    Some(x)
}

/// Solves `Ax = b` by LU with partial pivoting. Returns `None` when the
/// matrix is numerically singular.
pub fn lu_solve(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut m = a.data.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&p, &q| {
                m[p * n + col]
                    .abs()
                    .partial_cmp(&m[q * n + col].abs())
                    .unwrap()
            })
            .unwrap();
        if m[pivot_row * n + col].abs() <= scale * 1e-13 {
            return None;
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap(col * n + k, pivot_row * n + k);
            }
            x.swap(col, pivot_row);
        }
        let pivot = m[col * n + col];
        for row in col + 1..n {
            let factor = m[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[row * n + k] -= factor * m[col * n + k];
            }
            x[row] -= factor * x[col];
        }
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            x[i] -= m[i * n + k] * x[k];
        }
        x[i] /= m[i * n + i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd3() -> Matrix {
        Matrix::from_rows(&[
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, -0.5],
            vec![0.5, -0.5, 2.0],
        ])
    }

    fn residual(a: &Matrix, x: &[f64], b: &[f64]) -> f64 {
        a.matvec(x)
            .iter()
            .zip(b)
            .map(|(ax, bi)| (ax - bi).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn cholesky_solves_spd_systems() {
        let a = spd3();
        let b = [1.0, -2.0, 0.25];
        let x = cholesky_solve(&a, &b).unwrap();
        assert!(residual(&a, &x, &b) < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite_matrices() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(cholesky_solve(&a, &[1.0, 1.0]).is_none());
    }

    #[test]
    fn ldl_handles_indefinite_symmetric_systems() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        let b = [3.0, 3.0];
        let x = ldl_solve(&a, &b).unwrap();
        assert!(residual(&a, &x, &b) < 1e-12);
    }

    #[test]
    fn lu_agrees_with_cholesky_and_flags_singularity() {
        let a = spd3();
        let b = [0.5, 4.0, -1.0];
        let lu = lu_solve(&a, &b).unwrap();
        let ch = cholesky_solve(&a, &b).unwrap();
        for (p, q) in lu.iter().zip(&ch) {
            assert!((p - q).abs() < 1e-12);
        }
        let singular = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(lu_solve(&singular, &[1.0, 1.0]).is_none());
        assert!(ldl_solve(&singular, &[1.0, 1.0]).is_none());
    }

    #[test]
    fn gram_and_matvec_shapes() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
        let g = x.xtx();
        assert_eq!((g.rows(), g.cols()), (2, 2));
        assert_eq!(g.get(0, 0), 35.0);
        assert_eq!(g.get(0, 1), 44.0);
        assert_eq!(g.get(1, 0), 44.0);
        assert_eq!(g.get(1, 1), 56.0);
        assert_eq!(x.xty(&[1.0, 1.0, 1.0]), vec![9.0, 12.0]);
        assert_eq!(x.matvec(&[1.0, -1.0]), vec![-1.0, -1.0, -1.0]);
    }
}
