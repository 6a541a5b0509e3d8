use num_complex::Complex64;

use super::LinearOperator;
use crate::error::{Error, Result};
use crate::problem::Point;

/// Real dense matrix in row-major order acting on complex vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    norm: f64,
}

/// Safety factor applied to the power-iteration estimate.
const NORM_MARGIN: f64 = 1.001;

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} entries for a {rows}×{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        let mut m = DenseMatrix { rows, cols, data, norm: 0.0 };
        m.norm = m.estimate_norm() * NORM_MARGIN;
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Copy with an extra all-ones column on the right.
    pub fn with_ones_column(&self) -> Result<Self> {
        let mut data = Vec::with_capacity(self.rows * (self.cols + 1));
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.push(1.0);
        }
        DenseMatrix::from_row_major(self.rows, self.cols + 1, data)
    }

    /// Largest singular value by power iteration on `AᵀA`.
    fn estimate_norm(&self) -> f64 {
        let n = self.cols;
        // Deterministic start with no special alignment to the axes.
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 101) as f64 / 101.0).collect();
        let mut sigma = 0.0;
        for _ in 0..5000 {
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nv == 0.0 {
                return 0.0;
            }
            v.iter_mut().for_each(|x| *x /= nv);
            let av: Vec<f64> = (0..self.rows).map(|r| self.row(r).iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
            let mut w = vec![0.0; n];
            for (r, &s) in av.iter().enumerate() {
                for (wc, a) in w.iter_mut().zip(self.row(r)) {
                    *wc += a * s;
                }
            }
            let next = w.iter().map(|x| x * x).sum::<f64>().sqrt().sqrt();
            let done = (next - sigma).abs() <= 1e-13 * next;
            sigma = next;
            v = w;
            if done {
                break;
            }
        }
        sigma
    }
}

impl LinearOperator for DenseMatrix {
    fn in_dim(&self) -> usize {
        self.cols
    }

    fn out_dim(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &[Complex64]) -> Point {
        assert_eq!(x.len(), self.cols, "dense apply: dimension mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + b * *a))
            .collect()
    }

    fn adjoint(&self, y: &[Complex64]) -> Point {
        assert_eq!(y.len(), self.rows, "dense adjoint: dimension mismatch");
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (r, yr) in y.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += yr * *a;
            }
        }
        out
    }

    fn norm_bound(&self) -> f64 {
        self.norm
    }
}

/// `I` on `Cⁿ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IdentityOperator {
    pub n: usize,
}

impl LinearOperator for IdentityOperator {
    fn in_dim(&self) -> usize {
        self.n
    }

    fn out_dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[Complex64]) -> Point {
        x.to_vec()
    }

    fn adjoint(&self, y: &[Complex64]) -> Point {
        y.to_vec()
    }

    fn norm_bound(&self) -> f64 {
        1.0
    }

    fn row_orthonormal_constant(&self) -> Option<f64> {
        Some(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_of_diagonal() {
        let m = DenseMatrix::from_row_major(2, 2, vec![3.0, 0.0, 0.0, -5.0]).unwrap();
        assert!(m.norm_bound() >= 5.0 && m.norm_bound() <= 5.0 * 1.002);
    }

    #[test]
    fn ones_column_appended() {
        let m = DenseMatrix::from_row_major(2, 1, vec![2.0, 3.0]).unwrap().with_ones_column().unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 2));
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(1, 0), 3.0);
    }

    #[test]
    fn shape_validation() {
        assert!(DenseMatrix::from_row_major(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::from_row_major(0, 2, vec![]).is_err());
    }
}
