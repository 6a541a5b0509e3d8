use num_complex::Complex64;

use super::LinearOperator;
use crate::problem::Point;

/// Periodic anisotropic gradient of a row-major `R×R` image. The output
/// holds the `R²` horizontal differences followed by the `R²` vertical ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TvGradient {
    side: usize,
}

impl TvGradient {
    pub fn new(side: usize) -> Self {
        assert!(side >= 1, "image side must be positive");
        TvGradient { side }
    }

    pub fn side(&self) -> usize {
        self.side
    }
}

impl LinearOperator for TvGradient {
    fn in_dim(&self) -> usize {
        self.side * self.side
    }

    fn out_dim(&self) -> usize {
        2 * self.side * self.side
    }

    fn apply(&self, x: &[Complex64]) -> Point {
        let r = self.side;
        assert_eq!(x.len(), r * r, "tv apply: dimension mismatch");
        let mut out = Vec::with_capacity(2 * r * r);
        for p in 0..r {
            for q in 0..r {
                out.push(x[p * r + (q + 1) % r] - x[p * r + q]);
            }
        }
        for p in 0..r {
            for q in 0..r {
                out.push(x[((p + 1) % r) * r + q] - x[p * r + q]);
            }
        }
        out
    }

    /// Negative periodic divergence.
    fn adjoint(&self, y: &[Complex64]) -> Point {
        let r = self.side;
        assert_eq!(y.len(), 2 * r * r, "tv adjoint: dimension mismatch");
        let (h, v) = y.split_at(r * r);
        let mut out = Vec::with_capacity(r * r);
        for p in 0..r {
            for q in 0..r {
                let left = h[p * r + (q + r - 1) % r];
                let up = v[((p + r - 1) % r) * r + q];
                out.push(left - h[p * r + q] + up - v[p * r + q]);
            }
        }
        out
    }

    fn norm_bound(&self) -> f64 {
        2.0 * std::f64::consts::SQRT_2
    }
}
