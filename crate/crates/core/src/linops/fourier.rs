use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{LinearOperator, SamplingMask};
use crate::error::{Error, Result};
use crate::problem::Point;

/// Geometry of the signal: a length-`n` vector or a row-major `R×R` image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FourierShape {
    Line(usize),
    Square(usize),
}

impl FourierShape {
    pub fn len(&self) -> usize {
        match *self {
            FourierShape::Line(n) => n,
            FourierShape::Square(r) => r * r,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Plans { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }
}

/// Unnormalized transform of `x` in place, forward or inverse, in 1-D or
/// separably in 2-D.
fn transform(shape: FourierShape, plans: &Plans, data: &mut [Complex64], inverse: bool) {
    let fft = if inverse { &plans.inverse } else { &plans.forward };
    match shape {
        FourierShape::Line(_) => fft.process(data),
        FourierShape::Square(r) => {
            // Rows are contiguous; columns go through a transpose.
            fft.process(data);
            transpose_square(data, r);
            fft.process(data);
            transpose_square(data, r);
        }
    }
}

fn transpose_square(data: &mut [Complex64], r: usize) {
    for p in 0..r {
        for q in (p + 1)..r {
            data.swap(p * r + q, q * r + p);
        }
    }
}

/// Unnormalized DFT `F` with `F F* = n I` (`n` = number of entries).
pub fn dft_apply(shape: FourierShape, x: &[Complex64]) -> Point {
    assert_eq!(x.len(), shape.len(), "dft: dimension mismatch");
    let side = match shape {
        FourierShape::Line(n) => n,
        FourierShape::Square(r) => r,
    };
    let plans = Plans::new(side);
    let mut out = x.to_vec();
    transform(shape, &plans, &mut out, false);
    out
}

/// `F*`, the adjoint of [`dft_apply`] (inverse DFT without the `1/n`).
pub fn dft_inverse(shape: FourierShape, x: &[Complex64]) -> Point {
    assert_eq!(x.len(), shape.len(), "dft: dimension mismatch");
    let side = match shape {
        FourierShape::Line(n) => n,
        FourierShape::Square(r) => r,
    };
    let plans = Plans::new(side);
    let mut out = x.to_vec();
    transform(shape, &plans, &mut out, true);
    out
}

/// `A = m^{-1/2} P_Ω F`, a subsampled Fourier transform with `A A* = (n/m) I`.
pub struct FourierOperator {
    shape: FourierShape,
    indices: Vec<usize>,
    plans: Plans,
    scale: f64,
}

impl fmt::Debug for FourierOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierOperator").field("shape", &self.shape).field("m", &self.indices.len()).finish()
    }
}

impl FourierOperator {
    pub fn new(shape: FourierShape, mask: &SamplingMask) -> Result<Self> {
        let n = shape.len();
        if mask.indices.is_empty() {
            return Err(Error::invalid("sampling mask is empty"));
        }
        if mask.n != n {
            return Err(Error::invalid(format!("mask is for n = {}, operator has n = {n}", mask.n)));
        }
        if mask.indices.windows(2).any(|w| w[0] >= w[1]) || *mask.indices.last().unwrap() >= n {
            return Err(Error::invalid("mask indices must be sorted, unique and in range"));
        }
        let side = match shape {
            FourierShape::Line(n) => n,
            FourierShape::Square(r) => r,
        };
        Ok(FourierOperator {
            shape,
            indices: mask.indices.clone(),
            plans: Plans::new(side),
            scale: 1.0 / (mask.indices.len() as f64).sqrt(),
        })
    }

    pub fn shape(&self) -> FourierShape {
        self.shape
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

impl LinearOperator for FourierOperator {
    fn in_dim(&self) -> usize {
        self.shape.len()
    }

    fn out_dim(&self) -> usize {
        self.indices.len()
    }

    fn apply(&self, x: &[Complex64]) -> Point {
        assert_eq!(x.len(), self.in_dim(), "fourier apply: dimension mismatch");
        let mut buf = x.to_vec();
        transform(self.shape, &self.plans, &mut buf, false);
        self.indices.iter().map(|&i| buf[i] * self.scale).collect()
    }

    fn adjoint(&self, y: &[Complex64]) -> Point {
        assert_eq!(y.len(), self.out_dim(), "fourier adjoint: dimension mismatch");
        let mut buf = vec![Complex64::new(0.0, 0.0); self.in_dim()];
        for (&i, v) in self.indices.iter().zip(y) {
            buf[i] = v * self.scale;
        }
        transform(self.shape, &self.plans, &mut buf, true);
        buf
    }

    fn norm_bound(&self) -> f64 {
        self.row_orthonormal_constant().unwrap().sqrt()
    }

    fn row_orthonormal_constant(&self) -> Option<f64> {
        Some(self.in_dim() as f64 / self.indices.len() as f64)
    }
}
