//! Linear operators with adjoints and norm bounds.

use num_complex::Complex64;

use crate::problem::Point;

mod dense;
mod fourier;
mod mask;
mod tv;

pub use dense::{DenseMatrix, IdentityOperator};
pub use fourier::{dft_apply, dft_inverse, FourierOperator, FourierShape};
pub use mask::{read_mask, sample_mask, write_mask, MaskKind, MaskOptions, SamplingMask};
pub use tv::TvGradient;

/// A bounded linear map `Cⁿ → Cᵐ` with its adjoint.
pub trait LinearOperator: Send + Sync {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    fn apply(&self, x: &[Complex64]) -> Point;
    fn adjoint(&self, y: &[Complex64]) -> Point;
    /// Upper bound on the induced 2-norm.
    fn norm_bound(&self) -> f64;
    /// `ν` with `A A* = ν I`, when the rows are orthogonal with equal norms.
    fn row_orthonormal_constant(&self) -> Option<f64> {
        None
    }
}
