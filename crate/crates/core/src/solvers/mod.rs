//! First-order methods wired as solver contracts, plus the prox toolbox.

pub mod nesterov;
pub mod primal_dual;
pub mod prox;
pub mod ufgm;

pub use nesterov::{nesterov_iterates, NestaSolver, NesterovSolver};
pub use primal_dual::{ConstraintBlock, CouplingBlock, PrimalDualSolver};
pub use ufgm::UfgmSolver;

use num_complex::Complex64;

use crate::problem::{Point, ScalarFn};

/// Running best point under a merit function.
pub(crate) struct BestTracker {
    merit: ScalarFn,
    point: Point,
    value: f64,
}

impl BestTracker {
    pub(crate) fn new(merit: ScalarFn, x: &[Complex64]) -> Self {
        let value = merit(x);
        BestTracker { merit, point: x.to_vec(), value }
    }

    /// Offers `x`; returns whether it became the best.
    pub(crate) fn offer(&mut self, x: &[Complex64]) -> bool {
        let v = (self.merit)(x);
        // NaN never wins, so a blown-up iterate cannot replace a finite one.
        if v < self.value || (self.value.is_nan() && !v.is_nan()) {
            self.value = v;
            self.point.clear();
            self.point.extend_from_slice(x);
            true
        } else {
            false
        }
    }

    pub(crate) fn point(&self) -> &[Complex64] {
        &self.point
    }

    pub(crate) fn into_point(self) -> Point {
        self.point
    }
}
