//! Proximal maps, projections and the Huber smoothing of `|·|`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linops::LinearOperator;
use crate::problem::Point;
use crate::vector;

/// Complex soft threshold, the prox of `threshold·‖·‖₁`.
pub fn prox_l1(x: &[Complex64], threshold: f64) -> Point {
    x.iter().map(|&z| shrink(z, threshold)).collect()
}

fn shrink(z: Complex64, threshold: f64) -> Complex64 {
    let m = vector::abs(z);
    if m <= threshold {
        Complex64::new(0.0, 0.0)
    } else {
        z * ((m - threshold) / m)
    }
}

/// Euclidean projection onto `{w : ‖w − center‖ ≤ radius}`.
pub fn project_l2_ball(y: &[Complex64], center: &[Complex64], radius: f64) -> Point {
    debug_assert_eq!(y.len(), center.len());
    let d = vector::dist2(y, center);
    if d <= radius {
        return y.to_vec();
    }
    let s = if d > 0.0 { radius / d } else { 0.0 };
    y.iter().zip(center).map(|(a, c)| c + (a - c) * s).collect()
}

/// Projection onto the centered ball of the given radius.
pub fn project_l2_ball_origin(y: &[Complex64], radius: f64) -> Point {
    let d = vector::norm2(y);
    if d <= radius {
        y.to_vec()
    } else {
        vector::scale(radius / d, y)
    }
}

/// `prox_{σ h*}` for `h = ‖· − y‖₂`: `P_ball(w − σ y)` onto the unit ball.
pub fn prox_sqrt_loss_conjugate(w: &[Complex64], sigma: f64, y: &[Complex64]) -> Point {
    let shifted = vector::combine(1.0, w, -sigma, y);
    project_l2_ball_origin(&shifted, 1.0)
}

/// Huber function: the Moreau envelope of `|·|` with parameter `μ`.
pub fn huber(w: Complex64, mu: f64) -> f64 {
    let a = vector::abs(w);
    if a <= mu {
        a * a / (2.0 * mu)
    } else {
        a - mu / 2.0
    }
}

/// Gradient of [`huber`] with respect to the real and imaginary parts.
pub fn huber_gradient(w: Complex64, mu: f64) -> Complex64 {
    w / vector::abs(w).max(mu)
}

/// `‖w‖_{1,μ}`, the entrywise Huber smoothing of `‖w‖₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothedL1 {
    pub mu: f64,
}

impl SmoothedL1 {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::invalid("smoothing parameter must be positive"));
        }
        Ok(SmoothedL1 { mu })
    }

    pub fn value(&self, w: &[Complex64]) -> f64 {
        w.iter().map(|&z| huber(z, self.mu)).sum()
    }

    pub fn gradient(&self, w: &[Complex64]) -> Point {
        w.iter().map(|&z| huber_gradient(z, self.mu)).collect()
    }
}

/// Projection onto `{w : ‖A w − y‖ ≤ ς}` for an operator with `A A* = ν I`.
pub fn nesta_q_projection(z: &[Complex64], a: &dyn LinearOperator, y: &[Complex64], sigma: f64) -> Result<Point> {
    let nu = a
        .row_orthonormal_constant()
        .ok_or_else(|| Error::config("operator", "feasible-set projection needs A A* = νI"))?;
    let residual = vector::sub(&a.apply(z), y);
    let r = vector::norm2(&residual);
    if r <= sigma {
        return Ok(z.to_vec());
    }
    let coef = (1.0 - sigma / r) / nu;
    let back = a.adjoint(&residual);
    Ok(vector::combine(1.0, z, -coef, &back))
}
