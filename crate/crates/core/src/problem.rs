//! Problem abstraction: objective, feasibility gap, metric and named oracles.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::vector;

/// Points are dense complex vectors; real problems use zero imaginary parts.
pub type Point = Vec<Complex64>;

/// `x ↦ value`.
pub type ScalarFn = Arc<dyn Fn(&[Complex64]) -> f64 + Send + Sync>;
/// `x ↦ y`, e.g. a gradient or a projection.
pub type VectorMap = Arc<dyn Fn(&[Complex64]) -> Point + Send + Sync>;
/// `(x, c) ↦ prox_{c·g}(x)`.
pub type ProxMap = Arc<dyn Fn(&[Complex64], f64) -> Point + Send + Sync>;
/// `(x, y) ↦ d(x, y)`.
pub type MetricFn = Arc<dyn Fn(&[Complex64], &[Complex64]) -> f64 + Send + Sync>;

/// A named callable consumed by solvers.
#[derive(Clone)]
pub enum Oracle {
    Gradient(VectorMap),
    Prox(ProxMap),
    Projection(VectorMap),
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Oracle::Gradient(_) => f.write_str("Gradient(..)"),
            Oracle::Prox(_) => f.write_str("Prox(..)"),
            Oracle::Projection(_) => f.write_str("Projection(..)"),
        }
    }
}

/// One optimization problem `min f(x) + g_Q(x)` with reporting metadata.
#[derive(Clone)]
pub struct ProblemInstance {
    dimension: usize,
    objective: ScalarFn,
    feasibility_gap: Option<ScalarFn>,
    metric: Option<MetricFn>,
    oracles: BTreeMap<String, Oracle>,
    reference_optimum: Option<f64>,
    ground_truth: Option<Point>,
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("dimension", &self.dimension)
            .field("has_feasibility_gap", &self.feasibility_gap.is_some())
            .field("oracles", &self.oracles.keys().collect::<Vec<_>>())
            .field("reference_optimum", &self.reference_optimum)
            .field("has_ground_truth", &self.ground_truth.is_some())
            .finish()
    }
}

impl ProblemInstance {
    /// A problem with `g_Q ≡ 0` and the Euclidean metric.
    pub fn new(dimension: usize, objective: impl Fn(&[Complex64]) -> f64 + Send + Sync + 'static) -> Self {
        ProblemInstance {
            dimension,
            objective: Arc::new(objective),
            feasibility_gap: None,
            metric: None,
            oracles: BTreeMap::new(),
            reference_optimum: None,
            ground_truth: None,
        }
    }

    pub fn with_feasibility_gap(mut self, gap: impl Fn(&[Complex64]) -> f64 + Send + Sync + 'static) -> Self {
        self.feasibility_gap = Some(Arc::new(gap));
        self
    }

    pub fn with_metric(mut self, metric: impl Fn(&[Complex64], &[Complex64]) -> f64 + Send + Sync + 'static) -> Self {
        self.metric = Some(Arc::new(metric));
        self
    }

    pub fn with_oracle(mut self, name: impl Into<String>, oracle: Oracle) -> Self {
        self.oracles.insert(name.into(), oracle);
        self
    }

    pub fn with_reference_optimum(mut self, value: f64) -> Self {
        self.reference_optimum = Some(value);
        self
    }

    pub fn set_reference_optimum(&mut self, value: Option<f64>) {
        self.reference_optimum = value;
    }

    /// Ground truth used for the reconstruction-error column.
    pub fn with_ground_truth(mut self, x: Point) -> Self {
        self.ground_truth = Some(x);
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn objective(&self, x: &[Complex64]) -> f64 {
        (self.objective)(x)
    }

    pub fn feasibility_gap(&self, x: &[Complex64]) -> f64 {
        self.feasibility_gap.as_ref().map_or(0.0, |g| g(x))
    }

    /// `f(x) + g_Q(x)`, the quantity restart schemes compare.
    pub fn merit(&self, x: &[Complex64]) -> f64 {
        self.objective(x) + self.feasibility_gap(x)
    }

    pub fn distance(&self, x: &[Complex64], y: &[Complex64]) -> f64 {
        match &self.metric {
            Some(d) => d(x, y),
            None => vector::dist2(x, y),
        }
    }

    pub fn oracle(&self, name: &str) -> Option<&Oracle> {
        self.oracles.get(name)
    }

    pub fn oracle_names(&self) -> impl Iterator<Item = &str> {
        self.oracles.keys().map(String::as_str)
    }

    pub fn reference_optimum(&self) -> Option<f64> {
        self.reference_optimum
    }

    pub fn ground_truth(&self) -> Option<&[Complex64]> {
        self.ground_truth.as_deref()
    }

    /// `f(x) − f̂` when `f̂` is known.
    pub fn objective_error(&self, x: &[Complex64]) -> Option<f64> {
        self.reference_optimum.map(|fh| self.objective(x) - fh)
    }

    /// `d(x, x_true)` when a ground truth is attached.
    pub fn reconstruction_error(&self, x: &[Complex64]) -> Option<f64> {
        self.ground_truth.as_ref().map(|g| self.distance(x, g))
    }

    pub fn check_dimension(&self, x: &[Complex64], what: &str) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::invalid(format!(
                "{what} has {} entries, problem dimension is {}",
                x.len(),
                self.dimension
            )));
        }
        Ok(())
    }

    /// Returns whichever of `x`, `z` has the smaller `f + g_Q`; ties keep `x`.
    pub fn best_of<'a>(&self, x: &'a [Complex64], z: &'a [Complex64]) -> Result<&'a [Complex64]> {
        self.check_dimension(x, "x")?;
        self.check_dimension(z, "z")?;
        Ok(if self.merit(z) < self.merit(x) { z } else { x })
    }
}

/// Constants `(α, β, η)` of the approximate sharpness bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SharpnessEstimate {
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
}

impl SharpnessEstimate {
    pub fn new(alpha: f64, beta: f64, eta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
        }
        if !(beta >= 1.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be at least 1, got {beta}")));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::invalid(format!("eta must be nonnegative, got {eta}")));
        }
        Ok(SharpnessEstimate { alpha, beta, eta })
    }
}
