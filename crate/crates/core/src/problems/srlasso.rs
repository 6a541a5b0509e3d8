//! Square-root LASSO `min ‖Az − y‖₂ + λ‖z‖₁` via the primal-dual iteration.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::data::TabularData;
use super::{sparse_vector, ExperimentSetup, SolverHandle};
use crate::error::{Error, Result};
use crate::linops::{DenseMatrix, LinearOperator};
use crate::problem::{Oracle, Point, ProblemInstance, ProxMap};
use crate::solvers::prox::{prox_l1, prox_sqrt_loss_conjugate};
use crate::solvers::{CouplingBlock, PrimalDualSolver};
use crate::vector;

/// Magnitude above which a coefficient counts as selected.
pub const SPARSITY_THRESHOLD: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct SrLassoInstance {
    /// Data with an all-ones column appended on the right.
    pub matrix: Arc<DenseMatrix>,
    pub y: Point,
    pub lambda: f64,
    pub reference_optimum: Option<f64>,
    /// Planted weights (intercept last) for synthetic data.
    pub planted: Option<Point>,
}

impl SrLassoInstance {
    pub fn objective(&self, z: &[Complex64]) -> f64 {
        vector::dist2(&self.matrix.apply(z), &self.y) + self.lambda * vector::norm1(z)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::config("lambda", "must be positive"));
    }
    Ok(())
}

/// Builds an instance from loaded data, appending the intercept column.
pub fn srlasso_from_data(data: &TabularData, lambda: f64) -> Result<SrLassoInstance> {
    check_lambda(lambda)?;
    let matrix = data.matrix()?.with_ones_column()?;
    Ok(SrLassoInstance {
        matrix: Arc::new(matrix),
        y: vector::from_real(&data.labels),
        lambda,
        reference_optimum: None,
        planted: None,
    })
}

/// Standard normal features (`m × n`, then the ones column), `s` planted
/// weights, intercept 1 and Gaussian label noise of standard deviation
/// `noise`.
pub fn gen_synthetic_srlasso(
    m: usize,
    n: usize,
    s: usize,
    noise: f64,
    lambda: f64,
    seed: u64,
) -> Result<SrLassoInstance> {
    check_lambda(lambda)?;
    if m == 0 || n == 0 || s > n {
        return Err(Error::invalid(format!("need m, n > 0 and s ≤ n, got m = {m}, n = {n}, s = {s}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    let matrix = DenseMatrix::from_row_major(m, n, values)?.with_ones_column()?;
    let mut w = sparse_vector(&mut rng, n, s);
    w.push(Complex64::new(1.0, 0.0));
    let mut y = matrix.apply(&w);
    for v in &mut y {
        let e: f64 = rng.sample(StandardNormal);
        *v += noise * e;
    }
    Ok(SrLassoInstance { matrix: Arc::new(matrix), y, lambda, reference_optimum: None, planted: Some(w) })
}

/// Number of entries with magnitude above [`SPARSITY_THRESHOLD`].
pub fn sparsity_count(x: &[Complex64]) -> usize {
    x.iter().filter(|v| v.norm() > SPARSITY_THRESHOLD).count()
}

/// Unconstrained primal-dual setup with `B = A`, `h = ‖· − y‖₂` (`L_h = 1`)
/// and `g = λ‖·‖₁`, started from zero. Sharpness defaults are `α₀ = β₀ = 1`.
pub fn srlasso_problem(inst: &SrLassoInstance) -> Result<ExperimentSetup> {
    check_lambda(inst.lambda)?;
    let n = inst.matrix.in_dim();
    let lambda = inst.lambda;
    let obj_inst = inst.clone();
    let prox: ProxMap = Arc::new(move |x: &[Complex64], tau: f64| prox_l1(x, lambda * tau));
    let mut problem =
        ProblemInstance::new(n, move |z| obj_inst.objective(z)).with_oracle("prox_g", Oracle::Prox(prox.clone()));
    if let Some(f) = inst.reference_optimum {
        problem = problem.with_reference_optimum(f);
    }

    let y_prox = inst.y.clone();
    let y_conj = inst.y.clone();
    let merit_inst = inst.clone();
    let solver = PrimalDualSolver::new(Arc::new(move |z: &[Complex64]| merit_inst.objective(z)), prox).with_coupling(
        CouplingBlock {
            operator: inst.matrix.clone(),
            prox_conjugate: Arc::new(move |w: &[Complex64], s: f64| prox_sqrt_loss_conjugate(w, s, &y_prox)),
            conjugate_value: Arc::new(move |w: &[Complex64]| vector::dot_re(w, &y_conj)),
            l_h: 1.0,
        },
    )?;

    let x0 = vector::zeros(n);
    let eps0 = problem.merit(&x0);
    Ok(ExperimentSetup { problem, x0, alpha0: 1.0, beta0: 1.0, eps0, solver: SolverHandle::PrimalDual(solver) })
}
