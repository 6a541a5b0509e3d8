//! Quadratically constrained basis pursuit `min ‖z‖₁ s.t. ‖Az − y‖ ≤ ς`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{sparse_vector, sphere_noise, ExperimentSetup, SolverHandle};
use crate::error::{Error, Result};
use crate::linops::{sample_mask, DenseMatrix, FourierOperator, FourierShape, LinearOperator, MaskKind, MaskOptions};
use crate::problem::{Oracle, Point, ProblemInstance, ProxMap, VectorMap};
use crate::solvers::prox::{project_l2_ball, prox_l1};
use crate::solvers::{ConstraintBlock, PrimalDualSolver};
use crate::vector;

#[derive(Clone)]
pub struct QcbpInstance {
    pub operator: Arc<dyn LinearOperator>,
    pub y: Point,
    pub sigma_noise: f64,
    pub ground_truth: Option<Point>,
    pub sparsity: usize,
    pub kappa: f64,
}

impl fmt::Debug for QcbpInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QcbpInstance")
            .field("n", &self.operator.in_dim())
            .field("m", &self.operator.out_dim())
            .field("sigma_noise", &self.sigma_noise)
            .field("sparsity", &self.sparsity)
            .field("kappa", &self.kappa)
            .finish()
    }
}

impl QcbpInstance {
    pub fn n(&self) -> usize {
        self.operator.in_dim()
    }

    pub fn m(&self) -> usize {
        self.operator.out_dim()
    }

    /// `κ·max{‖Az − y‖ − ς, 0}`.
    pub fn feasibility_gap(&self, z: &[Complex64]) -> f64 {
        let r = vector::dist2(&self.operator.apply(z), &self.y);
        self.kappa * (r - self.sigma_noise).max(0.0)
    }
}

fn check_sizes(n: usize, m: usize, s: usize, sigma: f64) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("n and m must be positive"));
    }
    if s > n || m > n {
        return Err(Error::invalid(format!("need s ≤ n and m ≤ n, got n = {n}, m = {m}, s = {s}")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid("noise level must be nonnegative"));
    }
    Ok(())
}

/// Gaussian measurements with variance `1/m`, an `s`-sparse signal and
/// noise on the sphere of radius `ς`. Draw order: matrix, support and
/// values, noise direction.
pub fn gen_gaussian_qcbp(n: usize, m: usize, s: usize, sigma_noise: f64, seed: u64) -> Result<QcbpInstance> {
    check_sizes(n, m, s, sigma_noise)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = 1.0 / (m as f64).sqrt();
    let data: Vec<f64> = (0..m * n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
    let a = DenseMatrix::from_row_major(m, n, data)?;
    let x = sparse_vector(&mut rng, n, s);
    let e = sphere_noise(&mut rng, m, sigma_noise, false);
    let y = vector::add(&a.apply(&x), &e);
    Ok(QcbpInstance {
        operator: Arc::new(a),
        y,
        sigma_noise,
        ground_truth: Some(x),
        sparsity: s,
        kappa: (m as f64).sqrt(),
    })
}

/// Subsampled 1-D Fourier measurements of an `s`-sparse real signal with
/// complex noise on the sphere.
pub fn gen_fourier_qcbp(
    n: usize,
    m: usize,
    s: usize,
    sigma_noise: f64,
    kind: MaskKind,
    seed: u64,
) -> Result<QcbpInstance> {
    check_sizes(n, m, s, sigma_noise)?;
    let shape = FourierShape::Line(n);
    let mask = sample_mask(shape, m, kind, seed, MaskOptions::default())?;
    let a = FourierOperator::new(shape, &mask)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let x = sparse_vector(&mut rng, n, s);
    let e = sphere_noise(&mut rng, a.out_dim(), sigma_noise, true);
    let y = vector::add(&a.apply(&x), &e);
    let kappa = (a.out_dim() as f64).sqrt();
    Ok(QcbpInstance { operator: Arc::new(a), y, sigma_noise, ground_truth: Some(x), sparsity: s, kappa })
}

/// `‖·‖₁` with the weighted feasibility gap, solved by the constrained
/// primal-dual iteration from `x₀ = 0` with `α₀ = √m`, `β₀ = 1`.
pub fn qcbp_problem(inst: &QcbpInstance) -> Result<ExperimentSetup> {
    if !(inst.kappa > 0.0) {
        return Err(Error::config("kappa", "must be positive"));
    }
    let n = inst.n();
    let gap_inst = inst.clone();
    let center = inst.y.clone();
    let radius = inst.sigma_noise;
    let projection: VectorMap = Arc::new(move |w: &[Complex64]| project_l2_ball(w, &center, radius));
    let prox: ProxMap = Arc::new(prox_l1);

    let mut problem = ProblemInstance::new(n, vector::norm1)
        .with_feasibility_gap(move |z| gap_inst.feasibility_gap(z))
        .with_oracle("prox_l1", Oracle::Prox(prox.clone()))
        .with_oracle("projection_c", Oracle::Projection(projection.clone()));
    if let Some(x) = &inst.ground_truth {
        problem = problem.with_ground_truth(x.clone());
    }

    let y = inst.y.clone();
    let sigma = inst.sigma_noise;
    let support = Arc::new(move |w: &[Complex64]| vector::dot_re(w, &y) + sigma * vector::norm2(w));
    let merit_problem = problem.clone();
    let solver = PrimalDualSolver::new(Arc::new(move |z: &[Complex64]| merit_problem.merit(z)), prox)
        .with_constraint(ConstraintBlock { operator: inst.operator.clone(), projection, support, kappa: inst.kappa })?;

    let x0 = vector::zeros(n);
    let eps0 = problem.merit(&x0);
    Ok(ExperimentSetup {
        problem,
        x0,
        alpha0: (inst.m() as f64).sqrt(),
        beta0: 1.0,
        eps0,
        solver: SolverHandle::PrimalDual(solver),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_instance_shapes() {
        let inst = gen_gaussian_qcbp(128, 60, 10, 1e-6, 1).unwrap();
        assert_eq!((inst.n(), inst.m()), (128, 60));
        assert!((inst.kappa - 60f64.sqrt()).abs() < 1e-15);
        assert!((inst.kappa - 7.746).abs() < 1e-3);
        let x = inst.ground_truth.as_ref().unwrap();
        let r = vector::dist2(&inst.operator.apply(x), &inst.y);
        // ‖e‖ = ς exactly; forming y = Ax + e adds rounding of order ε_mach·‖Ax‖.
        assert!((r - 1e-6).abs() <= 1e-14);
    }

    #[test]
    fn zero_noise_is_exact() {
        let inst = gen_gaussian_qcbp(40, 20, 3, 0.0, 5).unwrap();
        let x = inst.ground_truth.as_ref().unwrap();
        assert_eq!(inst.operator.apply(x), inst.y);
    }

    #[test]
    fn seeds_replay_bit_exactly() {
        let a = gen_gaussian_qcbp(30, 10, 2, 1e-3, 77).unwrap();
        let b = gen_gaussian_qcbp(30, 10, 2, 1e-3, 77).unwrap();
        assert_eq!(a.y, b.y);
        assert_eq!(a.ground_truth, b.ground_truth);
        let e1 = vector::from_real(&[1.0; 30]);
        assert_eq!(a.operator.apply(&e1), b.operator.apply(&e1));
        let c = gen_gaussian_qcbp(30, 10, 2, 1e-3, 78).unwrap();
        assert_ne!(a.y, c.y);
    }

    #[test]
    fn ground_truth_is_feasible() {
        let inst = gen_gaussian_qcbp(128, 60, 10, 1e-6, 2).unwrap();
        let setup = qcbp_problem(&inst).unwrap();
        let x = inst.ground_truth.as_ref().unwrap();
        assert!(setup.problem.feasibility_gap(x) <= 1e-13);
        assert_eq!(setup.problem.objective(x), vector::norm1(x));
        assert!((setup.alpha0 - 60f64.sqrt()).abs() < 1e-15);
        assert_eq!(setup.eps0, setup.problem.merit(&setup.x0));
    }

    #[test]
    fn infeasible_point_has_positive_gap() {
        let inst = gen_gaussian_qcbp(20, 10, 2, 1e-3, 4).unwrap();
        let setup = qcbp_problem(&inst).unwrap();
        let far = vector::from_real(&[10.0; 20]);
        assert!(setup.problem.feasibility_gap(&far) > 0.0);
    }

    #[test]
    fn fourier_instance_noise_and_feasibility() {
        let inst = gen_fourier_qcbp(256, 64, 8, 1e-4, MaskKind::PowerDensity, 3).unwrap();
        let x = inst.ground_truth.as_ref().unwrap();
        let r = vector::dist2(&inst.operator.apply(x), &inst.y);
        assert!((r - 1e-4).abs() <= 1e-14);
        assert!(inst.feasibility_gap(x) <= 1e-13);
        assert!(qcbp_problem(&inst).is_ok());
    }

    #[test]
    fn invalid_sizes_rejected() {
        assert!(gen_gaussian_qcbp(10, 20, 2, 0.0, 0).is_err());
        assert!(gen_gaussian_qcbp(10, 5, 11, 0.0, 0).is_err());
    }
}
