//! Nesterov's accelerated projected gradient method and its smoothed
//! variant for nonsmooth objectives (NESTA).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::BestTracker;
use crate::contract::{ceil_count, CostExponents, Observer, SolverContract, SolverRun, WarmState};
use crate::error::{Error, Result};
use crate::problem::{Oracle, Point, ProblemInstance, ScalarFn, VectorMap};
use crate::vector;

/// Runs `n` steps of the accelerated scheme with prox-function
/// `½‖x − x₀‖²` and returns the last `x`. `observer(j, x_j)` sees every
/// iterate.
pub fn nesterov_iterates(
    gradient: &dyn Fn(&[Complex64]) -> Point,
    lipschitz: f64,
    projection: &dyn Fn(&[Complex64]) -> Point,
    x0: &[Complex64],
    n: u64,
    observer: &mut dyn FnMut(u64, &[Complex64]),
) -> Point {
    let mut z = x0.to_vec();
    let mut x = x0.to_vec();
    let mut weighted = vector::zeros(x0.len());
    let inv_l = 1.0 / lipschitz;
    for j in 0..n {
        let g = gradient(&z);
        x = projection(&vector::combine(1.0, &z, -inv_l, &g));
        let gamma = (j as f64 + 1.0) / 2.0;
        vector::axpy(gamma, &g, &mut weighted);
        let v = projection(&vector::combine(1.0, x0, -inv_l, &weighted));
        let tau = 2.0 / (j as f64 + 3.0);
        z = vector::combine(tau, &v, 1.0 - tau, &x);
        observer(j + 1, &x);
    }
    x
}

/// Projected accelerated gradient for an `L`-smooth objective over `Q`.
#[derive(Clone)]
pub struct NesterovSolver {
    merit: ScalarFn,
    gradient: VectorMap,
    lipschitz: f64,
    projection: VectorMap,
}

impl fmt::Debug for NesterovSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NesterovSolver").field("lipschitz", &self.lipschitz).finish()
    }
}

impl NesterovSolver {
    /// `merit` ranks iterates (normally `f`, as iterates stay in `Q`).
    pub fn new(merit: ScalarFn, gradient: VectorMap, lipschitz: f64, projection: VectorMap) -> Result<Self> {
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::config("lipschitz", "must be positive and finite"));
        }
        Ok(NesterovSolver { merit, gradient, lipschitz, projection })
    }

    /// Wires the `gradient` and `projection` oracles of a problem.
    pub fn from_problem(problem: &ProblemInstance, lipschitz: f64) -> Result<Self> {
        let gradient = match problem.oracle("gradient") {
            Some(Oracle::Gradient(g)) => g.clone(),
            _ => return Err(Error::config("oracles.gradient", "missing gradient oracle")),
        };
        let projection = match problem.oracle("projection") {
            Some(Oracle::Projection(p)) => p.clone(),
            _ => return Err(Error::config("oracles.projection", "missing projection oracle")),
        };
        let p = problem.clone();
        Self::new(Arc::new(move |x| p.merit(x)), gradient, lipschitz, projection)
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

impl SolverContract for NesterovSolver {
    fn name(&self) -> &str {
        "nesterov"
    }

    fn cost_bound(&self, delta: f64, eps: f64) -> u64 {
        ceil_count(delta * (2.0 * self.lipschitz).sqrt() / eps.sqrt())
    }

    fn cost_exponents(&self) -> Option<CostExponents> {
        Some(CostExponents { scale: (2.0 * self.lipschitz).sqrt(), d1: 1.0, d2: 0.5 })
    }

    fn run_for(
        &self,
        _delta: f64,
        _eps: f64,
        x0: &[Complex64],
        _warm: Option<&WarmState>,
        iterations: u64,
        observer: Observer<'_>,
    ) -> Result<SolverRun> {
        let mut best = BestTracker::new(self.merit.clone(), x0);
        nesterov_iterates(&*self.gradient, self.lipschitz, &*self.projection, x0, iterations, &mut |j, x| {
            best.offer(x);
            observer(j, best.point());
        });
        Ok(SolverRun { point: best.into_point(), warm: WarmState::default(), iterations })
    }
}

/// `(x, μ) ↦ ∇f_μ(x)` for a smoothing family `f_μ` of `f`.
pub type SmoothedGradient = Arc<dyn Fn(&[Complex64], f64) -> Point + Send + Sync>;

/// Nesterov's method applied to a `(u, v)`-smoothing of a nonsmooth `f`:
/// `μ = ε/(2v)`, Lipschitz constant `u/μ`.
#[derive(Clone)]
pub struct NestaSolver {
    merit: ScalarFn,
    smoothed_gradient: SmoothedGradient,
    u: f64,
    v: f64,
    projection: VectorMap,
}

impl fmt::Debug for NestaSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NestaSolver").field("u", &self.u).field("v", &self.v).finish()
    }
}

impl NestaSolver {
    pub fn new(
        merit: ScalarFn,
        smoothed_gradient: SmoothedGradient,
        u: f64,
        v: f64,
        projection: VectorMap,
    ) -> Result<Self> {
        if !(u > 0.0 && v > 0.0) {
            return Err(Error::config("smoothing", "u and v must be positive"));
        }
        Ok(NestaSolver { merit, smoothed_gradient, u, v, projection })
    }

    pub fn smoothing_constants(&self) -> (f64, f64) {
        (self.u, self.v)
    }

    /// Smoothing parameter used for target accuracy `ε`.
    pub fn mu_for(&self, eps: f64) -> f64 {
        eps / (2.0 * self.v)
    }

    /// Tolerance whose smoothing parameter is `μ` (inverse of [`Self::mu_for`]).
    pub fn eps_for_mu(&self, mu: f64) -> f64 {
        2.0 * self.v * mu
    }

    fn run_mu(&self, mu: f64, x0: &[Complex64], iterations: u64, observer: Observer<'_>) -> Point {
        let grad = |x: &[Complex64]| (self.smoothed_gradient)(x, mu);
        let mut best = BestTracker::new(self.merit.clone(), x0);
        nesterov_iterates(&grad, self.u / mu, &*self.projection, x0, iterations, &mut |j, x| {
            best.offer(x);
            observer(j, best.point());
        });
        best.into_point()
    }
}

impl SolverContract for NestaSolver {
    fn name(&self) -> &str {
        "nesta"
    }

    fn cost_bound(&self, delta: f64, eps: f64) -> u64 {
        ceil_count(2.0 * (2.0 * self.u * self.v).sqrt() * delta / eps)
    }

    fn cost_exponents(&self) -> Option<CostExponents> {
        Some(CostExponents { scale: 2.0 * (2.0 * self.u * self.v).sqrt(), d1: 1.0, d2: 1.0 })
    }

    fn run_for(
        &self,
        _delta: f64,
        eps: f64,
        x0: &[Complex64],
        _warm: Option<&WarmState>,
        iterations: u64,
        observer: Observer<'_>,
    ) -> Result<SolverRun> {
        if !(eps > 0.0) {
            return Err(Error::invalid("eps must be positive"));
        }
        let point = self.run_mu(self.mu_for(eps), x0, iterations, observer);
        Ok(SolverRun { point, warm: WarmState::default(), iterations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::prox::SmoothedL1;
    use crate::vector::from_real;

    fn identity() -> VectorMap {
        Arc::new(|x: &[Complex64]| x.to_vec())
    }

    fn half_norm_sq() -> NesterovSolver {
        NesterovSolver::new(
            Arc::new(|x: &[Complex64]| 0.5 * vector::norm2_sqr(x)),
            Arc::new(|x: &[Complex64]| x.to_vec()),
            1.0,
            identity(),
        )
        .unwrap()
    }

    #[test]
    fn cost_examples() {
        let s = NesterovSolver::new(Arc::new(|_: &[Complex64]| 0.0), identity(), 2.0, identity()).unwrap();
        assert_eq!(s.cost_bound(1.0, 1.0), 2);
        assert_eq!(s.cost_bound(0.0, 1.0), 0);
    }

    #[test]
    fn zero_delta_returns_x0() {
        let s = half_norm_sq();
        let x0 = from_real(&[0.3, 0.4]);
        let run = s.run(0.0, 0.1, &x0, None).unwrap();
        assert_eq!(run.iterations, 0);
        assert_eq!(run.point, x0);
    }

    #[test]
    fn envelope_on_quadratic() {
        let mut x0 = vec![0.0; 10];
        x0[0] = 0.6;
        x0[3] = -0.8;
        let x0 = from_real(&x0);
        let grad = |x: &[Complex64]| x.to_vec();
        let proj = |x: &[Complex64]| x.to_vec();
        nesterov_iterates(&grad, 1.0, &proj, &x0, 50, &mut |k, x| {
            let f = 0.5 * vector::norm2_sqr(x);
            assert!(f <= 2.0 / (k * (k + 1)) as f64 + 1e-12, "k = {k}: {f}");
        });
    }

    #[test]
    fn from_problem_requires_projection() {
        let p = ProblemInstance::new(2, |x| 0.5 * vector::norm2_sqr(x))
            .with_oracle("gradient", Oracle::Gradient(Arc::new(|x: &[Complex64]| x.to_vec())));
        assert!(matches!(NesterovSolver::from_problem(&p, 1.0), Err(Error::Config { .. })));
        let p = p.with_oracle("projection", Oracle::Projection(identity()));
        assert!(NesterovSolver::from_problem(&p, 1.0).is_ok());
    }

    #[test]
    fn smoothing_plug_in() {
        let s = NestaSolver::new(
            Arc::new(|_: &[Complex64]| 0.0),
            Arc::new(|x: &[Complex64], _| x.to_vec()),
            1.0,
            0.5,
            identity(),
        )
        .unwrap();
        assert_eq!(s.cost_bound(1.0, 0.5), 4);
        assert_eq!(s.mu_for(0.5), 0.5);
    }

    #[test]
    fn l1_sandwich() {
        let w = from_real(&[0.05, -0.3, 0.0, 2.0, -0.01, 0.09, 1.0, -7.0]);
        let s = SmoothedL1::new(0.1).unwrap();
        let gap = vector::norm1(&w) - s.value(&w);
        assert!((0.0..=0.4).contains(&gap));
    }
}
