//! Experiment builders: QCBP sparse recovery, TV-Fourier imaging and
//! SR-LASSO, together with synthetic data and dataset ingestion.

pub mod data;
pub mod oracle;
pub mod phantom;
pub mod qcbp;
pub mod srlasso;
pub mod tv;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::contract::SolverContract;
use crate::error::{Error, Result};
use crate::problem::{Point, ProblemInstance};
use crate::restart::{default_parameters, RestartConfig};
use crate::schedule::{ScheduleCriterion, ScheduleMode};
use crate::solvers::{NestaSolver, PrimalDualSolver};
use crate::vector;

pub use data::{load_tabular_dataset, DatasetFormat, KnownDataset, TabularData};
pub use oracle::{reference_optimum, ReferenceOptimum};
pub use phantom::{gen_phantom, write_pgm};
pub use qcbp::{gen_fourier_qcbp, gen_gaussian_qcbp, qcbp_problem, QcbpInstance};
pub use srlasso::{gen_synthetic_srlasso, sparsity_count, srlasso_from_data, srlasso_problem, SrLassoInstance};
pub use tv::{gen_tv_fourier, tv_problem, TvInstance, TvOptions};

/// The solver an experiment is wired to.
#[derive(Clone)]
pub enum SolverHandle {
    PrimalDual(PrimalDualSolver),
    Nesta(NestaSolver),
    Custom(Arc<dyn SolverContract>),
}

impl fmt::Debug for SolverHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverHandle::PrimalDual(s) => s.fmt(f),
            SolverHandle::Nesta(s) => s.fmt(f),
            SolverHandle::Custom(c) => write!(f, "Custom({})", c.name()),
        }
    }
}

impl SolverHandle {
    pub fn contract(&self) -> &dyn SolverContract {
        match self {
            SolverHandle::PrimalDual(s) => s,
            SolverHandle::Nesta(s) => s,
            SolverHandle::Custom(c) => c.as_ref(),
        }
    }
}

/// A problem together with its solver and the restart defaults.
#[derive(Clone)]
pub struct ExperimentSetup {
    pub problem: ProblemInstance,
    pub x0: Point,
    pub alpha0: f64,
    pub beta0: f64,
    /// Upper bound on `f(x₀) − f̂ + g_Q(x₀)`; the objectives here are
    /// nonnegative, so `f(x₀) + g_Q(x₀)` qualifies.
    pub eps0: f64,
    pub solver: SolverHandle,
}

impl ExperimentSetup {
    /// Grid-search configuration for `mode` with the cost-optimal `a`, `b`,
    /// `r`, `c1 = c2 = 2`, machine-precision clamps and this setup's
    /// `α₀`, `β₀`, `ε₀`. `beta_hint` sets the exponent base in the
    /// β-known modes.
    pub fn grid_config(&self, mode: ScheduleMode, budget: u64, beta_hint: Option<f64>) -> Result<RestartConfig> {
        let exps = self
            .solver
            .contract()
            .cost_exponents()
            .ok_or_else(|| Error::config("solver", "grid defaults need a cost bound of the form C·δ^d1/ε^d2"))?;
        let d = default_parameters(exps.d1, exps.d2, beta_hint, mode)?;
        let criterion = ScheduleCriterion::new(mode, d.c1, d.c2)?.with_machine_clamps(d.a, d.b)?;
        let mut cfg = RestartConfig::new(criterion, self.eps0, budget);
        cfg.a = d.a;
        cfg.b = d.b;
        cfg.r = d.r;
        cfg.alpha0 = self.alpha0;
        cfg.beta0 = self.beta0;
        Ok(cfg)
    }
}

impl fmt::Debug for ExperimentSetup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExperimentSetup")
            .field("problem", &self.problem)
            .field("alpha0", &self.alpha0)
            .field("beta0", &self.beta0)
            .field("eps0", &self.eps0)
            .field("solver", &self.solver)
            .finish()
    }
}

/// A vector drawn uniformly from the sphere of radius `radius`. Complex
/// draws use independent real and imaginary parts.
pub(crate) fn sphere_noise<R: Rng>(rng: &mut R, len: usize, radius: f64, complex: bool) -> Point {
    let mut e: Point = (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
            Complex64::new(re, im)
        })
        .collect();
    let norm = vector::norm2(&e);
    if radius == 0.0 || norm == 0.0 {
        return vector::zeros(len);
    }
    for v in &mut e {
        *v *= radius / norm;
    }
    e
}

/// An `s`-sparse real vector with standard normal entries on a random support.
pub(crate) fn sparse_vector<R: Rng>(rng: &mut R, n: usize, s: usize) -> Point {
    let mut x = vector::zeros(n);
    let mut support = rand::seq::index::sample(rng, n, s).into_vec();
    support.sort_unstable();
    for i in support {
        let v: f64 = rng.sample(StandardNormal);
        x[i] = Complex64::new(v, 0.0);
    }
    x
}
