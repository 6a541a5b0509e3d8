//! The solver contract `Γ(δ, ε, x₀)` and its iteration-cost bound `C_Γ(δ, ε)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::problem::Point;

/// Parameters of a cost bound of the form `C·δ^{d1}/ε^{d2} + 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostExponents {
    pub scale: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Solver state carried between restarts of one grid instance, such as
/// dual iterates. Solvers without such state ignore it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WarmState {
    pub duals: Vec<Point>,
}

impl WarmState {
    pub fn is_empty(&self) -> bool {
        self.duals.iter().all(Vec::is_empty)
    }
}

/// Output of one solver call.
#[derive(Clone, Debug)]
pub struct SolverRun {
    pub point: Point,
    pub warm: WarmState,
    pub iterations: u64,
}

/// Called after inner iteration `j` (1-based) with the solver's current
/// output candidate.
pub type Observer<'a> = &'a mut dyn FnMut(u64, &[Complex64]);

pub trait SolverContract: Send + Sync {
    fn name(&self) -> &str;

    /// `C_Γ(δ, ε)`: the number of inner iterations `run` will perform.
    fn cost_bound(&self, delta: f64, eps: f64) -> u64;

    fn cost_exponents(&self) -> Option<CostExponents> {
        None
    }

    /// Runs exactly `iterations` inner steps with step parameters derived
    /// from `(δ, ε)`.
    fn run_for(
        &self,
        delta: f64,
        eps: f64,
        x0: &[Complex64],
        warm: Option<&WarmState>,
        iterations: u64,
        observer: Observer<'_>,
    ) -> Result<SolverRun>;

    /// `Γ(δ, ε, x₀)` with `C_Γ(δ, ε)` iterations and a checkpoint callback.
    fn run_observed(
        &self,
        delta: f64,
        eps: f64,
        x0: &[Complex64],
        warm: Option<&WarmState>,
        observer: Observer<'_>,
    ) -> Result<SolverRun> {
        let n = self.cost_bound(delta, eps);
        self.run_for(delta, eps, x0, warm, n, observer)
    }

    /// `Γ(δ, ε, x₀)`.
    fn run(&self, delta: f64, eps: f64, x0: &[Complex64], warm: Option<&WarmState>) -> Result<SolverRun> {
        self.run_observed(delta, eps, x0, warm, &mut |_, _| {})
    }
}

type CostFn = Arc<dyn Fn(f64, f64) -> u64 + Send + Sync>;
type StepFn = Arc<dyn Fn(f64, f64, &[Complex64], u64) -> Point + Send + Sync>;

/// A contract assembled from closures: a cost bound and a map
/// `(δ, ε, x₀, n) ↦ output`. Useful for tests and foreign callers.
#[derive(Clone)]
pub struct FnContract {
    name: String,
    cost: CostFn,
    step: StepFn,
    exponents: Option<CostExponents>,
}

impl fmt::Debug for FnContract {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnContract").field("name", &self.name).finish()
    }
}

impl FnContract {
    pub fn new(
        name: impl Into<String>,
        cost: impl Fn(f64, f64) -> u64 + Send + Sync + 'static,
        step: impl Fn(f64, f64, &[Complex64], u64) -> Point + Send + Sync + 'static,
    ) -> Self {
        FnContract { name: name.into(), cost: Arc::new(cost), step: Arc::new(step), exponents: None }
    }

    pub fn with_exponents(mut self, exponents: CostExponents) -> Self {
        self.exponents = Some(exponents);
        self
    }
}

impl SolverContract for FnContract {
    fn name(&self) -> &str {
        &self.name
    }

    fn cost_bound(&self, delta: f64, eps: f64) -> u64 {
        (self.cost)(delta, eps)
    }

    fn cost_exponents(&self) -> Option<CostExponents> {
        self.exponents
    }

    fn run_for(
        &self,
        delta: f64,
        eps: f64,
        x0: &[Complex64],
        _warm: Option<&WarmState>,
        iterations: u64,
        observer: Observer<'_>,
    ) -> Result<SolverRun> {
        let point = (self.step)(delta, eps, x0, iterations);
        if iterations > 0 {
            observer(iterations, &point);
        }
        Ok(SolverRun { point, warm: WarmState::default(), iterations })
    }
}

/// Ceiling that forgives floating-point noise: values within a relative
/// `tol` above an integer round down to it. Non-positive inputs give 0 and
/// infinite or NaN inputs saturate.
pub fn ceil_tolerant(x: f64, tol: f64) -> u64 {
    if x.is_nan() || x == f64::INFINITY {
        return u64::MAX;
    }
    if x <= 0.0 {
        return 0;
    }
    let nearest = x.round();
    if nearest >= 1.0 && (x - nearest).abs() <= tol * nearest {
        return nearest as u64;
    }
    let c = x.ceil();
    if c >= u64::MAX as f64 {
        u64::MAX
    } else {
        c as u64
    }
}

/// Cost-bound ceiling used by the solver formulas.
pub(crate) fn ceil_count(x: f64) -> u64 {
    ceil_tolerant(x, 1e-12)
}

/// Number of restarts needed to go from `ε₀` to `ε` with rate `r`:
/// `⌈log(ε₀/ε)/log(1/r)⌉`.
pub fn restarts_needed(eps0: f64, eps: f64, r: f64) -> u64 {
    ceil_tolerant((eps0 / eps).ln() / (1.0 / r).ln(), 1e-10)
}

/// The theoretical worst-case inner-iteration count `K(ε)` of the grid
/// instance matching `(α*, β*)`.
#[allow(clippy::too_many_arguments)]
pub fn predict_total_cost(
    contract: &dyn SolverContract,
    alpha_star: f64,
    beta_star: f64,
    beta0: f64,
    b: f64,
    r: f64,
    eps0: f64,
    eps: f64,
) -> Result<u64> {
    if !(alpha_star > 0.0) {
        return Err(Error::invalid("alpha_star must be positive"));
    }
    if !(beta_star >= 1.0 && beta0 >= 1.0) {
        return Err(Error::invalid("beta_star and beta0 must be at least 1"));
    }
    if !(b > 1.0) {
        return Err(Error::invalid("b must exceed 1"));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid("r must lie in (0, 1)"));
    }
    if !(eps > 0.0 && eps0 > 0.0) {
        return Err(Error::invalid("tolerances must be positive"));
    }
    if eps >= eps0 {
        return Err(Error::invalid(format!("eps ({eps}) must be below eps0 ({eps0})")));
    }
    let q_max = restarts_needed(eps0, eps, r);
    let upper = (b / beta_star).min(1.0 / beta0);
    let mut total: u64 = 0;
    for q in 1..=q_max {
        let base = 2.0 * r.powi(q as i32 - 1) * eps0 / alpha_star;
        let delta = base.max(1.0).powf(upper) * base.min(1.0).powf(1.0 / beta_star);
        let eps_q = r.powi(q as i32) * eps0;
        total = total.saturating_add(contract.cost_bound(delta, eps_q));
    }
    Ok(total)
}
