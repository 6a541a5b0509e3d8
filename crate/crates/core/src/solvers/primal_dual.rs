//! Primal-dual iteration for `min q(x) + g(x) + h(Bx)` with an optional
//! constraint `Ax ∈ C` handled through the penalty `κ·dist(Ax, C)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contract::{ceil_count, CostExponents, Observer, SolverContract, SolverRun, WarmState};
use crate::error::{Error, Result};
use crate::linops::LinearOperator;
use crate::problem::{Point, ProxMap, ScalarFn, VectorMap};
use crate::vector;

/// The `h∘B` term.
#[derive(Clone)]
pub struct CouplingBlock {
    pub operator: Arc<dyn LinearOperator>,
    /// `(w, σ) ↦ prox_{σ h*}(w)`.
    pub prox_conjugate: ProxMap,
    /// `h*`, evaluated only on dual iterates where it is finite.
    pub conjugate_value: ScalarFn,
    /// Lipschitz constant of `h`.
    pub l_h: f64,
}

/// The constraint `Ax ∈ C`.
#[derive(Clone)]
pub struct ConstraintBlock {
    pub operator: Arc<dyn LinearOperator>,
    /// `P_C`.
    pub projection: VectorMap,
    /// Support function `σ_C(y) = sup_{z ∈ C} Re⟨y, z⟩`.
    pub support: ScalarFn,
    /// Feasibility weight `κ`.
    pub kappa: f64,
}

/// Which dual iterate is handed back for the next restart.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualOutput {
    /// The ergodic dual maximizing the Lagrangian at the best primal.
    #[default]
    Selected,
    /// The last (non-averaged) dual iterate.
    Last,
}

/// Snapshot after each iteration, for diagnostics and tests.
#[derive(Clone, Debug)]
pub struct PdState {
    pub iteration: u64,
    pub primal: Point,
    pub dual_1: Point,
    pub dual_2: Point,
    pub ergodic_primal: Point,
    pub ergodic_dual_1: Point,
    pub ergodic_dual_2: Point,
    pub best_primal: Point,
    pub best_merit: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSizes {
    pub tau: f64,
    pub sigma_1: f64,
    pub sigma_2: f64,
}

#[derive(Clone)]
pub struct PrimalDualSolver {
    merit: ScalarFn,
    prox_g: ProxMap,
    smooth: Option<(VectorMap, f64)>,
    coupling: Option<CouplingBlock>,
    constraint: Option<ConstraintBlock>,
    dual_output: DualOutput,
}

impl fmt::Debug for PrimalDualSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrimalDualSolver")
            .field("l_q", &self.l_q())
            .field("coupling", &self.coupling.as_ref().map(|c| (c.l_h, c.operator.norm_bound())))
            .field("constraint", &self.constraint.as_ref().map(|c| (c.kappa, c.operator.norm_bound())))
            .field("dual_output", &self.dual_output)
            .finish()
    }
}

impl PrimalDualSolver {
    /// `merit` ranks ergodic averages and should equal `f + κ·dist(A·, C)`.
    /// `prox_g(x, τ) = prox_{τ g}(x)`.
    pub fn new(merit: ScalarFn, prox_g: ProxMap) -> Self {
        PrimalDualSolver {
            merit,
            prox_g,
            smooth: None,
            coupling: None,
            constraint: None,
            dual_output: DualOutput::default(),
        }
    }

    /// Adds a smooth term `q` with `L_q`-Lipschitz gradient.
    pub fn with_smooth(mut self, gradient: VectorMap, l_q: f64) -> Result<Self> {
        if !(l_q >= 0.0 && l_q.is_finite()) {
            return Err(Error::config("l_q", "must be nonnegative and finite"));
        }
        self.smooth = Some((gradient, l_q));
        Ok(self)
    }

    pub fn with_coupling(mut self, block: CouplingBlock) -> Result<Self> {
        if !(block.operator.norm_bound() > 0.0) {
            return Err(Error::config("coupling.operator", "L_B = 0 with a nonzero h gives degenerate step sizes"));
        }
        if !(block.l_h > 0.0 && block.l_h.is_finite()) {
            return Err(Error::config("coupling.l_h", "must be positive and finite"));
        }
        self.coupling = Some(block);
        Ok(self)
    }

    pub fn with_constraint(mut self, block: ConstraintBlock) -> Result<Self> {
        if !(block.kappa > 0.0 && block.kappa.is_finite()) {
            return Err(Error::config("kappa", "must be positive and finite"));
        }
        if !(block.operator.norm_bound() > 0.0) {
            return Err(Error::config("constraint.operator", "L_A must be positive"));
        }
        self.constraint = Some(block);
        Ok(self)
    }

    pub fn with_dual_output(mut self, mode: DualOutput) -> Self {
        self.dual_output = mode;
        self
    }

    fn l_q(&self) -> f64 {
        self.smooth.as_ref().map_or(0.0, |s| s.1)
    }

    fn factor_h(&self) -> f64 {
        self.coupling.as_ref().map_or(0.0, |c| c.l_h * c.operator.norm_bound())
    }

    fn factor_c(&self) -> f64 {
        self.constraint.as_ref().map_or(0.0, |c| c.kappa * c.operator.norm_bound())
    }

    /// Step sizes for radius `δ`, or `None` when no iteration is needed.
    pub fn step_sizes(&self, delta: f64) -> Option<StepSizes> {
        let denom = self.factor_h() + self.factor_c() + delta * self.l_q();
        if !(delta > 0.0) || denom == 0.0 {
            return None;
        }
        let tau = delta / denom;
        let sigma_1 = self.coupling.as_ref().map_or(0.0, |c| c.l_h / (delta * c.operator.norm_bound()));
        let sigma_2 = self.constraint.as_ref().map_or(0.0, |c| c.kappa / (delta * c.operator.norm_bound()));
        let lb = self.coupling.as_ref().map_or(0.0, |c| c.operator.norm_bound());
        let la = self.constraint.as_ref().map_or(0.0, |c| c.operator.norm_bound());
        debug_assert!(tau * (sigma_1 * lb * lb + sigma_2 * la * la + self.l_q()) <= 1.0 + 1e-12);
        Some(StepSizes { tau, sigma_1, sigma_2 })
    }

    fn dual_dims(&self) -> (usize, usize) {
        (
            self.coupling.as_ref().map_or(0, |c| c.operator.out_dim()),
            self.constraint.as_ref().map_or(0, |c| c.operator.out_dim()),
        )
    }

    fn initial_duals(&self, warm: Option<&WarmState>) -> Result<(Point, Point)> {
        let (d1, d2) = self.dual_dims();
        let zeros = || (vector::zeros(d1), vector::zeros(d2));
        let Some(w) = warm else { return Ok(zeros()) };
        if w.duals.is_empty() {
            return Ok(zeros());
        }
        if w.duals.len() != 2 || w.duals[0].len() != d1 || w.duals[1].len() != d2 {
            return Err(Error::invalid("warm dual state does not match the operator shapes"));
        }
        Ok((w.duals[0].clone(), w.duals[1].clone()))
    }

    /// Dual part of the Lagrangian at a fixed primal with images `bx = BX`, `ax = AX`.
    fn dual_value(&self, bx: &[Complex64], ax: &[Complex64], y1: &[Complex64], y2: &[Complex64]) -> f64 {
        let mut v = 0.0;
        if let Some(c) = &self.coupling {
            v += vector::dot_re(bx, y1) - (c.conjugate_value)(y1);
        }
        if let Some(c) = &self.constraint {
            v += vector::dot_re(ax, y2) - (c.support)(y2);
        }
        v
    }

    fn images(&self, x: &[Complex64]) -> (Point, Point) {
        (
            self.coupling.as_ref().map_or_else(Vec::new, |c| c.operator.apply(x)),
            self.constraint.as_ref().map_or_else(Vec::new, |c| c.operator.apply(x)),
        )
    }

    /// Runs `iterations` steps with the step sizes for `δ`, reporting every
    /// iterate through `inspect`. Returns the best ergodic primal and the
    /// dual state selected by [`DualOutput`].
    pub fn run_detailed(
        &self,
        delta: f64,
        x0: &[Complex64],
        warm: Option<&WarmState>,
        iterations: u64,
        inspect: &mut dyn FnMut(&PdState),
    ) -> Result<(Point, WarmState)> {
        self.iterate(delta, x0, warm, iterations, Some(inspect), &mut |_, _| {})
    }

    fn iterate(
        &self,
        delta: f64,
        x0: &[Complex64],
        warm: Option<&WarmState>,
        iterations: u64,
        mut inspect: Option<&mut dyn FnMut(&PdState)>,
        observer: Observer<'_>,
    ) -> Result<(Point, WarmState)> {
        let (mut y1, mut y2) = self.initial_duals(warm)?;
        let steps = match self.step_sizes(delta) {
            Some(s) if iterations > 0 => s,
            _ => return Ok((x0.to_vec(), WarmState { duals: vec![y1, y2] })),
        };
        let StepSizes { tau, sigma_1, sigma_2 } = steps;
        let n = x0.len();
        let mut x = x0.to_vec();
        let mut erg_x = vector::zeros(n);
        let mut erg_y1 = vector::zeros(y1.len());
        let mut erg_y2 = vector::zeros(y2.len());
        let mut best_x = x0.to_vec();
        let mut best_merit = (self.merit)(x0);
        let (mut best_bx, mut best_ax) = self.images(x0);
        let mut sel_y1 = y1.clone();
        let mut sel_y2 = y2.clone();
        let mut sel_value = self.dual_value(&best_bx, &best_ax, &sel_y1, &sel_y2);

        for j in 0..iterations {
            let mut grad = match &self.smooth {
                Some((g, _)) => g(&x),
                None => vector::zeros(n),
            };
            if let Some(c) = &self.coupling {
                vector::axpy(1.0, &c.operator.adjoint(&y1), &mut grad);
            }
            if let Some(c) = &self.constraint {
                vector::axpy(1.0, &c.operator.adjoint(&y2), &mut grad);
            }
            let x_next = (self.prox_g)(&vector::combine(1.0, &x, -tau, &grad), tau);
            let w = vector::combine(2.0, &x_next, -1.0, &x);
            if let Some(c) = &self.coupling {
                let bw = c.operator.apply(&w);
                y1 = (c.prox_conjugate)(&vector::combine(1.0, &y1, sigma_1, &bw), sigma_1);
            }
            if let Some(c) = &self.constraint {
                let aw = c.operator.apply(&w);
                let shifted = vector::combine(1.0 / sigma_2, &y2, 1.0, &aw);
                let proj = (c.projection)(&shifted);
                // Moreau: y ← σ(y/σ + Aw) − σ P_C(y/σ + Aw).
                y2 = vector::combine(sigma_2, &shifted, -sigma_2, &proj);
            }
            x = x_next;

            let k = (j + 1) as f64;
            let keep = j as f64 / k;
            running_mean(&mut erg_x, &x, keep, k);
            running_mean(&mut erg_y1, &y1, keep, k);
            running_mean(&mut erg_y2, &y2, keep, k);

            let m = (self.merit)(&erg_x);
            if m < best_merit {
                best_merit = m;
                best_x.clone_from(&erg_x);
                (best_bx, best_ax) = self.images(&best_x);
                sel_value = self.dual_value(&best_bx, &best_ax, &sel_y1, &sel_y2);
            }
            if self.coupling.is_some() || self.constraint.is_some() {
                let cand = self.dual_value(&best_bx, &best_ax, &erg_y1, &erg_y2);
                if cand > sel_value {
                    sel_value = cand;
                    sel_y1.clone_from(&erg_y1);
                    sel_y2.clone_from(&erg_y2);
                }
            }
            if let Some(f) = inspect.as_mut() {
                f(&PdState {
                    iteration: j + 1,
                    primal: x.clone(),
                    dual_1: y1.clone(),
                    dual_2: y2.clone(),
                    ergodic_primal: erg_x.clone(),
                    ergodic_dual_1: erg_y1.clone(),
                    ergodic_dual_2: erg_y2.clone(),
                    best_primal: best_x.clone(),
                    best_merit,
                });
            }
            observer(j + 1, &best_x);
        }
        let duals = match self.dual_output {
            DualOutput::Selected => vec![sel_y1, sel_y2],
            DualOutput::Last => vec![y1, y2],
        };
        Ok((best_x, WarmState { duals }))
    }
}

fn running_mean(avg: &mut [Complex64], x: &[Complex64], keep: f64, k: f64) {
    for (a, v) in avg.iter_mut().zip(x) {
        *a = *a * keep + v / k;
    }
}

impl SolverContract for PrimalDualSolver {
    fn name(&self) -> &str {
        if self.constraint.is_some() {
            "primal_dual_constrained"
        } else {
            "primal_dual"
        }
    }

    fn cost_bound(&self, delta: f64, eps: f64) -> u64 {
        if !(delta > 0.0) {
            return 0;
        }
        ceil_count(delta * (2.0 * self.factor_c() + 2.0 * self.factor_h() + delta * self.l_q()) / eps)
    }

    fn cost_exponents(&self) -> Option<CostExponents> {
        (self.l_q() == 0.0).then(|| CostExponents {
            scale: 2.0 * (self.factor_c() + self.factor_h()),
            d1: 1.0,
            d2: 1.0,
        })
    }

    fn run_for(
        &self,
        delta: f64,
        _eps: f64,
        x0: &[Complex64],
        warm: Option<&WarmState>,
        iterations: u64,
        observer: Observer<'_>,
    ) -> Result<SolverRun> {
        let executed = if self.step_sizes(delta).is_some() { iterations } else { 0 };
        let (point, warm) = self.iterate(delta, x0, warm, executed, None, observer)?;
        Ok(SolverRun { point, warm, iterations: executed })
    }
}
