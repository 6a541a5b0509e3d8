//! Restart engines: the known-constant loop and the grid search over
//! `(α_i, β_j)` driven by an h-assignment.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contract::{SolverContract, SolverRun, WarmState};
use crate::error::{Error, Result};
use crate::problem::{Point, ProblemInstance};
use crate::schedule::{GridPoint, ScheduleCriterion, ScheduleMode};
use crate::trace::TraceRecord;
use crate::MACHINE_EPSILON;

/// Default lower clamp for `δ` and `ε`.
pub const DEFAULT_EPS_FLOOR: f64 = 10.0 * MACHINE_EPSILON;

/// `δ` for the next restart of instance `(i, j)`.
pub fn delta_update(alpha_i: f64, beta_j: f64, beta0: f64, b: f64, eps_prev: f64) -> f64 {
    let base = 2.0 * eps_prev / alpha_i;
    if base > 1.0 {
        base.powf((b / beta_j).min(1.0 / beta0))
    } else {
        base.powf(1.0 / beta_j)
    }
}

/// Restart and grid constants minimizing the worst-case total cost for a
/// solver whose bound scales like `δ^{d1}/ε^{d2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefaultParameters {
    pub r: f64,
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
}

pub fn default_parameters(d1: f64, d2: f64, beta_hint: Option<f64>, mode: ScheduleMode) -> Result<DefaultParameters> {
    if !(d1 > 0.0 && d2 > 0.0) {
        return Err(Error::invalid("cost exponents d1, d2 must be positive"));
    }
    let c1 = 2.0;
    let beta = match (mode, beta_hint) {
        (ScheduleMode::BetaKnown | ScheduleMode::BothKnown, Some(b)) => b,
        _ => 1.0,
    };
    Ok(DefaultParameters { r: (-1.0 / d2).exp(), a: (c1 * beta / d1).exp(), b: std::f64::consts::E, c1, c2: 2.0 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestartConfig {
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub eps0: f64,
    /// Budget `t`: number of schedule steps, which bounds the inner iterations.
    pub total_inner_iterations: u64,
    pub criterion: ScheduleCriterion,
    pub eps_floor: f64,
    /// Emit a trace row every this many inner iterations; 0 keeps restart rows only.
    pub checkpoint_stride: u64,
    /// Carry solver state (dual iterates) between restarts of one instance.
    pub warm_start_duals: bool,
}

impl RestartConfig {
    /// Configuration with `r = e⁻¹`, `a = e²`, `b = e`, `α₀ = β₀ = 1`.
    pub fn new(criterion: ScheduleCriterion, eps0: f64, total_inner_iterations: u64) -> Self {
        RestartConfig {
            a: 2f64.exp(),
            b: std::f64::consts::E,
            r: (-1f64).exp(),
            alpha0: 1.0,
            beta0: 1.0,
            eps0,
            total_inner_iterations,
            criterion,
            eps_floor: DEFAULT_EPS_FLOOR,
            checkpoint_stride: 0,
            warm_start_duals: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 1.0 && self.a.is_finite()) {
            return Err(Error::config("a", "must exceed 1"));
        }
        if !(self.b > 1.0 && self.b.is_finite()) {
            return Err(Error::config("b", "must exceed 1"));
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::config("r", "must lie in (0, 1)"));
        }
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return Err(Error::config("alpha0", "must be positive"));
        }
        if !(self.beta0 >= 1.0 && self.beta0.is_finite()) {
            return Err(Error::config("beta0", "must be at least 1"));
        }
        if !(self.eps0 > 0.0 && self.eps0.is_finite()) {
            return Err(Error::config("eps0", "must be positive and finite"));
        }
        if !(self.eps_floor > 0.0) {
            return Err(Error::config("eps_floor", "must be positive"));
        }
        Ok(())
    }

    fn alpha(&self, i: i64) -> f64 {
        self.a.powf(i as f64) * self.alpha0
    }

    fn beta(&self, j: u64) -> f64 {
        self.b.powf(j as f64) * self.beta0
    }
}

/// Bookkeeping of one grid instance `(i, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceState {
    /// Completed restarts `U`.
    pub restarts: u64,
    /// Inner iterations consumed `V`.
    pub iterations: u64,
    /// Current tolerance `ε_{i,j,U}`.
    pub eps_current: f64,
    pub warm: WarmState,
}

impl InstanceState {
    fn new(eps0: f64) -> Self {
        InstanceState { restarts: 0, iterations: 0, eps_current: eps0, warm: WarmState::default() }
    }
}

#[derive(Clone, Debug)]
pub struct RestartOutcome {
    pub final_point: Point,
    pub trace: Vec<TraceRecord>,
    pub per_instance: BTreeMap<(i64, u64), InstanceState>,
    /// Inner iterations actually consumed.
    pub inner_iterations: u64,
    pub restarts: u64,
}

/// Keeps the incumbent and the trace while solver runs progress.
struct Tracker<'a> {
    problem: &'a ProblemInstance,
    incumbent: Point,
    incumbent_merit: f64,
    trace: Vec<TraceRecord>,
    t: u64,
    restarts: u64,
    stride: u64,
}

impl<'a> Tracker<'a> {
    fn new(problem: &'a ProblemInstance, x0: &[num_complex::Complex64], stride: u64) -> Result<Self> {
        problem.check_dimension(x0, "x0")?;
        let merit = problem.merit(x0);
        let mut tracker = Tracker {
            problem,
            incumbent: x0.to_vec(),
            incumbent_merit: merit,
            trace: Vec::new(),
            t: 0,
            restarts: 0,
            stride,
        };
        let row = tracker.row(x0, GridPoint::new(0, 0, 0));
        tracker.trace.push(row);
        if !merit.is_finite() {
            return Err(tracker.abort("objective at x0 is not finite"));
        }
        Ok(tracker)
    }

    fn row(&self, x: &[num_complex::Complex64], p: GridPoint) -> TraceRecord {
        TraceRecord {
            inner_iteration: self.t,
            restart_index: self.restarts,
            grid_i: p.i,
            grid_j: p.j,
            grid_k: p.k,
            objective_value: self.problem.objective(x),
            objective_error: self.problem.objective_error(x),
            feasibility_gap: self.problem.feasibility_gap(x),
            reconstruction_error: self.problem.reconstruction_error(x),
        }
    }

    /// Checkpoint row at inner step `j` of a run lasting `n` steps. The last
    /// step is left to the restart row.
    fn observe(&mut self, j: u64, n: u64, candidate: &[num_complex::Complex64], p: GridPoint) {
        if self.stride == 0 || j >= n || (self.t + j) % self.stride != 0 {
            return;
        }
        let merit = self.problem.merit(candidate);
        let t_saved = self.t;
        self.t += j;
        let row = if merit < self.incumbent_merit { self.row(candidate, p) } else { self.row(&self.incumbent, p) };
        self.t = t_saved;
        self.trace.push(row);
    }

    fn commit(&mut self, run: SolverRun, p: GridPoint) -> Result<()> {
        self.t += run.iterations;
        self.restarts += 1;
        let merit = self.problem.merit(&run.point);
        if !merit.is_finite() {
            return Err(self.abort_ref(format!("non-finite objective after restart {}", self.restarts)));
        }
        self.problem.check_dimension(&run.point, "solver output")?;
        if merit < self.incumbent_merit {
            self.incumbent = run.point;
            self.incumbent_merit = merit;
        }
        let row = self.row(&self.incumbent, p);
        match self.trace.last_mut() {
            Some(last) if last.inner_iteration == row.inner_iteration => *last = row,
            _ => self.trace.push(row),
        }
        Ok(())
    }

    fn abort_ref(&mut self, reason: impl Into<String>) -> Error {
        Error::Aborted { reason: reason.into(), partial_trace: Box::new(std::mem::take(&mut self.trace)) }
    }

    fn abort(mut self, reason: impl Into<String>) -> Error {
        self.abort_ref(reason)
    }

    fn finish(self, per_instance: BTreeMap<(i64, u64), InstanceState>) -> RestartOutcome {
        RestartOutcome {
            final_point: self.incumbent,
            trace: self.trace,
            per_instance,
            inner_iterations: self.t,
            restarts: self.restarts,
        }
    }

    /// One observed solver call from the incumbent.
    fn fire(
        &mut self,
        contract: &dyn SolverContract,
        delta: f64,
        eps: f64,
        iterations: u64,
        warm: Option<&WarmState>,
        p: GridPoint,
    ) -> Result<SolverRun> {
        let x = self.incumbent.clone();
        let result = contract.run_for(delta, eps, &x, warm, iterations, &mut |j, cand| {
            self.observe(j, iterations, cand, p);
        });
        match result {
            Ok(run) => Ok(run),
            Err(e) => {
                // Keep the trace gathered so far with the failure.
                let trace = std::mem::take(&mut self.trace);
                Err(match e {
                    Error::Aborted { reason, .. } => Error::Aborted { reason, partial_trace: Box::new(trace) },
                    other => other,
                })
            }
        }
    }
}

/// Parameters of the known-constant restart loop.
#[derive(Clone, Debug, PartialEq)]
pub struct KnownRestartConfig {
    pub eps0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub r: f64,
    /// Number of outer restarts `t`.
    pub restarts: u64,
    pub eps_floor: f64,
    pub checkpoint_stride: u64,
    pub warm_start_duals: bool,
}

impl KnownRestartConfig {
    pub fn new(eps0: f64, alpha: f64, beta: f64, r: f64, restarts: u64) -> Self {
        KnownRestartConfig {
            eps0,
            alpha,
            beta,
            r,
            restarts,
            eps_floor: DEFAULT_EPS_FLOOR,
            checkpoint_stride: 0,
            warm_start_duals: true,
        }
    }
}

/// Restarts with known `(α, β)`: `ε_{k+1} = rε_k`, `δ_{k+1} = (2ε_k/α)^{1/β}`.
pub fn restart_known(
    problem: &ProblemInstance,
    contract: &dyn SolverContract,
    x0: &[num_complex::Complex64],
    cfg: &KnownRestartConfig,
) -> Result<RestartOutcome> {
    if !(cfg.alpha > 0.0) {
        return Err(Error::invalid("alpha must be positive"));
    }
    if !(cfg.beta >= 1.0) {
        return Err(Error::invalid("beta must be at least 1"));
    }
    if !(cfg.r > 0.0 && cfg.r < 1.0) {
        return Err(Error::invalid("r must lie in (0, 1)"));
    }
    if !(cfg.eps0 > 0.0) {
        return Err(Error::invalid("eps0 must be positive"));
    }
    let mut tracker = Tracker::new(problem, x0, cfg.checkpoint_stride)?;
    let mut state = InstanceState::new(cfg.eps0);
    for k in 0..cfg.restarts {
        let eps_next = (cfg.r * state.eps_current).max(cfg.eps_floor);
        let delta = (2.0 * state.eps_current / cfg.alpha).powf(1.0 / cfg.beta).max(cfg.eps_floor);
        let n = contract.cost_bound(delta, eps_next);
        let p = GridPoint::new(0, 0, k + 1);
        let warm = cfg.warm_start_duals.then_some(&state.warm);
        let run = tracker.fire(contract, delta, eps_next, n, warm, p)?;
        state.iterations += run.iterations;
        state.restarts += 1;
        state.eps_current = eps_next;
        state.warm = run.warm.clone();
        tracker.commit(run, p)?;
    }
    let mut per_instance = BTreeMap::new();
    per_instance.insert((0, 0), state);
    Ok(tracker.finish(per_instance))
}

/// Grid-search restarts over `(α_i, β_j)` in the order of the configured
/// h-assignment, always warm-starting from the global best point.
pub fn restart_grid(
    problem: &ProblemInstance,
    contract: &dyn SolverContract,
    x0: &[num_complex::Complex64],
    cfg: &RestartConfig,
) -> Result<RestartOutcome> {
    cfg.validate()?;
    let mut tracker = Tracker::new(problem, x0, cfg.checkpoint_stride)?;
    let mut states: BTreeMap<(i64, u64), InstanceState> = BTreeMap::new();
    let mut phi = cfg.criterion.enumerator();
    for _ in 0..cfg.total_inner_iterations {
        let p = phi.next_point();
        let state = states.entry((p.i, p.j)).or_insert_with(|| InstanceState::new(cfg.eps0));
        let (delta, eps_next) = next_tolerances(cfg, p, state.eps_current);
        let cost = contract.cost_bound(delta, eps_next);
        if state.iterations.saturating_add(cost) > p.k {
            continue;
        }
        let warm = cfg.warm_start_duals.then_some(&state.warm);
        let run = tracker.fire(contract, delta, eps_next, cost, warm, p)?;
        state.iterations += run.iterations;
        state.restarts += 1;
        state.eps_current = eps_next;
        state.warm = run.warm.clone();
        tracker.commit(run, p)?;
    }
    Ok(tracker.finish(states))
}

fn next_tolerances(cfg: &RestartConfig, p: GridPoint, eps_current: f64) -> (f64, f64) {
    let eps_next = (cfg.r * eps_current).max(cfg.eps_floor);
    let delta = delta_update(cfg.alpha(p.i), cfg.beta(p.j), cfg.beta0, cfg.b, eps_current).max(cfg.eps_floor);
    (delta, eps_next)
}

/// A scheduled solver call of the parallel engine.
#[derive(Clone, Copy, Debug)]
struct Firing {
    step: u64,
    point: GridPoint,
    delta: f64,
    eps: f64,
    cost: u64,
}

/// Result of one firing as seen by its own instance.
struct FiringResult {
    step: u64,
    point: GridPoint,
    iterations: u64,
    merit: f64,
    row: TraceRecord,
}

/// Grid search with every `(i, j)` instance running its own restart chain
/// from `x₀` on a worker pool, merged by smallest `f + g_Q`.
///
/// Which calls fire depends only on the cost bound, so the schedule is
/// planned up front. Ties in the merge go to the instance that reached the
/// value first in schedule order, so the result does not depend on the
/// number of threads. Only restart rows are traced.
pub fn restart_grid_parallel(
    problem: &ProblemInstance,
    contract: &dyn SolverContract,
    x0: &[num_complex::Complex64],
    cfg: &RestartConfig,
    threads: usize,
) -> Result<RestartOutcome> {
    cfg.validate()?;
    problem.check_dimension(x0, "x0")?;

    let mut plan: BTreeMap<(i64, u64), (InstanceState, Vec<Firing>)> = BTreeMap::new();
    let mut phi = cfg.criterion.enumerator();
    for step in 0..cfg.total_inner_iterations {
        let p = phi.next_point();
        let (state, firings) = plan.entry((p.i, p.j)).or_insert_with(|| (InstanceState::new(cfg.eps0), Vec::new()));
        let (delta, eps_next) = next_tolerances(cfg, p, state.eps_current);
        let cost = contract.cost_bound(delta, eps_next);
        if state.iterations.saturating_add(cost) > p.k {
            continue;
        }
        state.iterations += cost;
        state.restarts += 1;
        state.eps_current = eps_next;
        firings.push(Firing { step, point: p, delta, eps: eps_next, cost });
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot build worker pool: {e}")))?;

    let chains: Vec<((i64, u64), &Vec<Firing>)> = plan.iter().map(|(key, (_, f))| (*key, f)).collect();
    let results: Vec<Result<(Point, WarmState, Vec<FiringResult>)>> =
        pool.install(|| chains.par_iter().map(|(_, firings)| run_chain(problem, contract, x0, cfg, firings)).collect());

    let mut finals = BTreeMap::new();
    let mut all: Vec<(usize, FiringResult)> = Vec::new();
    let mut per_instance = BTreeMap::new();
    for (idx, (((key, _), (planned, _)), res)) in chains.iter().zip(plan.values()).zip(results).enumerate() {
        let (point, warm, firings) = res?;
        let mut state = planned.clone();
        state.warm = warm;
        state.iterations = firings.iter().map(|f| f.iterations).sum();
        per_instance.insert(*key, state);
        finals.insert(idx, point);
        all.extend(firings.into_iter().map(|f| (idx, f)));
    }
    all.sort_by_key(|(_, f)| f.step);

    let mut trace = Vec::with_capacity(all.len() + 1);
    let initial_merit = problem.merit(x0);
    trace.push(TraceRecord {
        inner_iteration: 0,
        restart_index: 0,
        grid_i: 0,
        grid_j: 0,
        grid_k: 0,
        objective_value: problem.objective(x0),
        objective_error: problem.objective_error(x0),
        feasibility_gap: problem.feasibility_gap(x0),
        reconstruction_error: problem.reconstruction_error(x0),
    });
    let mut best: Option<(usize, f64, TraceRecord)> = None;
    let mut t = 0;
    let mut restarts = 0;
    for (idx, f) in all {
        t += f.iterations;
        restarts += 1;
        let improves = match &best {
            Some((_, m, _)) => f.merit < *m,
            None => f.merit < initial_merit,
        };
        if improves {
            best = Some((idx, f.merit, f.row));
        }
        let mut row = match &best {
            Some((_, _, r)) => r.clone(),
            None => trace[0].clone(),
        };
        row.inner_iteration = t;
        row.restart_index = restarts;
        row.grid_i = f.point.i;
        row.grid_j = f.point.j;
        row.grid_k = f.point.k;
        match trace.last_mut() {
            Some(last) if last.inner_iteration == t => *last = row,
            _ => trace.push(row),
        }
    }
    let final_point = match best {
        Some((idx, _, _)) => finals.remove(&idx).expect("instance result present"),
        None => x0.to_vec(),
    };
    Ok(RestartOutcome { final_point, trace, per_instance, inner_iterations: t, restarts })
}

fn run_chain(
    problem: &ProblemInstance,
    contract: &dyn SolverContract,
    x0: &[num_complex::Complex64],
    cfg: &RestartConfig,
    firings: &[Firing],
) -> Result<(Point, WarmState, Vec<FiringResult>)> {
    let mut x = x0.to_vec();
    let mut merit = problem.merit(&x);
    let mut warm = WarmState::default();
    let mut out = Vec::with_capacity(firings.len());
    for f in firings {
        let w = cfg.warm_start_duals.then_some(&warm);
        let run = contract.run_for(f.delta, f.eps, &x, w, f.cost, &mut |_, _| {})?;
        problem.check_dimension(&run.point, "solver output")?;
        let z_merit = problem.merit(&run.point);
        if !z_merit.is_finite() {
            return Err(Error::Aborted {
                reason: format!("non-finite objective at grid point ({}, {}, {})", f.point.i, f.point.j, f.point.k),
                partial_trace: Box::default(),
            });
        }
        if z_merit < merit {
            x = run.point;
            merit = z_merit;
        }
        warm = run.warm;
        out.push(FiringResult {
            step: f.step,
            point: f.point,
            iterations: run.iterations,
            merit,
            row: TraceRecord {
                inner_iteration: 0,
                restart_index: 0,
                grid_i: f.point.i,
                grid_j: f.point.j,
                grid_k: f.point.k,
                objective_value: problem.objective(&x),
                objective_error: problem.objective_error(&x),
                feasibility_gap: problem.feasibility_gap(&x),
                reconstruction_error: problem.reconstruction_error(&x),
            },
        });
    }
    Ok((x, warm, out))
}

/// Runs the solver once for `iterations` steps without restarts, tracing
/// the same way as the restart engines.
pub fn run_unrestarted(
    problem: &ProblemInstance,
    contract: &dyn SolverContract,
    x0: &[num_complex::Complex64],
    delta: f64,
    eps: f64,
    iterations: u64,
    checkpoint_stride: u64,
) -> Result<RestartOutcome> {
    let mut tracker = Tracker::new(problem, x0, checkpoint_stride)?;
    let p = GridPoint::new(0, 0, 1);
    if iterations > 0 {
        let run = tracker.fire(contract, delta, eps, iterations, None, p)?;
        tracker.commit(run, p)?;
    }
    Ok(tracker.finish(BTreeMap::new()))
}

/// Schedule mode implied by which constants are treated as known.
pub fn mode_for(alpha_known: bool, beta_known: bool) -> ScheduleMode {
    match (alpha_known, beta_known) {
        (true, true) => ScheduleMode::BothKnown,
        (true, false) => ScheduleMode::AlphaKnown,
        (false, true) => ScheduleMode::BetaKnown,
        (false, false) => ScheduleMode::BothUnknown,
    }
}
