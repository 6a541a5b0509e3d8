//! Long-run reference optimum `f̂` for error reporting.

use super::ExperimentSetup;
use crate::error::{Error, Result};
use crate::problem::Point;
use crate::restart::restart_grid;
use crate::schedule::ScheduleMode;

/// Smallest accepted oracle budget (inner iterations).
pub const MIN_ORACLE_BUDGET: u64 = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceOptimum {
    /// Smallest observed `f + g_Q`.
    pub value: f64,
    /// Difference between the last two restart plateaus; infinite when
    /// fewer than two restarts happened.
    pub uncertainty: f64,
    pub point: Point,
    pub inner_iterations: u64,
}

impl ReferenceOptimum {
    /// `value − uncertainty`, a conservative estimate of `f̂`.
    pub fn lower_estimate(&self) -> f64 {
        self.value - self.uncertainty
    }
}

/// Runs the grid search over `α` and `β` for `budget` schedule steps and
/// reports the best merit seen.
pub fn reference_optimum(setup: &ExperimentSetup, budget: u64) -> Result<ReferenceOptimum> {
    if budget < MIN_ORACLE_BUDGET {
        return Err(Error::invalid(format!("oracle budget must be at least {MIN_ORACLE_BUDGET}, got {budget}")));
    }
    let cfg = setup.grid_config(ScheduleMode::BothUnknown, budget, None)?;
    let out = restart_grid(&setup.problem, setup.solver.contract(), &setup.x0, &cfg)?;
    let plateaus: Vec<f64> =
        out.trace.iter().filter(|r| r.restart_index > 0).map(|r| r.objective_value + r.feasibility_gap).collect();
    let uncertainty = match plateaus.as_slice() {
        [.., a, b] => (a - b).abs(),
        _ => f64::INFINITY,
    };
    Ok(ReferenceOptimum {
        value: setup.problem.merit(&out.final_point),
        uncertainty,
        point: out.final_point,
        inner_iterations: out.inner_iterations,
    })
}
