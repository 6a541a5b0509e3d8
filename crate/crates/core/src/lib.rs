//! Restart schemes for first-order convex optimization under approximate
//! sharpness with unknown constants.
//!
//! The crate is organised bottom-up:
//!
//! - [`problem`] and [`contract`]: the problem abstraction (objective,
//!   feasibility gap, metric) and the solver contract `Γ(δ, ε, x₀)` with its
//!   iteration-cost bound `C_Γ(δ, ε)`.
//! - [`schedule`]: schedule criteria `h` and the lazily enumerated
//!   h-assignment `φ` over grid triples `(i, j, k)`.
//! - [`restart`]: the known-constant restart loop and the grid-search engine.
//! - [`linops`], [`solvers`]: linear operators (dense, subsampled Fourier,
//!   periodic TV gradient) and the first-order methods wired as contracts.
//! - [`problems`]: experiment builders (QCBP, TV-Fourier, SR-LASSO) and data.
//! - [`cli`]: the configuration-driven experiment runner behind the binary.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod contract;
pub mod error;
pub mod linops;
pub mod problem;
pub mod problems;
pub mod restart;
pub mod schedule;
pub mod solvers;
pub mod trace;
pub mod vector;

pub use contract::{predict_total_cost, CostExponents, FnContract, SolverContract, SolverRun, WarmState};
pub use error::{Error, Result};
pub use problem::{Point, ProblemInstance, SharpnessEstimate};
pub use restart::{restart_grid, restart_known, RestartConfig, RestartOutcome};
pub use schedule::{AssignmentEnumerator, GridPoint, ScheduleCriterion, ScheduleMode};
pub use trace::TraceRecord;

pub use num_complex::Complex64;

/// Machine epsilon for `f64` (`2^-52`).
pub const MACHINE_EPSILON: f64 = f64::EPSILON;
