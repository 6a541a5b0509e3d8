//! Builds experiments from a configuration, runs them and writes results.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind, Scheme};
use crate::error::{Error, Result};
use crate::linops::MaskKind;
use crate::problems::{
    gen_fourier_qcbp, gen_gaussian_qcbp, gen_synthetic_srlasso, gen_tv_fourier, load_tabular_dataset, qcbp_problem,
    reference_optimum, srlasso_from_data, srlasso_problem, tv_problem, ExperimentSetup, ReferenceOptimum, SolverHandle,
    TvOptions,
};
use crate::restart::{
    default_parameters, restart_grid, restart_grid_parallel, run_unrestarted, RestartConfig, RestartOutcome,
};
use crate::schedule::{ScheduleCriterion, ScheduleMode};
use crate::trace::{write_trace_file, TraceRecord};

/// Default noise levels per experiment.
const QCBP_SIGMA: f64 = 1e-6;
const SRLASSO_LAMBDA: f64 = 2.0;

/// Worker cap from `RESTARTKIT_THREADS`, else the available parallelism.
pub fn thread_cap() -> usize {
    std::env::var("RESTARTKIT_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// A built experiment plus the noise level used for NESTA baselines.
pub struct Built {
    pub setup: ExperimentSetup,
    pub sigma_noise: Option<f64>,
    pub reference: Option<ReferenceOptimum>,
}

pub fn build_experiment(cfg: &ExperimentConfig) -> Result<Built> {
    let p = &cfg.problem;
    let (mut setup, sigma_noise) = match cfg.experiment {
        ExperimentKind::QcbpGaussian => {
            let sigma = p.sigma.unwrap_or(QCBP_SIGMA);
            let mut inst =
                gen_gaussian_qcbp(p.n.unwrap_or(128), p.m.unwrap_or(60), p.s.unwrap_or(10), sigma, cfg.seed)?;
            if let Some(k) = p.kappa {
                inst.kappa = k;
            }
            (qcbp_problem(&inst)?, Some(sigma))
        }
        ExperimentKind::QcbpFourier => {
            let sigma = p.sigma.unwrap_or(QCBP_SIGMA);
            let kind = p.mask_kind.unwrap_or(MaskKind::PowerDensity);
            let mut inst =
                gen_fourier_qcbp(p.n.unwrap_or(256), p.m.unwrap_or(64), p.s.unwrap_or(8), sigma, kind, cfg.seed)?;
            if let Some(k) = p.kappa {
                inst.kappa = k;
            }
            (qcbp_problem(&inst)?, Some(sigma))
        }
        ExperimentKind::TvFourier => {
            let d = TvOptions::default();
            let opts = TvOptions {
                side: p.side.unwrap_or(d.side),
                sampling_rate: p.sampling_rate.unwrap_or(d.sampling_rate),
                sigma_noise: p.sigma.unwrap_or(d.sigma_noise),
                mask_kind: p.mask_kind.unwrap_or(d.mask_kind),
                density_exponent: p.density_exponent.unwrap_or(d.density_exponent),
                radial_lines: p.radial_lines,
            };
            let inst = gen_tv_fourier(&opts, cfg.seed)?;
            (tv_problem(&inst)?, Some(opts.sigma_noise))
        }
        ExperimentKind::Srlasso => {
            let inst = match &p.dataset {
                Some(ds) => {
                    let data = load_tabular_dataset(&ds.path, ds.format, ds.name)?;
                    let lambda = p.lambda.or(ds.name.map(|k| k.default_lambda())).unwrap_or(SRLASSO_LAMBDA);
                    srlasso_from_data(&data, lambda)?
                }
                None => gen_synthetic_srlasso(
                    p.m.unwrap_or(50),
                    p.n.unwrap_or(100),
                    p.s.unwrap_or(5),
                    p.label_noise.unwrap_or(0.1),
                    p.lambda.unwrap_or(SRLASSO_LAMBDA),
                    cfg.seed,
                )?,
            };
            (srlasso_problem(&inst)?, None)
        }
    };
    if let Some(a) = cfg.restart.alpha0 {
        setup.alpha0 = a;
    }
    if let Some(b) = cfg.restart.beta0 {
        setup.beta0 = b;
    }
    if let Some(e) = cfg.restart.eps0 {
        setup.eps0 = e;
    }
    let mut reference = None;
    if let Some(f) = p.reference_optimum {
        setup.problem.set_reference_optimum(Some(f));
    } else if let Some(budget) = p.reference_budget {
        let r = reference_optimum(&setup, budget)?;
        setup.problem.set_reference_optimum(Some(r.value));
        reference = Some(r);
    }
    Ok(Built { setup, sigma_noise, reference })
}

/// Restart configuration for a grid scheme.
pub fn restart_config(cfg: &ExperimentConfig, setup: &ExperimentSetup, stride: u64) -> Result<RestartConfig> {
    let mode =
        cfg.scheme.mode().ok_or_else(|| Error::config("scheme", "scheme `none` has no restart configuration"))?;
    let r = &cfg.restart;
    let exps = setup.solver.contract().cost_exponents();
    let beta_hint = matches!(mode, ScheduleMode::BetaKnown | ScheduleMode::BothKnown).then_some(setup.beta0);
    let defaults = match exps {
        Some(e) => Some(default_parameters(e.d1, e.d2, beta_hint, mode)?),
        None => None,
    };
    let pick = |v: Option<f64>, d: Option<f64>, field: &str| {
        v.or(d).ok_or_else(|| Error::config(field, "required: the solver's cost bound has no default for it"))
    };
    let a = pick(r.a, defaults.map(|d| d.a), "restart.a")?;
    let b = pick(r.b, defaults.map(|d| d.b), "restart.b")?;
    let rate = pick(r.r, defaults.map(|d| d.r), "restart.r")?;
    let criterion = match mode {
        ScheduleMode::RangesKnown => {
            let ranges = r.ranges.ok_or_else(|| Error::config("restart.ranges", "required by scheme `ranges`"))?;
            ScheduleCriterion::ranges_known(ranges)?
        }
        _ => ScheduleCriterion::new(mode, r.c1.unwrap_or(2.0), r.c2.unwrap_or(2.0))?,
    }
    .with_machine_clamps(a, b)?;
    let mut rc = RestartConfig::new(criterion, setup.eps0, cfg.budget());
    rc.a = a;
    rc.b = b;
    rc.r = rate;
    rc.alpha0 = setup.alpha0;
    rc.beta0 = setup.beta0;
    rc.checkpoint_stride = stride;
    rc.warm_start_duals = r.warm_start_duals.unwrap_or(true);
    rc.validate()?;
    Ok(rc)
}

/// Stride of checkpoint rows: every iteration up to dimension 1000, else every 10th.
pub fn default_stride(dimension: usize) -> u64 {
    if dimension <= 1000 {
        1
    } else {
        10
    }
}

/// Which error column the decade summary follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMetric {
    ReconstructionError,
    ObjectiveError,
}

impl ErrorMetric {
    fn of(self, r: &TraceRecord) -> Option<f64> {
        match self {
            ErrorMetric::ReconstructionError => r.reconstruction_error,
            ErrorMetric::ObjectiveError => r.objective_error,
        }
    }
}

/// First inner iteration with error `≤ 10^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecadeHit {
    pub exponent: i32,
    pub iterations: u64,
}

/// Lowest decade reported when the error reaches exactly zero.
const DECADE_FLOOR: i32 = -16;

/// For each power of ten between the first and the smallest error in the
/// trace, the first inner iteration at which the error is at or below it.
pub fn iterations_to_decades(trace: &[TraceRecord], metric: ErrorMetric) -> Vec<DecadeHit> {
    let errs: Vec<(u64, f64)> =
        trace.iter().filter_map(|r| metric.of(r).map(|e| (r.inner_iteration, e.max(0.0)))).collect();
    let Some(&(_, first)) = errs.first() else { return Vec::new() };
    let decade = |e: f64| if e > 0.0 { e.log10().ceil() as i32 } else { DECADE_FLOOR };
    let smallest = errs.iter().map(|&(_, e)| e).fold(f64::INFINITY, f64::min);
    let (top, bottom) = (decade(first), decade(smallest).max(DECADE_FLOOR));
    (bottom..=top)
        .rev()
        .filter_map(|q| {
            let bound = 10f64.powi(q);
            errs.iter().find(|&&(_, e)| e <= bound).map(|&(t, _)| DecadeHit { exponent: q, iterations: t })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: ExperimentKind,
    pub scheme: Scheme,
    pub seed: u64,
    pub solver: String,
    pub dimension: usize,
    pub budget: u64,
    pub inner_iterations: u64,
    pub restarts: u64,
    pub final_objective: f64,
    pub final_feasibility_gap: f64,
    pub final_objective_error: Option<f64>,
    pub final_reconstruction_error: Option<f64>,
    pub reference_optimum: Option<f64>,
    pub reference_uncertainty: Option<f64>,
    pub error_metric: Option<ErrorMetric>,
    pub decades: Vec<DecadeHit>,
    pub trace_path: PathBuf,
}

pub struct RunReport {
    pub outcome: RestartOutcome,
    pub summary: Summary,
}

/// Builds the problem, runs the configured scheme, and writes the trace
/// CSV and the summary JSON. A run that aborts still writes its partial
/// trace before the error is returned.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<RunReport> {
    cfg.validate()?;
    let built = build_experiment(cfg)?;
    let setup = &built.setup;
    let contract = setup.solver.contract();
    let stride = cfg.checkpoint_stride.unwrap_or_else(|| default_stride(setup.problem.dimension()));
    let trace_path = cfg.trace_path();

    let result = match cfg.scheme {
        Scheme::None => {
            let (delta, eps) = match &setup.solver {
                SolverHandle::Nesta(n) => {
                    let mu = cfg.baseline.mu.or(built.sigma_noise).unwrap_or(1e-6);
                    (1.0, n.eps_for_mu(mu))
                }
                // Primal-dual steps depend on δ only.
                _ => (cfg.baseline.delta.unwrap_or(1.0), 1.0),
            };
            run_unrestarted(&setup.problem, contract, &setup.x0, delta, eps, cfg.budget(), stride)
        }
        _ => {
            let rc = restart_config(cfg, setup, stride)?;
            if cfg.restart.parallel.unwrap_or(false) {
                restart_grid_parallel(&setup.problem, contract, &setup.x0, &rc, threads)
            } else {
                restart_grid(&setup.problem, contract, &setup.x0, &rc)
            }
        }
    };
    let outcome = match result {
        Ok(o) => o,
        Err(Error::Aborted { reason, partial_trace }) => {
            write_trace_file(&trace_path, &partial_trace)?;
            return Err(Error::Aborted { reason, partial_trace });
        }
        Err(e) => return Err(e),
    };
    write_trace_file(&trace_path, &outcome.trace)?;

    let x = &outcome.final_point;
    let p = &setup.problem;
    let metric = if p.ground_truth().is_some() {
        Some(ErrorMetric::ReconstructionError)
    } else if p.reference_optimum().is_some() {
        Some(ErrorMetric::ObjectiveError)
    } else {
        None
    };
    let summary = Summary {
        experiment: cfg.experiment,
        scheme: cfg.scheme,
        seed: cfg.seed,
        solver: contract.name().to_string(),
        dimension: p.dimension(),
        budget: cfg.budget(),
        inner_iterations: outcome.inner_iterations,
        restarts: outcome.restarts,
        final_objective: p.objective(x),
        final_feasibility_gap: p.feasibility_gap(x),
        final_objective_error: p.objective_error(x),
        final_reconstruction_error: p.reconstruction_error(x),
        reference_optimum: p.reference_optimum(),
        reference_uncertainty: built.reference.as_ref().map(|r| r.uncertainty),
        error_metric: metric,
        decades: metric.map_or_else(Vec::new, |m| iterations_to_decades(&outcome.trace, m)),
        trace_path: trace_path.clone(),
    };
    write_json(&cfg.summary_path(), &summary)?;
    Ok(RunReport { outcome, summary })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Parameters a sweep may vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Alpha,
    Beta,
    Sigma,
    Lambda,
    Mu,
}

impl SweepParam {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "alpha" => Ok(SweepParam::Alpha),
            "beta" => Ok(SweepParam::Beta),
            "sigma" => Ok(SweepParam::Sigma),
            "lambda" => Ok(SweepParam::Lambda),
            "mu" => Ok(SweepParam::Mu),
            other => Err(Error::config(
                "param",
                format!("unknown sweep parameter `{other}` (expected alpha, beta, sigma, lambda or mu)"),
            )),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::Beta => "beta",
            SweepParam::Sigma => "sigma",
            SweepParam::Lambda => "lambda",
            SweepParam::Mu => "mu",
        }
    }

    fn apply(self, cfg: &mut ExperimentConfig, value: f64) {
        match self {
            SweepParam::Alpha => cfg.restart.alpha0 = Some(value),
            SweepParam::Beta => cfg.restart.beta0 = Some(value),
            SweepParam::Sigma => cfg.problem.sigma = Some(value),
            SweepParam::Lambda => cfg.problem.lambda = Some(value),
            SweepParam::Mu => cfg.baseline.mu = Some(value),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub inner_iterations: u64,
    pub final_objective: f64,
    pub final_objective_error: Option<f64>,
    pub final_reconstruction_error: Option<f64>,
    pub trace_path: PathBuf,
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{stem}-{suffix}.{ext}"))
}

/// Path of the merged sweep table.
pub fn sweep_table_path(cfg: &ExperimentConfig, param: SweepParam) -> PathBuf {
    suffixed(&cfg.trace_path(), &format!("sweep-{}", param.as_str()))
}

/// One run per value with a shared seed; traces go to
/// `<stem>-<param>=<value>.csv` and a merged table to
/// `<stem>-sweep-<param>.csv`. An empty value list does nothing.
pub fn sweep(cfg: &ExperimentConfig, param: SweepParam, values: &[f64], threads: usize) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Ok(Vec::new());
    }
    let configs: Vec<ExperimentConfig> = values
        .iter()
        .map(|&v| {
            let mut c = cfg.clone();
            param.apply(&mut c, v);
            c.output_path = Some(suffixed(&cfg.trace_path(), &format!("{}={v:e}", param.as_str())));
            c.validate().map(|_| c)
        })
        .collect::<Result<_>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    let reports: Vec<Result<RunReport>> = pool.install(|| configs.par_iter().map(|c| run_experiment(c, 1)).collect());
    let mut rows = Vec::with_capacity(values.len());
    for (&value, report) in values.iter().zip(reports) {
        let s = report?.summary;
        rows.push(SweepRow {
            param,
            value,
            inner_iterations: s.inner_iterations,
            final_objective: s.final_objective,
            final_objective_error: s.final_objective_error,
            final_reconstruction_error: s.final_reconstruction_error,
            trace_path: s.trace_path,
        });
    }
    let table = sweep_table_path(cfg, param);
    if let Some(parent) = table.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut w = csv::Writer::from_path(&table)?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(rows)
}

/// Long-run reference optimum of the configured problem.
pub fn oracle(cfg: &ExperimentConfig, budget: u64) -> Result<ReferenceOptimum> {
    cfg.validate()?;
    let mut plain = cfg.clone();
    plain.problem.reference_budget = None;
    plain.problem.reference_optimum = None;
    let built = build_experiment(&plain)?;
    reference_optimum(&built.setup, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: u64, e: f64) -> TraceRecord {
        TraceRecord {
            inner_iteration: t,
            restart_index: 0,
            grid_i: 0,
            grid_j: 0,
            grid_k: 0,
            objective_value: 0.0,
            objective_error: None,
            feasibility_gap: 0.0,
            reconstruction_error: Some(e),
        }
    }

    #[test]
    fn decades_from_trace() {
        let trace = vec![row(0, 3.0), row(5, 0.5), row(9, 0.04), row(12, 0.0099)];
        let hits = iterations_to_decades(&trace, ErrorMetric::ReconstructionError);
        let expect = [(1, 0), (0, 5), (-1, 9), (-2, 12)];
        assert_eq!(hits.len(), expect.len());
        for (h, (q, t)) in hits.iter().zip(expect) {
            assert_eq!((h.exponent, h.iterations), (q, t));
        }
        assert!(iterations_to_decades(&trace, ErrorMetric::ObjectiveError).is_empty());
    }

    #[test]
    fn zero_error_reaches_floor() {
        let hits = iterations_to_decades(&[row(0, 0.5), row(3, 0.0)], ErrorMetric::ReconstructionError);
        assert_eq!(hits.last().unwrap().exponent, DECADE_FLOOR);
        assert_eq!(hits.last().unwrap().iterations, 3);
    }

    #[test]
    fn stride_rule() {
        assert_eq!(default_stride(128), 1);
        assert_eq!(default_stride(1000), 1);
        assert_eq!(default_stride(4096), 10);
    }

    #[test]
    fn sweep_param_names() {
        for p in [SweepParam::Alpha, SweepParam::Beta, SweepParam::Sigma, SweepParam::Lambda, SweepParam::Mu] {
            assert_eq!(SweepParam::parse(p.as_str()).unwrap(), p);
        }
        assert!(SweepParam::parse("gamma").unwrap_err().is_config_error());
    }

    #[test]
    fn suffix_paths() {
        assert_eq!(suffixed(Path::new("out/a.csv"), "sigma=1e-6"), PathBuf::from("out/a-sigma=1e-6.csv"));
    }
}
