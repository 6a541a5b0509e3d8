//! JSON experiment configuration and its validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::MaskKind;
use crate::problems::{DatasetFormat, KnownDataset};
use crate::schedule::{GridRanges, ScheduleMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    QcbpGaussian,
    QcbpFourier,
    TvFourier,
    Srlasso,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::QcbpGaussian => "qcbp_gaussian",
            ExperimentKind::QcbpFourier => "qcbp_fourier",
            ExperimentKind::TvFourier => "tv_fourier",
            ExperimentKind::Srlasso => "srlasso",
        }
    }

    /// Problem fields that apply to this experiment.
    fn allowed_fields(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::QcbpGaussian => &["n", "m", "s", "sigma", "kappa"],
            ExperimentKind::QcbpFourier => &["n", "m", "s", "sigma", "kappa", "mask_kind"],
            ExperimentKind::TvFourier => {
                &["side", "sampling_rate", "sigma", "mask_kind", "density_exponent", "radial_lines"]
            }
            ExperimentKind::Srlasso => {
                &["m", "n", "s", "label_noise", "lambda", "dataset", "reference_optimum", "reference_budget"]
            }
        }
    }

    /// Inner-iteration budget when the configuration gives none.
    pub fn default_budget(self) -> u64 {
        match self {
            ExperimentKind::QcbpGaussian | ExperimentKind::QcbpFourier => 20_000,
            ExperimentKind::TvFourier => 5_000,
            ExperimentKind::Srlasso => 20_000,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// The solver alone, no restarts.
    None,
    /// Restarts with the configured `(α₀, β₀)` taken as exact.
    Fixed,
    /// Grid over `α` with `β = β₀`.
    GridAlpha,
    /// Grid over `β` with `α = α₀`.
    GridBeta,
    /// Grid over both constants.
    #[default]
    GridBoth,
    /// Grid over both constants restricted to index ranges.
    Ranges,
}

impl Scheme {
    pub const ALL: [Scheme; 6] =
        [Scheme::None, Scheme::Fixed, Scheme::GridAlpha, Scheme::GridBeta, Scheme::GridBoth, Scheme::Ranges];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::None => "none",
            Scheme::Fixed => "fixed",
            Scheme::GridAlpha => "grid_alpha",
            Scheme::GridBeta => "grid_beta",
            Scheme::GridBoth => "grid_both",
            Scheme::Ranges => "ranges",
        }
    }

    /// Schedule mode of the grid engine; `None` for the unrestarted baseline.
    pub fn mode(self) -> Option<ScheduleMode> {
        match self {
            Scheme::None => None,
            Scheme::Fixed => Some(ScheduleMode::BothKnown),
            Scheme::GridAlpha => Some(ScheduleMode::BetaKnown),
            Scheme::GridBeta => Some(ScheduleMode::AlphaKnown),
            Scheme::GridBoth => Some(ScheduleMode::BothUnknown),
            Scheme::Ranges => Some(ScheduleMode::RangesKnown),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::config("scheme", format!("unknown scheme `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetParams {
    pub path: PathBuf,
    pub format: DatasetFormat,
    #[serde(default)]
    pub name: Option<KnownDataset>,
}

/// Problem parameters; which ones apply depends on the experiment.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask_kind: Option<MaskKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radial_lines: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetParams>,
    /// Known `f̂` for the objective-error column.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_optimum: Option<f64>,
    /// Compute `f̂` with the long-run oracle before the run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_budget: Option<u64>,
}

impl ProblemParams {
    fn set_fields(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut check = |name: &'static str, set: bool| {
            if set {
                out.push(name);
            }
        };
        check("n", self.n.is_some());
        check("m", self.m.is_some());
        check("s", self.s.is_some());
        check("sigma", self.sigma.is_some());
        check("kappa", self.kappa.is_some());
        check("mask_kind", self.mask_kind.is_some());
        check("side", self.side.is_some());
        check("sampling_rate", self.sampling_rate.is_some());
        check("density_exponent", self.density_exponent.is_some());
        check("radial_lines", self.radial_lines.is_some());
        check("lambda", self.lambda.is_some());
        check("label_noise", self.label_noise.is_some());
        check("dataset", self.dataset.is_some());
        check("reference_optimum", self.reference_optimum.is_some());
        check("reference_budget", self.reference_budget.is_some());
        out
    }
}

/// Restart parameters. Unset constants take the cost-optimal defaults of
/// the solver; unset `α₀`, `β₀` take the experiment defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestartParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    /// Inner-iteration budget `t`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranges: Option<GridRanges>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warm_start_duals: Option<bool>,
    /// Run grid instances on a worker pool.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallel: Option<bool>,
}

/// Parameters of the unrestarted baseline.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineParams {
    /// Step-size radius for primal-dual solvers (default 1).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Smoothing parameter for NESTA (default `ς`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub problem: ProblemParams,
    #[serde(default)]
    pub restart: RestartParams,
    #[serde(default)]
    pub baseline: BaselineParams,
    /// Trace row every this many inner iterations; 0 keeps restart rows only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_stride: Option<u64>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            scheme: Scheme::default(),
            seed: 0,
            output_path: None,
            problem: ProblemParams::default(),
            restart: RestartParams::default(),
            baseline: BaselineParams::default(),
            checkpoint_stride: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn budget(&self) -> u64 {
        self.restart.t.unwrap_or_else(|| self.experiment.default_budget())
    }

    /// Trace path; defaults to `<experiment>-<scheme>.csv`.
    pub fn trace_path(&self) -> PathBuf {
        self.output_path.clone().unwrap_or_else(|| PathBuf::from(format!("{}-{}.csv", self.experiment, self.scheme)))
    }

    /// Summary path: the trace path with extension `.summary.json`.
    pub fn summary_path(&self) -> PathBuf {
        self.trace_path().with_extension("summary.json")
    }

    /// Checks ranges and cross-field compatibility before anything runs.
    pub fn validate(&self) -> Result<()> {
        let allowed = self.experiment.allowed_fields();
        if let Some(f) = self.problem.set_fields().into_iter().find(|f| !allowed.contains(f)) {
            return Err(Error::config(
                format!("problem.{f}"),
                format!("not a parameter of experiment `{}`", self.experiment),
            ));
        }
        let p = &self.problem;
        positive_usize("problem.n", p.n)?;
        positive_usize("problem.m", p.m)?;
        positive_usize("problem.side", p.side)?;
        positive_usize("problem.radial_lines", p.radial_lines)?;
        nonnegative("problem.sigma", p.sigma)?;
        nonnegative("problem.label_noise", p.label_noise)?;
        nonnegative("problem.density_exponent", p.density_exponent)?;
        positive("problem.kappa", p.kappa)?;
        positive("problem.lambda", p.lambda)?;
        if let Some(rate) = p.sampling_rate {
            if !(rate > 0.0 && rate <= 1.0) {
                return Err(Error::config("problem.sampling_rate", "must lie in (0, 1]"));
            }
        }
        if let (Some(n), Some(m)) = (p.n, p.m) {
            if self.experiment != ExperimentKind::Srlasso && m > n {
                return Err(Error::config("problem.m", format!("must not exceed n = {n}")));
            }
        }
        if let (Some(n), Some(s)) = (p.n, p.s) {
            if s > n {
                return Err(Error::config("problem.s", format!("must not exceed n = {n}")));
            }
        }
        if p.dataset.is_some() && (p.m.is_some() || p.n.is_some() || p.s.is_some() || p.label_noise.is_some()) {
            return Err(Error::config("problem.dataset", "synthetic sizes cannot be combined with a dataset"));
        }
        if p.reference_optimum.is_some() && p.reference_budget.is_some() {
            return Err(Error::config("problem.reference_budget", "conflicts with problem.reference_optimum"));
        }
        if self.experiment == ExperimentKind::TvFourier
            && p.radial_lines.is_some()
            && p.mask_kind != Some(MaskKind::Radial)
        {
            return Err(Error::config("problem.radial_lines", "only applies to radial masks"));
        }
        if self.experiment == ExperimentKind::QcbpFourier && p.mask_kind == Some(MaskKind::Radial) {
            return Err(Error::config("problem.mask_kind", "radial masks need a 2-D image"));
        }

        let r = &self.restart;
        above("restart.a", r.a, 1.0)?;
        above("restart.b", r.b, 1.0)?;
        positive("restart.c1", r.c1)?;
        positive("restart.c2", r.c2)?;
        positive("restart.alpha0", r.alpha0)?;
        positive("restart.eps0", r.eps0)?;
        if let Some(v) = r.r {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::config("restart.r", "must lie in (0, 1)"));
            }
        }
        if let Some(b0) = r.beta0 {
            if !(b0 >= 1.0 && b0.is_finite()) {
                return Err(Error::config("restart.beta0", "must be at least 1"));
            }
        }
        match (self.scheme, &r.ranges) {
            (Scheme::Ranges, None) => return Err(Error::config("restart.ranges", "required by scheme `ranges`")),
            (Scheme::Ranges, Some(g)) if g.i_min > g.i_max || g.j_min > g.j_max => {
                return Err(Error::config("restart.ranges", "minimum exceeds maximum"));
            }
            (s, Some(_)) if s != Scheme::Ranges => {
                return Err(Error::config("restart.ranges", format!("not used by scheme `{s}`")));
            }
            _ => {}
        }
        if self.scheme == Scheme::None {
            for (name, set) in [
                ("restart.a", r.a.is_some()),
                ("restart.b", r.b.is_some()),
                ("restart.r", r.r.is_some()),
                ("restart.c1", r.c1.is_some()),
                ("restart.c2", r.c2.is_some()),
                ("restart.parallel", r.parallel.is_some()),
            ] {
                if set {
                    return Err(Error::config(name, "not used by scheme `none`"));
                }
            }
        }
        if self.scheme == Scheme::Fixed && (r.c1.is_some() || r.c2.is_some() || r.a.is_some() || r.b.is_some()) {
            return Err(Error::config("restart", "grid constants a, b, c1, c2 are not used by scheme `fixed`"));
        }

        let uses_nesta = self.experiment == ExperimentKind::TvFourier;
        if uses_nesta && self.baseline.delta.is_some() {
            return Err(Error::config("baseline.delta", "NESTA baselines are set by baseline.mu"));
        }
        if !uses_nesta && self.baseline.mu.is_some() {
            return Err(Error::config("baseline.mu", "only NESTA baselines use a smoothing parameter"));
        }
        positive("baseline.delta", self.baseline.delta)?;
        positive("baseline.mu", self.baseline.mu)?;
        Ok(())
    }
}

fn positive(field: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(Error::config(field, "must be positive and finite")),
        _ => Ok(()),
    }
}

fn nonnegative(field: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x >= 0.0 && x.is_finite()) => Err(Error::config(field, "must be nonnegative and finite")),
        _ => Ok(()),
    }
}

fn above(field: &str, v: Option<f64>, bound: f64) -> Result<()> {
    match v {
        Some(x) if !(x > bound && x.is_finite()) => Err(Error::config(field, format!("must exceed {bound}"))),
        _ => Ok(()),
    }
}

fn positive_usize(field: &str, v: Option<usize>) -> Result<()> {
    match v {
        Some(0) => Err(Error::config(field, "must be positive")),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(err: Error) -> String {
        match err {
            Error::Config { field, .. } => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment": "qcbp_gaussian"}"#).unwrap();
        assert_eq!(cfg.scheme, Scheme::GridBoth);
        assert_eq!(cfg.budget(), 20_000);
        assert_eq!(cfg.trace_path(), PathBuf::from("qcbp_gaussian-grid_both.csv"));
        assert_eq!(cfg.summary_path(), PathBuf::from("qcbp_gaussian-grid_both.summary.json"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ExperimentConfig::from_json(r#"{"experiment": "srlasso", "bogus": 1}"#).unwrap_err();
        assert!(err.is_config_error());
    }

    #[test]
    fn field_names_in_errors() {
        let bad = |json: &str| field_of(ExperimentConfig::from_json(json).unwrap_err());
        assert_eq!(bad(r#"{"experiment": "srlasso", "problem": {"side": 8}}"#), "problem.side");
        assert_eq!(bad(r#"{"experiment": "qcbp_gaussian", "restart": {"r": 1.5}}"#), "restart.r");
        assert_eq!(bad(r#"{"experiment": "qcbp_gaussian", "scheme": "ranges"}"#), "restart.ranges");
        assert_eq!(bad(r#"{"experiment": "qcbp_gaussian", "baseline": {"mu": 1e-3}}"#), "baseline.mu");
        assert_eq!(bad(r#"{"experiment": "tv_fourier", "baseline": {"delta": 1}}"#), "baseline.delta");
        assert_eq!(bad(r#"{"experiment": "qcbp_gaussian", "problem": {"n": 10, "m": 20}}"#), "problem.m");
        assert_eq!(bad(r#"{"experiment": "qcbp_gaussian", "scheme": "none", "restart": {"a": 3}}"#), "restart.a");
    }

    #[test]
    fn json_round_trip() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::TvFourier);
        cfg.problem.side = Some(32);
        cfg.restart.t = Some(100);
        cfg.baseline.mu = Some(1e-6);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn scheme_names() {
        for s in Scheme::ALL {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!(Scheme::GridAlpha.mode(), Some(ScheduleMode::BetaKnown));
        assert!("bogus".parse::<Scheme>().is_err());
    }
}
