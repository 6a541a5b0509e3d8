use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FourierShape;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskKind {
    BernoulliUniform,
    Radial,
    PowerDensity,
}

impl MaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MaskKind::BernoulliUniform => "bernoulli_uniform",
            MaskKind::Radial => "radial",
            MaskKind::PowerDensity => "power_density",
        }
    }
}

impl fmt::Display for MaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [MaskKind::BernoulliUniform, MaskKind::Radial, MaskKind::PowerDensity]
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::config("mask_kind", format!("unknown mask kind `{s}`")))
    }
}

/// Sorted, distinct sample indices `Ω ⊆ {0, …, n−1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingMask {
    pub n: usize,
    pub indices: Vec<usize>,
    pub kind: MaskKind,
    pub seed: u64,
}

impl SamplingMask {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Knobs of the structured mask families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaskOptions {
    /// Decay exponent `γ_d` of the density `(1 + ‖ω‖)^{-γ_d}`.
    pub density_exponent: f64,
    /// Number of radial lines; chosen from the target size when absent.
    pub radial_lines: Option<usize>,
}

impl Default for MaskOptions {
    fn default() -> Self {
        MaskOptions { density_exponent: 1.0, radial_lines: None }
    }
}

/// Signed frequency of DFT index `k` on a length-`n` axis.
fn centered(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

fn frequency_norm(shape: FourierShape, idx: usize) -> f64 {
    match shape {
        FourierShape::Line(n) => centered(idx, n).abs(),
        FourierShape::Square(r) => centered(idx / r, r).hypot(centered(idx % r, r)),
    }
}

pub fn sample_mask(
    shape: FourierShape,
    m_target: usize,
    kind: MaskKind,
    seed: u64,
    options: MaskOptions,
) -> Result<SamplingMask> {
    let n = shape.len();
    if m_target < 1 || m_target > n {
        return Err(Error::invalid(format!("mask size {m_target} must lie in [1, {n}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = match kind {
        MaskKind::BernoulliUniform => {
            let p = m_target as f64 / n as f64;
            (0..n).filter(|_| rng.random::<f64>() < p).collect()
        }
        MaskKind::PowerDensity => {
            let gamma = options.density_exponent;
            if !(gamma >= 0.0) {
                return Err(Error::config("density_exponent", "must be nonnegative"));
            }
            let weights: Vec<f64> = (0..n).map(|i| (1.0 + frequency_norm(shape, i)).powf(-gamma)).collect();
            let c = density_scale(&weights, m_target as f64);
            weights
                .iter()
                .enumerate()
                .filter(|(_, w)| rng.random::<f64>() < (c * *w).min(1.0))
                .map(|(i, _)| i)
                .collect()
        }
        MaskKind::Radial => {
            let r = match shape {
                FourierShape::Square(r) => r,
                FourierShape::Line(_) => return Err(Error::invalid("radial masks need a square image shape")),
            };
            match options.radial_lines {
                Some(lines) => radial_indices(r, lines),
                None => {
                    let mut lines = 1;
                    loop {
                        let idx = radial_indices(r, lines);
                        if idx.len() >= m_target || lines >= 4 * r {
                            break idx;
                        }
                        lines += 1;
                    }
                }
            }
        }
    };
    Ok(SamplingMask { n, indices, kind, seed })
}

/// `c` with `Σ min(1, c·wᵢ) = target`, by bisection.
fn density_scale(weights: &[f64], target: f64) -> f64 {
    let total = |c: f64| weights.iter().map(|w| (c * w).min(1.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1.0);
    while total(hi) < target {
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Frequencies on `lines` lines through the origin, closed under `ω ↦ −ω`.
fn radial_indices(r: usize, lines: usize) -> Vec<usize> {
    let mut set = BTreeSet::new();
    let half = r as f64 / 2.0;
    let wrap = |v: f64| -> usize { (v as i64).rem_euclid(r as i64) as usize };
    for l in 0..lines.max(1) {
        let theta = std::f64::consts::PI * l as f64 / lines.max(1) as f64;
        let (s, c) = theta.sin_cos();
        let steps = (2.0 * half / 0.5) as i64;
        for step in 0..=steps {
            let t = -half + 0.5 * step as f64;
            let (u, v) = ((t * c).round(), (t * s).round());
            for (a, b) in [(u, v), (-u, -v)] {
                set.insert(wrap(a) * r + wrap(b));
            }
        }
    }
    set.into_iter().collect()
}

pub fn write_mask(path: &Path, mask: &SamplingMask) -> Result<()> {
    let mut text = format!("{} {} {} {}\n", mask.n, mask.indices.len(), mask.kind, mask.seed);
    for i in &mask.indices {
        text.push_str(&i.to_string());
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn read_mask(path: &Path) -> Result<SamplingMask> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::ingestion("line 1", "missing mask header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(Error::ingestion("line 1", "header must read `n m kind seed`"));
    }
    let parse = |s: &str, what: &str| -> Result<u64> {
        s.parse().map_err(|_| Error::ingestion("line 1", format!("bad {what} `{s}`")))
    };
    let n = parse(fields[0], "n")? as usize;
    let m = parse(fields[1], "m")? as usize;
    let kind: MaskKind = fields[2].parse()?;
    let seed = parse(fields[3], "seed")?;
    let mut indices = Vec::with_capacity(m);
    for (ln, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: usize =
            line.parse().map_err(|_| Error::ingestion(format!("line {}", ln + 2), format!("bad index `{line}`")))?;
        if v >= n || indices.last().is_some_and(|&last| last >= v) {
            return Err(Error::ingestion(format!("line {}", ln + 2), "indices must be sorted, unique and below n"));
        }
        indices.push(v);
    }
    if indices.len() != m {
        return Err(Error::ingestion("line 1", format!("header declares {m} indices, found {}", indices.len())));
    }
    Ok(SamplingMask { n, indices, kind, seed })
}
