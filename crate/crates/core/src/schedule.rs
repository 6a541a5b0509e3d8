//! Schedule criteria `h` and the lazily enumerated h-assignment `φ`.
//!
//! For integer exponents the points with `h = m` are found by solving
//! `m = y₁^{c1} y₂^{c2} y₃` directly. For real exponents the enumerator
//! collects all points in successive windows `(lo, 2·lo]` of `h` and sorts them.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::MACHINE_EPSILON;

/// Which sharpness constants are searched over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    /// Search over `α` and `β`: `h = (|i|+1)^{c1} (j+1)^{c2} k`.
    BothUnknown,
    /// `α` fixed (`i = 0`), search over `β`: `h = (j+1)^{c2} k`.
    AlphaKnown,
    /// `β` fixed (`j = 0`), search over `α`: `h = (|i|+1)^{c1} k`.
    BetaKnown,
    /// No search: `h = k` on `{0}×{0}×ℕ`.
    BothKnown,
    /// Finite index ranges: `h = k`.
    RangesKnown,
}

impl ScheduleMode {
    pub const ALL: [ScheduleMode; 5] = [
        ScheduleMode::BothUnknown,
        ScheduleMode::AlphaKnown,
        ScheduleMode::BetaKnown,
        ScheduleMode::BothKnown,
        ScheduleMode::RangesKnown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScheduleMode::BothUnknown => "both_unknown",
            ScheduleMode::AlphaKnown => "alpha_known",
            ScheduleMode::BetaKnown => "beta_known",
            ScheduleMode::BothKnown => "both_known",
            ScheduleMode::RangesKnown => "ranges_known",
        }
    }

    fn searches_i(self) -> bool {
        matches!(self, ScheduleMode::BothUnknown | ScheduleMode::BetaKnown)
    }

    fn searches_j(self) -> bool {
        matches!(self, ScheduleMode::BothUnknown | ScheduleMode::AlphaKnown)
    }
}

impl fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScheduleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScheduleMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::config("mode", format!("unknown schedule mode `{s}`")))
    }
}

/// Grid triple `(i, j, k)`: `α_i = a^i α₀`, `β_j = b^j β₀`, and `k` the
/// iteration allowance for that instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPoint {
    pub i: i64,
    pub j: u64,
    pub k: u64,
}

impl GridPoint {
    pub const fn new(i: i64, j: u64, k: u64) -> Self {
        GridPoint { i, j, k }
    }

    /// Deterministic within-class order `(|i|, i, j, k)`.
    fn order_key(&self) -> (u64, i64, u64, u64) {
        (self.i.unsigned_abs(), self.i, self.j, self.k)
    }
}

/// Inclusive index ranges for [`ScheduleMode::RangesKnown`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridRanges {
    pub i_min: i64,
    pub i_max: i64,
    pub j_min: u64,
    pub j_max: u64,
}

/// Largest index kept by the default clamp for a grid base: `⌊log_base(1/ε_mach)⌋`.
pub fn machine_clamp(base: f64) -> u64 {
    ((1.0 / MACHINE_EPSILON).ln() / base.ln()).floor().max(1.0) as u64
}

/// `b = 1 + 1/log(1/ε)`, the base that keeps the β-search overhead bounded
/// for a target accuracy `ε`.
pub fn epsilon_dependent_base(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(1.0 + 1.0 / (1.0 / eps).ln())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleCriterion {
    mode: ScheduleMode,
    c1: f64,
    c2: f64,
    ranges: Option<GridRanges>,
    clamp_i: u64,
    clamp_j: u64,
}

const UNCLAMPED: u64 = u32::MAX as u64;

impl ScheduleCriterion {
    /// Criterion for every mode except [`ScheduleMode::RangesKnown`]. Index
    /// clamps start effectively unbounded; see [`Self::with_clamps`].
    pub fn new(mode: ScheduleMode, c1: f64, c2: f64) -> Result<Self> {
        if mode == ScheduleMode::RangesKnown {
            return Err(Error::config("mode", "ranges_known needs explicit ranges"));
        }
        Self::validate_exponents(c1, c2)?;
        Ok(ScheduleCriterion { mode, c1, c2, ranges: None, clamp_i: UNCLAMPED, clamp_j: UNCLAMPED })
    }

    pub fn ranges_known(ranges: GridRanges) -> Result<Self> {
        if ranges.i_min > ranges.i_max {
            return Err(Error::config("i_range", "i_min exceeds i_max"));
        }
        if ranges.j_min > ranges.j_max {
            return Err(Error::config("j_range", "j_min exceeds j_max"));
        }
        Ok(ScheduleCriterion {
            mode: ScheduleMode::RangesKnown,
            c1: 2.0,
            c2: 2.0,
            ranges: Some(ranges),
            clamp_i: UNCLAMPED,
            clamp_j: UNCLAMPED,
        })
    }

    fn validate_exponents(c1: f64, c2: f64) -> Result<()> {
        if !(c1 > 1.0 && c1.is_finite()) {
            return Err(Error::config("c1", format!("must exceed 1, got {c1}")));
        }
        if !(c2 > 1.0 && c2.is_finite()) {
            return Err(Error::config("c2", format!("must exceed 1, got {c2}")));
        }
        Ok(())
    }

    /// Drops grid points with `|i| > clamp_i` or `j > clamp_j`.
    pub fn with_clamps(mut self, clamp_i: u64, clamp_j: u64) -> Result<Self> {
        self.clamp_i = clamp_i;
        self.clamp_j = clamp_j;
        if let Some(r) = self.ranges {
            let i_ok = r.i_min <= clamp_i as i64 && r.i_max >= -(clamp_i as i64);
            if !i_ok || r.j_min > clamp_j {
                return Err(Error::config("ranges", "index ranges lie entirely outside the clamps"));
            }
        }
        Ok(self)
    }

    /// Clamps `⌊log_a(1/ε_mach)⌋` and `⌊log_b(1/ε_mach)⌋`.
    pub fn with_machine_clamps(self, a: f64, b: f64) -> Result<Self> {
        self.with_clamps(machine_clamp(a), machine_clamp(b))
    }

    pub fn mode(&self) -> ScheduleMode {
        self.mode
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn ranges(&self) -> Option<GridRanges> {
        self.ranges
    }

    pub fn clamps(&self) -> (u64, u64) {
        (self.clamp_i, self.clamp_j)
    }

    /// Whether `(i, j)` is an admissible index pair for this mode (clamps ignored).
    fn pair_in_mode(&self, i: i64, j: u64) -> bool {
        match self.mode {
            ScheduleMode::BothUnknown => true,
            ScheduleMode::AlphaKnown => i == 0,
            ScheduleMode::BetaKnown => j == 0,
            ScheduleMode::BothKnown => i == 0 && j == 0,
            ScheduleMode::RangesKnown => {
                let r = self.ranges.expect("ranges present in ranges_known mode");
                (r.i_min..=r.i_max).contains(&i) && (r.j_min..=r.j_max).contains(&j)
            }
        }
    }

    fn pair_clamped(&self, i: i64, j: u64) -> bool {
        i.unsigned_abs() <= self.clamp_i && j <= self.clamp_j
    }

    /// Membership in the search set `S` including the clamps.
    pub fn contains(&self, p: GridPoint) -> bool {
        p.k >= 1 && self.pair_in_mode(p.i, p.j) && self.pair_clamped(p.i, p.j)
    }

    /// The `(i, j)`-dependent factor of `h`.
    fn weight(&self, i: i64, j: u64) -> f64 {
        let wi = || (i.unsigned_abs() as f64 + 1.0).powf(self.c1);
        let wj = || (j as f64 + 1.0).powf(self.c2);
        match self.mode {
            ScheduleMode::BothUnknown => wi() * wj(),
            ScheduleMode::AlphaKnown => wj(),
            ScheduleMode::BetaKnown => wi(),
            ScheduleMode::BothKnown | ScheduleMode::RangesKnown => 1.0,
        }
    }

    pub fn h_value(&self, p: GridPoint) -> Result<f64> {
        if p.k == 0 || !self.pair_in_mode(p.i, p.j) {
            return Err(Error::invalid(format!(
                "({}, {}, {}) is outside the search set of mode {}",
                p.i, p.j, p.k, self.mode
            )));
        }
        Ok(self.weight(p.i, p.j) * p.k as f64)
    }

    fn integral(c: f64) -> Option<u32> {
        let r = c.round();
        ((c - r).abs() < 1e-12 && r <= 64.0).then_some(r as u32)
    }

    /// Integer exponents for the factors this mode actually uses.
    fn integer_exponents(&self) -> Option<(u32, u32)> {
        let e1 = if self.mode.searches_i() { Self::integral(self.c1)? } else { 0 };
        let e2 = if self.mode.searches_j() { Self::integral(self.c2)? } else { 0 };
        Some((e1, e2))
    }

    /// The `(i, j)` pairs of the search set, in `(|i|, i, j)` order. Only
    /// meaningful for modes with a finite pair set.
    fn finite_pairs(&self) -> Vec<(i64, u64)> {
        let mut pairs = Vec::new();
        match self.mode {
            ScheduleMode::BothKnown => pairs.push((0, 0)),
            ScheduleMode::RangesKnown => {
                let r = self.ranges.expect("ranges present");
                for i in r.i_min..=r.i_max {
                    for j in r.j_min..=r.j_max {
                        if self.pair_clamped(i, j) {
                            pairs.push((i, j));
                        }
                    }
                }
            }
            _ => unreachable!("infinite pair set"),
        }
        pairs.sort_by_key(|&(i, j)| (i.unsigned_abs(), i, j));
        pairs
    }

    /// All points of `S` (within the clamps) with `h = m`, ordered by
    /// `(|i|, i, j, k)`. Requires integer exponents.
    pub fn class_members(&self, m: u64) -> Result<Vec<GridPoint>> {
        if m < 1 {
            return Err(Error::invalid("class index m must be at least 1"));
        }
        let (e1, e2) =
            self.integer_exponents().ok_or_else(|| Error::invalid("class_members needs integer exponents"))?;
        let mut out = Vec::new();
        match self.mode {
            ScheduleMode::BothKnown | ScheduleMode::RangesKnown => {
                out.extend(self.finite_pairs().into_iter().map(|(i, j)| GridPoint::new(i, j, m)));
            }
            _ => {
                let m128 = m as u128;
                let y1_values: Vec<u64> = if self.mode.searches_i() {
                    (1..).take_while(|&y: &u64| (y as u128).pow(e1) <= m128 && y - 1 <= self.clamp_i).collect()
                } else {
                    vec![1]
                };
                for y1 in y1_values {
                    let p1 = (y1 as u128).pow(e1);
                    if m128 % p1 != 0 {
                        continue;
                    }
                    let rest = m128 / p1;
                    let y2_values: Vec<u64> = if self.mode.searches_j() {
                        (1..).take_while(|&y: &u64| (y as u128).pow(e2) <= rest && y - 1 <= self.clamp_j).collect()
                    } else {
                        vec![1]
                    };
                    for y2 in y2_values {
                        let p2 = (y2 as u128).pow(e2);
                        if rest % p2 != 0 {
                            continue;
                        }
                        let k = (rest / p2) as u64;
                        let a = (y1 - 1) as i64;
                        let j = y2 - 1;
                        out.push(GridPoint::new(a, j, k));
                        if a != 0 {
                            out.push(GridPoint::new(-a, j, k));
                        }
                    }
                }
            }
        }
        out.sort_by_key(GridPoint::order_key);
        Ok(out)
    }

    /// `|{p ∈ S : h(p) ≤ τ}|`, counted over every admissible `(i, j)` pair.
    pub fn sublevel_count(&self, tau: f64) -> u64 {
        if !(tau >= 1.0) {
            return 0;
        }
        let count_k = |w: f64| -> u64 {
            let mut k = (tau / w).floor() as u64;
            while k > 0 && w * k as f64 > tau {
                k -= 1;
            }
            while w * (k + 1) as f64 <= tau {
                k += 1;
            }
            k
        };
        match self.mode {
            ScheduleMode::BothKnown | ScheduleMode::RangesKnown => self.finite_pairs().len() as u64 * count_k(1.0),
            _ => {
                let mut total = 0;
                let a_max = if self.mode.searches_i() { self.clamp_i } else { 0 };
                let j_max = if self.mode.searches_j() { self.clamp_j } else { 0 };
                for a in 0..=a_max {
                    let signs = if a == 0 { 1 } else { 2 };
                    if self.weight(a as i64, 0) > tau {
                        break;
                    }
                    for j in 0..=j_max {
                        let w = self.weight(a as i64, j);
                        if w > tau {
                            break;
                        }
                        total += signs * count_k(w);
                    }
                }
                total
            }
        }
    }

    pub fn enumerator(&self) -> AssignmentEnumerator {
        AssignmentEnumerator::new(self.clone())
    }
}

/// The stream `φ(1), φ(2), …` of an h-assignment.
#[derive(Clone, Debug)]
pub struct AssignmentEnumerator {
    criterion: ScheduleCriterion,
    integer: bool,
    class_index: u64,
    horizon: f64,
    buffer: VecDeque<GridPoint>,
    emitted: u64,
}

impl AssignmentEnumerator {
    pub fn new(criterion: ScheduleCriterion) -> Self {
        let integer = criterion.integer_exponents().is_some();
        AssignmentEnumerator { criterion, integer, class_index: 0, horizon: 0.0, buffer: VecDeque::new(), emitted: 0 }
    }

    pub fn criterion(&self) -> &ScheduleCriterion {
        &self.criterion
    }

    /// Number of points emitted so far.
    pub fn position(&self) -> u64 {
        self.emitted
    }

    /// The current class index `m` (integer mode) or window upper end.
    pub fn class_index(&self) -> u64 {
        if self.integer {
            self.class_index
        } else {
            self.horizon as u64
        }
    }

    pub fn next_point(&mut self) -> GridPoint {
        while self.buffer.is_empty() {
            self.refill();
        }
        self.emitted += 1;
        self.buffer.pop_front().expect("buffer refilled")
    }

    fn refill(&mut self) {
        if self.integer {
            self.class_index += 1;
            let members = self.criterion.class_members(self.class_index).expect("integer exponents and m ≥ 1");
            self.buffer.extend(members);
        } else {
            let lo = self.horizon;
            let hi = if lo == 0.0 { 1.0 } else { 2.0 * lo };
            self.horizon = hi;
            let mut batch = self.window(lo, hi);
            batch.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.order_key().cmp(&b.1.order_key())));
            self.buffer.extend(batch.into_iter().map(|(_, p)| p));
        }
    }

    /// Points with `lo < h ≤ hi` paired with their h-values.
    fn window(&self, lo: f64, hi: f64) -> Vec<(f64, GridPoint)> {
        let c = &self.criterion;
        let mut out = Vec::new();
        let mut visit = |i: i64, j: u64| {
            let w = c.weight(i, j);
            let k_start = ((lo / w).floor() as u64).max(1);
            let mut k = k_start.saturating_sub(1).max(1);
            while w * k as f64 <= hi {
                let h = w * k as f64;
                if h > lo {
                    out.push((h, GridPoint::new(i, j, k)));
                }
                k += 1;
            }
        };
        match c.mode {
            ScheduleMode::BothKnown | ScheduleMode::RangesKnown => {
                for (i, j) in c.finite_pairs() {
                    visit(i, j);
                }
            }
            _ => {
                let a_max = if c.mode.searches_i() { c.clamp_i } else { 0 };
                let j_max = if c.mode.searches_j() { c.clamp_j } else { 0 };
                for a in 0..=a_max {
                    if c.weight(a as i64, 0) > hi {
                        break;
                    }
                    for j in 0..=j_max {
                        if c.weight(a as i64, j) > hi {
                            break;
                        }
                        visit(a as i64, j);
                        if a != 0 {
                            visit(-(a as i64), j);
                        }
                    }
                }
            }
        }
        out
    }
}

impl Iterator for AssignmentEnumerator {
    type Item = GridPoint;

    fn next(&mut self) -> Option<GridPoint> {
        Some(self.next_point())
    }
}
