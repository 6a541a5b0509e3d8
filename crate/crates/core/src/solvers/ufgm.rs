//! Universal fast gradient method for `q + g` with Hölder-continuous `∇q`.

use std::fmt;

use num_complex::Complex64;

use super::BestTracker;
use crate::contract::{ceil_count, CostExponents, Observer, SolverContract, SolverRun, WarmState};
use crate::error::{Error, Result};
use crate::problem::{Point, ProxMap, ScalarFn, VectorMap};
use crate::vector;

#[derive(Clone)]
pub struct UfgmSolver {
    q_value: ScalarFn,
    q_gradient: VectorMap,
    g_value: ScalarFn,
    /// `(x, c) ↦ prox_{c·g, Q}(x)`; with `c = 0` this is the projection onto `Q`.
    prox: ProxMap,
    nu: f64,
    m_nu: f64,
    l0: f64,
    doubling_cap: u32,
}

impl fmt::Debug for UfgmSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UfgmSolver")
            .field("nu", &self.nu)
            .field("m_nu", &self.m_nu)
            .field("l0", &self.l0)
            .field("doubling_cap", &self.doubling_cap)
            .finish()
    }
}

/// Details of one UFGM call.
#[derive(Clone, Debug)]
pub struct UfgmReport {
    /// Best `y_k` under `q + g`.
    pub point: Point,
    /// The final iterate `y_N`.
    pub last: Point,
    /// Largest accepted trial constant `2^{i_k} L_k`.
    pub max_accepted_lipschitz: f64,
    pub iterations: u64,
}

impl UfgmSolver {
    /// `nu ∈ [0, 1]` and `m_nu > 0` describe `‖∇q(x) − ∇q(y)‖ ≤ M_ν‖x − y‖^ν`.
    pub fn new(
        q_value: ScalarFn,
        q_gradient: VectorMap,
        g_value: ScalarFn,
        prox: ProxMap,
        nu: f64,
        m_nu: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&nu) {
            return Err(Error::config("nu", "Hölder exponent must lie in [0, 1]"));
        }
        if !(m_nu > 0.0 && m_nu.is_finite()) {
            return Err(Error::config("m_nu", "Hölder constant must be positive"));
        }
        Ok(UfgmSolver { q_value, q_gradient, g_value, prox, nu, m_nu, l0: 1.0, doubling_cap: 60 })
    }

    pub fn with_initial_lipschitz(mut self, l0: f64) -> Self {
        self.l0 = l0;
        self
    }

    pub fn with_doubling_cap(mut self, cap: u32) -> Self {
        self.doubling_cap = cap;
        self
    }

    fn objective(&self, x: &[Complex64]) -> f64 {
        (self.q_value)(x) + (self.g_value)(x)
    }

    pub fn run_detailed(
        &self,
        eps: f64,
        x0: &[Complex64],
        iterations: u64,
        observer: Observer<'_>,
    ) -> Result<UfgmReport> {
        let q = &self.q_value;
        let merit_q = self.q_value.clone();
        let merit_g = self.g_value.clone();
        let mut best = BestTracker::new(std::sync::Arc::new(move |x: &[Complex64]| merit_q(x) + merit_g(x)), x0);
        let mut y = x0.to_vec();
        let mut big_a = 0.0;
        let mut lk = self.l0;
        let mut grad_sum = vector::zeros(x0.len());
        let mut max_accepted: f64 = 0.0;
        for k in 0..iterations {
            let v = (self.prox)(&vector::sub(x0, &grad_sum), big_a);
            let mut accepted = None;
            for i in 0..=self.doubling_cap {
                let lt = lk * 2f64.powi(i as i32);
                let a = (1.0 + (1.0 + 4.0 * lt * big_a).sqrt()) / (2.0 * lt);
                let tau = a / (big_a + a);
                let x = vector::combine(tau, &v, 1.0 - tau, &y);
                let gq = (self.q_gradient)(&x);
                let xhat = (self.prox)(&vector::combine(1.0, &v, -a, &gq), a);
                let y_next = vector::combine(tau, &xhat, 1.0 - tau, &y);
                let diff = vector::sub(&y_next, &x);
                let model = q(&x) + vector::dot_re(&gq, &diff) + 0.5 * lt * vector::norm2_sqr(&diff) + 0.5 * eps * tau;
                if q(&y_next) <= model {
                    accepted = Some((lt, a, gq, y_next));
                    break;
                }
            }
            let (lt, a, gq, y_next) = accepted.ok_or_else(|| {
                Error::Diverged(format!("line search exceeded {} doublings at outer step {}", self.doubling_cap, k + 1))
            })?;
            max_accepted = max_accepted.max(lt);
            vector::axpy(a, &gq, &mut grad_sum);
            big_a += a;
            lk = lt / 2.0;
            y = y_next;
            best.offer(&y);
            observer(k + 1, best.point());
        }
        Ok(UfgmReport { point: best.into_point(), last: y, max_accepted_lipschitz: max_accepted, iterations })
    }
}

impl SolverContract for UfgmSolver {
    fn name(&self) -> &str {
        "ufgm"
    }

    fn cost_bound(&self, delta: f64, eps: f64) -> u64 {
        let e = self.cost_exponents().expect("always available");
        ceil_count(e.scale * delta.powf(e.d1) / eps.powf(e.d2))
    }

    fn cost_exponents(&self) -> Option<CostExponents> {
        let den = 1.0 + 3.0 * self.nu;
        Some(CostExponents {
            scale: 2f64.powf((2.0 + 4.0 * self.nu) / den) * self.m_nu.powf(2.0 / den),
            d1: (2.0 + 2.0 * self.nu) / den,
            d2: 2.0 / den,
        })
    }

    fn run_for(
        &self,
        _delta: f64,
        eps: f64,
        x0: &[Complex64],
        _warm: Option<&WarmState>,
        iterations: u64,
        observer: Observer<'_>,
    ) -> Result<SolverRun> {
        let report = self.run_detailed(eps, x0, iterations, observer)?;
        debug_assert!(self.objective(&report.point) <= self.objective(&report.last));
        Ok(SolverRun { point: report.point, warm: WarmState::default(), iterations })
    }
}
