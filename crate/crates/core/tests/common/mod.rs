//! Shared fixtures: random vectors and test problems with known minimizers.
#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use restartkit::linops::IdentityOperator;
use restartkit::problem::{ScalarFn, VectorMap};
use restartkit::solvers::prox::{
    huber_gradient, project_l2_ball, project_l2_ball_origin, prox_l1, prox_sqrt_loss_conjugate,
};
use restartkit::solvers::{ConstraintBlock, CouplingBlock, NestaSolver, NesterovSolver, PrimalDualSolver, UfgmSolver};
use restartkit::vector;
use restartkit::{Complex64, Point, ProblemInstance, SolverContract};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn real_vec(rng: &mut ChaCha8Rng, n: usize) -> Point {
    (0..n).map(|_| Complex64::new(rng.sample(StandardNormal), 0.0)).collect()
}

pub fn complex_vec(rng: &mut ChaCha8Rng, n: usize) -> Point {
    (0..n).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect()
}

pub fn unit(rng: &mut ChaCha8Rng, n: usize, complex: bool) -> Point {
    let v = if complex { complex_vec(rng, n) } else { real_vec(rng, n) };
    let s = vector::norm2(&v);
    vector::scale(1.0 / s, &v)
}

/// Soft thresholding written out independently of the library.
pub fn shrink(x: &[Complex64], t: f64) -> Point {
    x.iter()
        .map(|z| {
            let m = z.norm();
            if m <= t {
                Complex64::new(0.0, 0.0)
            } else {
                z * ((m - t) / m)
            }
        })
        .collect()
}

/// The ℓ¹ minimizer over `{‖x − y‖ ≤ ς}`: `shrink(y, t)` with `t` solving
/// `‖shrink(y, t) − y‖ = ς`, found by bisection.
pub fn l1_ball_minimizer(y: &[Complex64], sigma: f64) -> Point {
    let gap = |t: f64| y.iter().map(|z| z.norm().min(t).powi(2)).sum::<f64>().sqrt();
    let (mut lo, mut hi) = (0.0, y.iter().map(|z| z.norm()).fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) < sigma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    shrink(y, 0.5 * (lo + hi))
}

/// A solver on a problem whose minimizer and optimal value are known,
/// together with an independently written iteration count `N(δ, ε)`.
pub struct Designated {
    pub name: &'static str,
    pub contract: Box<dyn SolverContract>,
    pub problem: ProblemInstance,
    pub solution: Point,
    pub f_hat: f64,
    pub complex: bool,
    pub expected_n: Box<dyn Fn(f64, f64) -> u64>,
}

const N: usize = 8;

/// `½Σ dᵢ|xᵢ − cᵢ|²` over a ball containing `c`; `L = 1`.
pub fn nesterov_quadratic() -> Designated {
    let mut r = rng(11);
    let c = complex_vec(&mut r, N);
    let weights: Vec<f64> = (0..N).map(|i| 0.1 + 0.9 * i as f64 / (N - 1) as f64).collect();
    let radius = vector::norm2(&c) + 3.0;
    let (cf, wf) = (c.clone(), weights.clone());
    let f =
        move |x: &[Complex64]| x.iter().zip(&cf).zip(&wf).map(|((a, b), w)| 0.5 * w * (a - b).norm_sqr()).sum::<f64>();
    let (cg, wg) = (c.clone(), weights);
    let grad: VectorMap =
        Arc::new(move |x: &[Complex64]| x.iter().zip(&cg).zip(&wg).map(|((a, b), w)| (a - b) * *w).collect());
    let proj: VectorMap = Arc::new(move |x: &[Complex64]| project_l2_ball_origin(x, radius));
    let f = Arc::new(f);
    let problem = ProblemInstance::new(N, {
        let f = f.clone();
        move |x| f(x)
    });
    let solver = NesterovSolver::new(f, grad, 1.0, proj).unwrap();
    Designated {
        name: "nesterov",
        contract: Box::new(solver),
        problem,
        solution: c,
        f_hat: 0.0,
        complex: true,
        expected_n: Box::new(|d, e| (d * (2.0f64).sqrt() / e.sqrt()).ceil() as u64),
    }
}

/// `‖x − c‖₁` smoothed entrywise (`u = 1`, `v = n/2`), unconstrained.
pub fn nesta_l1() -> Designated {
    let mut r = rng(12);
    let c = complex_vec(&mut r, N);
    let cf = c.clone();
    let merit: ScalarFn = Arc::new(move |x: &[Complex64]| x.iter().zip(&cf).map(|(a, b)| (a - b).norm()).sum::<f64>());
    let cg = c.clone();
    let smoothed = Arc::new(move |x: &[Complex64], mu: f64| {
        x.iter().zip(&cg).map(|(a, b)| huber_gradient(a - b, mu)).collect::<Point>()
    });
    let (u, v) = (1.0, N as f64 / 2.0);
    let solver = NestaSolver::new(merit.clone(), smoothed, u, v, Arc::new(|x: &[Complex64]| x.to_vec())).unwrap();
    Designated {
        name: "nesta",
        contract: Box::new(solver),
        problem: ProblemInstance::new(N, move |x| merit(x)),
        solution: c,
        f_hat: 0.0,
        complex: true,
        expected_n: Box::new(move |d, e| (2.0 * (2.0 * u * v).sqrt() * d / e).ceil() as u64),
    }
}

fn ufgm_n(nu: f64, m: f64) -> impl Fn(f64, f64) -> u64 {
    move |d, e| {
        let den = 1.0 + 3.0 * nu;
        (2f64.powf((2.0 + 4.0 * nu) / den) * m.powf(2.0 / den) * d.powf((2.0 + 2.0 * nu) / den) / e.powf(2.0 / den))
            .ceil() as u64
    }
}

/// `½‖x − c‖² + λ‖x‖₁` (`ν = 1`, `M = 1`), minimizer `shrink(c, λ)`.
pub fn ufgm_lasso() -> Designated {
    let mut r = rng(13);
    let c = real_vec(&mut r, N);
    let lambda = 0.3;
    let cq = c.clone();
    let q = Arc::new(move |x: &[Complex64]| 0.5 * vector::dist2(x, &cq).powi(2));
    let cg = c.clone();
    let grad = Arc::new(move |x: &[Complex64]| vector::sub(x, &cg));
    let g = Arc::new(move |x: &[Complex64]| lambda * vector::norm1(x));
    let prox = Arc::new(move |x: &[Complex64], t: f64| prox_l1(x, lambda * t));
    let solver = UfgmSolver::new(q.clone(), grad, g.clone(), prox, 1.0, 1.0).unwrap();
    let solution = shrink(&c, lambda);
    let f_hat = q(&solution) + g(&solution);
    Designated {
        name: "ufgm_smooth",
        contract: Box::new(solver),
        problem: ProblemInstance::new(N, move |x| q(x) + g(x)),
        solution,
        f_hat,
        complex: false,
        expected_n: Box::new(ufgm_n(1.0, 1.0)),
    }
}

/// `Σ|xᵢ − cᵢ|^{1+ν}/(1+ν)` with `ν = ½`; the gradient is `ν`-Hölder with
/// `M = 2^{1−ν} n^{(1−ν)/2}`.
pub fn ufgm_holder() -> Designated {
    let nu = 0.5;
    let mut r = rng(14);
    let c = real_vec(&mut r, N);
    let m = 2f64.powf(1.0 - nu) * (N as f64).powf((1.0 - nu) / 2.0);
    let cq = c.clone();
    let q = Arc::new(move |x: &[Complex64]| {
        x.iter().zip(&cq).map(|(a, b)| (a.re - b.re).abs().powf(1.0 + nu) / (1.0 + nu)).sum::<f64>()
    });
    let cg = c.clone();
    let grad = Arc::new(move |x: &[Complex64]| {
        x.iter()
            .zip(&cg)
            .map(|(a, b)| {
                let d = a.re - b.re;
                Complex64::new(d.signum() * d.abs().powf(nu), 0.0)
            })
            .collect::<Point>()
    });
    let solver = UfgmSolver::new(
        q.clone(),
        grad,
        Arc::new(|_: &[Complex64]| 0.0),
        Arc::new(|x: &[Complex64], _| x.to_vec()),
        nu,
        m,
    )
    .unwrap();
    Designated {
        name: "ufgm_holder",
        contract: Box::new(solver),
        problem: ProblemInstance::new(N, move |x| q(x)),
        solution: c,
        f_hat: 0.0,
        complex: false,
        expected_n: Box::new(ufgm_n(nu, m)),
    }
}

/// `‖x − c‖₂ + λ‖x‖₁` with `λ√n < 1` and `c` without zero entries, so the
/// minimizer is `c` itself and the problem is sharp there.
pub fn pd_unconstrained() -> Designated {
    let mut r = rng(15);
    let c = complex_vec(&mut r, N);
    let lambda = 0.5 / (N as f64).sqrt();
    let cf = c.clone();
    let f = Arc::new(move |x: &[Complex64]| vector::dist2(x, &cf) + lambda * vector::norm1(x));
    let (cp, cv) = (c.clone(), c.clone());
    let solver = PrimalDualSolver::new(f.clone(), Arc::new(move |x: &[Complex64], t: f64| prox_l1(x, lambda * t)))
        .with_coupling(CouplingBlock {
            operator: Arc::new(IdentityOperator { n: N }),
            prox_conjugate: Arc::new(move |w: &[Complex64], s: f64| prox_sqrt_loss_conjugate(w, s, &cp)),
            conjugate_value: Arc::new(move |w: &[Complex64]| vector::dot_re(w, &cv)),
            l_h: 1.0,
        })
        .unwrap();
    let f_hat = lambda * vector::norm1(&c);
    Designated {
        name: "pd_unconstrained",
        contract: Box::new(solver),
        problem: ProblemInstance::new(N, move |x| f(x)),
        solution: c,
        f_hat,
        complex: true,
        expected_n: Box::new(|d, e| (2.0 * d / e).ceil() as u64),
    }
}

/// `min ‖x‖₁` subject to `‖x − y‖ ≤ ς` with `A = I` and `κ = √n`.
pub fn pd_constrained() -> Designated {
    let mut r = rng(16);
    let y = complex_vec(&mut r, N);
    let sigma = 0.5;
    let kappa = (N as f64).sqrt();
    let (yg, yp, ys) = (y.clone(), y.clone(), y.clone());
    let gap = move |x: &[Complex64]| kappa * (vector::dist2(x, &yg) - sigma).max(0.0);
    let problem = ProblemInstance::new(N, vector::norm1).with_feasibility_gap(gap);
    let merit_problem = problem.clone();
    let solver = PrimalDualSolver::new(Arc::new(move |x: &[Complex64]| merit_problem.merit(x)), Arc::new(prox_l1))
        .with_constraint(ConstraintBlock {
            operator: Arc::new(IdentityOperator { n: N }),
            projection: Arc::new(move |w: &[Complex64]| project_l2_ball(w, &yp, sigma)),
            support: Arc::new(move |w: &[Complex64]| vector::dot_re(w, &ys) + sigma * vector::norm2(w)),
            kappa,
        })
        .unwrap();
    let solution = l1_ball_minimizer(&y, sigma);
    let f_hat = vector::norm1(&solution);
    Designated {
        name: "pd_constrained",
        contract: Box::new(solver),
        problem,
        solution,
        f_hat,
        complex: true,
        expected_n: Box::new(move |d, e| (2.0 * kappa * d / e).ceil() as u64),
    }
}

pub fn all_designated() -> Vec<Designated> {
    vec![nesterov_quadratic(), nesta_l1(), ufgm_lasso(), ufgm_holder(), pd_unconstrained(), pd_constrained()]
}

/// `f = ‖x‖₂` through the primal-dual solver (`h = ‖·‖`, `B = I`, `g = 0`):
/// sharp with `α = β = 1`, `η = 0`, minimizer 0.
pub fn norm_problem(n: usize) -> (ProblemInstance, PrimalDualSolver) {
    let zero = vector::zeros(n);
    let solver = PrimalDualSolver::new(Arc::new(vector::norm2), Arc::new(|x: &[Complex64], _| x.to_vec()))
        .with_coupling(CouplingBlock {
            operator: Arc::new(IdentityOperator { n }),
            prox_conjugate: Arc::new(move |w: &[Complex64], s: f64| prox_sqrt_loss_conjugate(w, s, &zero)),
            conjugate_value: Arc::new(|_: &[Complex64]| 0.0),
            l_h: 1.0,
        })
        .unwrap();
    (ProblemInstance::new(n, vector::norm2), solver)
}
