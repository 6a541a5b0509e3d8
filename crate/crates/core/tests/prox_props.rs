mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use restartkit::linops::{FourierOperator, FourierShape, IdentityOperator, LinearOperator, MaskKind, MaskOptions};
use restartkit::solvers::prox::{
    huber, huber_gradient, nesta_q_projection, project_l2_ball, project_l2_ball_origin, prox_l1,
    prox_sqrt_loss_conjugate, SmoothedL1,
};
use restartkit::vector;
use restartkit::Complex64;

const TOL: f64 = 1e-8;

/// `½‖p − z‖² + t‖p‖₁`, the objective whose minimizer is the soft threshold.
fn l1_prox_objective(p: &[Complex64], z: &[Complex64], t: f64) -> f64 {
    0.5 * vector::dist2(p, z).powi(2) + t * vector::norm1(p)
}

/// Variational inequality of a projection: `Re⟨z − p, q − p⟩ ≤ 0` for feasible `q`.
fn vi_residual(z: &[Complex64], p: &[Complex64], q: &[Complex64]) -> f64 {
    vector::dot_re(&vector::sub(z, p), &vector::sub(q, p))
}

fn random_in_ball(r: &mut rand_chacha::ChaCha8Rng, center: &[Complex64], radius: f64) -> Vec<Complex64> {
    let dir = unit(r, center.len(), true);
    vector::combine(1.0, center, radius * r.random::<f64>().sqrt(), &dir)
}

#[test]
fn soft_threshold_is_locally_optimal() {
    let mut r = rng(1);
    for _ in 0..200 {
        let n = r.random_range(1..20);
        let z = vector::scale(r.random_range(0.1..3.0), &complex_vec(&mut r, n));
        let t = r.random_range(0.0..2.0);
        let p = prox_l1(&z, t);
        assert!(vector::dist2(&p, &shrink(&z, t)) <= 1e-14 * vector::norm2(&z).max(1.0));
        let base = l1_prox_objective(&p, &z, t);
        for &step in &[1e-1, 1e-3, 1e-5] {
            for _ in 0..10 {
                let q = vector::combine(1.0, &p, step, &unit(&mut r, n, true));
                let val = l1_prox_objective(&q, &z, t);
                // Strong convexity gives the extra ½‖q − p‖² margin.
                assert!(base + 0.5 * step * step <= val + TOL, "t = {t}, step {step}");
            }
        }
    }
}

#[test]
fn ball_projection_variational_inequality() {
    let mut r = rng(2);
    for _ in 0..200 {
        let n = r.random_range(1..16);
        let center = complex_vec(&mut r, n);
        let radius = r.random_range(0.0..2.0);
        let z = vector::scale(3.0, &complex_vec(&mut r, n));
        let p = project_l2_ball(&z, &center, radius);
        assert!(vector::dist2(&p, &center) <= radius * (1.0 + 1e-12) + 1e-15);
        for _ in 0..10 {
            let q = random_in_ball(&mut r, &center, radius);
            assert!(vi_residual(&z, &p, &q) <= TOL);
        }
        let p0 = project_l2_ball_origin(&z, radius);
        let q = random_in_ball(&mut r, &vector::zeros(n), radius);
        assert!(vi_residual(&z, &p0, &q) <= TOL);
    }
}

#[test]
fn sqrt_loss_conjugate_prox_is_optimal() {
    // h(w) = ‖w − y‖ has h*(v) = Re⟨v, y⟩ on the unit ball, so the prox
    // minimizes ½‖p − w‖² + σRe⟨p, y⟩ over ‖p‖ ≤ 1.
    let mut r = rng(3);
    for _ in 0..200 {
        let n = r.random_range(1..16);
        let y = complex_vec(&mut r, n);
        let w = vector::scale(2.0, &complex_vec(&mut r, n));
        let sigma = r.random_range(0.0..3.0);
        let p = prox_sqrt_loss_conjugate(&w, sigma, &y);
        assert!(vector::norm2(&p) <= 1.0 + 1e-12);
        let obj = |q: &[Complex64]| 0.5 * vector::dist2(q, &w).powi(2) + sigma * vector::dot_re(q, &y);
        let base = obj(&p);
        for _ in 0..20 {
            let q = random_in_ball(&mut r, &vector::zeros(n), 1.0);
            assert!(base <= obj(&q) + TOL);
            let near = project_l2_ball_origin(&vector::combine(1.0, &p, 1e-4, &unit(&mut r, n, true)), 1.0);
            assert!(base <= obj(&near) + TOL);
        }
    }
}

fn feasible_point(
    r: &mut rand_chacha::ChaCha8Rng,
    a: &dyn LinearOperator,
    y: &[Complex64],
    sigma: f64,
) -> Vec<Complex64> {
    // Start anywhere, then correct the range component so that A q = y + ς s w.
    let nu = a.row_orthonormal_constant().unwrap();
    let v = complex_vec(r, a.in_dim());
    let target = vector::combine(1.0, y, sigma * r.random::<f64>(), &unit(r, y.len(), true));
    let fix = a.adjoint(&vector::sub(&target, &a.apply(&v)));
    vector::combine(1.0, &v, 1.0 / nu, &fix)
}

#[test]
fn nesta_feasible_set_projection_variational_inequality() {
    let mut r = rng(4);
    let shape = FourierShape::Line(64);
    let mask =
        restartkit::linops::sample_mask(shape, 20, MaskKind::BernoulliUniform, 7, MaskOptions::default()).unwrap();
    let fourier = FourierOperator::new(shape, &mask).unwrap();
    let identity = IdentityOperator { n: 12 };
    let ops: [&dyn LinearOperator; 2] = [&fourier, &identity];
    for a in ops {
        for _ in 0..50 {
            let y = complex_vec(&mut r, a.out_dim());
            let sigma = r.random_range(0.01..1.0);
            let z = vector::scale(2.0, &complex_vec(&mut r, a.in_dim()));
            let p = nesta_q_projection(&z, a, &y, sigma).unwrap();
            let res = vector::dist2(&a.apply(&p), &y);
            assert!(res <= sigma * (1.0 + 1e-10));
            let scale = vector::norm2(&z).max(1.0).powi(2);
            for _ in 0..10 {
                let q = feasible_point(&mut r, a, &y, sigma);
                assert!(vector::dist2(&a.apply(&q), &y) <= sigma * (1.0 + 1e-10));
                assert!(vi_residual(&z, &p, &q) <= TOL * scale);
            }
        }
    }
}

#[test]
fn nesta_projection_needs_orthogonal_rows() {
    let a = restartkit::linops::DenseMatrix::from_row_major(2, 3, vec![1.0, 2.0, 0.0, 0.0, 1.0, 1.0]).unwrap();
    let z = vector::zeros(3);
    assert!(nesta_q_projection(&z, &a, &vector::zeros(2), 0.1).is_err());
}

#[test]
fn huber_gradient_matches_finite_differences() {
    let mut r = rng(5);
    for _ in 0..500 {
        let w = Complex64::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        let mu = r.random_range(0.01..1.0);
        let h = 1e-6;
        let d_re = (huber(w + h, mu) - huber(w - h, mu)) / (2.0 * h);
        let d_im = (huber(w + Complex64::new(0.0, h), mu) - huber(w - Complex64::new(0.0, h), mu)) / (2.0 * h);
        let g = huber_gradient(w, mu);
        assert!((g.re - d_re).abs() < 1e-6 && (g.im - d_im).abs() < 1e-6);
        assert!(vector::abs(g) <= 1.0 + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn huber_sandwich(values in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..40), mu in 1e-4f64..2.0) {
        let w: Vec<Complex64> = values.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let smoothed = SmoothedL1::new(mu).unwrap();
        let gap = vector::norm1(&w) - smoothed.value(&w);
        prop_assert!(gap >= -1e-12);
        prop_assert!(gap <= mu * w.len() as f64 / 2.0 + 1e-12);
    }

    #[test]
    fn soft_threshold_is_nonexpansive(seed in any::<u64>(), t in 0.0f64..2.0) {
        let mut r = rng(seed);
        let (a, b) = (complex_vec(&mut r, 9), complex_vec(&mut r, 9));
        prop_assert!(vector::dist2(&prox_l1(&a, t), &prox_l1(&b, t)) <= vector::dist2(&a, &b) * (1.0 + 1e-12));
    }
}

#[test]
fn smoothed_l1_rejects_bad_mu() {
    assert!(SmoothedL1::new(0.0).is_err());
    assert!(SmoothedL1::new(f64::NAN).is_err());
}
