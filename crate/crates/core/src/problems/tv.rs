//! TV minimization from subsampled 2-D Fourier data, solved with NESTA.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{gen_phantom, sphere_noise, ExperimentSetup, SolverHandle};
use crate::error::{Error, Result};
use crate::linops::{
    sample_mask, FourierOperator, FourierShape, LinearOperator, MaskKind, MaskOptions, SamplingMask, TvGradient,
};
use crate::problem::{Oracle, Point, ProblemInstance, VectorMap};
use crate::solvers::nesterov::SmoothedGradient;
use crate::solvers::prox::{huber_gradient, nesta_q_projection};
use crate::solvers::NestaSolver;
use crate::vector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TvOptions {
    pub side: usize,
    /// Fraction of the `R²` frequencies to sample.
    pub sampling_rate: f64,
    pub sigma_noise: f64,
    pub mask_kind: MaskKind,
    pub density_exponent: f64,
    pub radial_lines: Option<usize>,
}

impl Default for TvOptions {
    fn default() -> Self {
        TvOptions {
            side: 64,
            sampling_rate: 0.125,
            sigma_noise: 1e-5,
            mask_kind: MaskKind::PowerDensity,
            density_exponent: 1.0,
            radial_lines: None,
        }
    }
}

#[derive(Clone)]
pub struct TvInstance {
    pub side: usize,
    pub operator: Arc<FourierOperator>,
    pub tv: TvGradient,
    pub mask: SamplingMask,
    pub y: Point,
    pub sigma_noise: f64,
    pub ground_truth: Point,
}

impl fmt::Debug for TvInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TvInstance")
            .field("side", &self.side)
            .field("m", &self.mask.len())
            .field("mask_kind", &self.mask.kind)
            .field("sigma_noise", &self.sigma_noise)
            .finish()
    }
}

/// Phantom, mask and noisy Fourier samples. The mask uses `seed`; the
/// noise uses `seed + 1`.
pub fn gen_tv_fourier(options: &TvOptions, seed: u64) -> Result<TvInstance> {
    if !(options.sampling_rate > 0.0 && options.sampling_rate <= 1.0) {
        return Err(Error::config("sampling_rate", "must lie in (0, 1]"));
    }
    if !(options.sigma_noise >= 0.0 && options.sigma_noise.is_finite()) {
        return Err(Error::config("sigma_noise", "must be nonnegative"));
    }
    let side = options.side;
    let ground_truth = gen_phantom(side)?;
    let shape = FourierShape::Square(side);
    let m_target = ((options.sampling_rate * (side * side) as f64).round() as usize).max(1);
    let mask = sample_mask(
        shape,
        m_target,
        options.mask_kind,
        seed,
        MaskOptions { density_exponent: options.density_exponent, radial_lines: options.radial_lines },
    )?;
    let operator = FourierOperator::new(shape, &mask)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let e = sphere_noise(&mut rng, operator.out_dim(), options.sigma_noise, true);
    let y = vector::add(&operator.apply(&ground_truth), &e);
    Ok(TvInstance {
        side,
        operator: Arc::new(operator),
        tv: TvGradient::new(side),
        mask,
        y,
        sigma_noise: options.sigma_noise,
        ground_truth,
    })
}

/// `‖Vz‖₁` over `{z : ‖Az − y‖ ≤ ς}` with Huber smoothing (`u = ‖V‖² = 8`,
/// `v = R²`), started from `A*y/ν`, with `α₀ = √m`, `β₀ = 1`.
pub fn tv_problem(inst: &TvInstance) -> Result<ExperimentSetup> {
    let nu = inst
        .operator
        .row_orthonormal_constant()
        .ok_or_else(|| Error::config("operator", "TV problems need A A* = νI"))?;
    let tv = inst.tv;
    let n = tv.in_dim();
    let objective = move |z: &[Complex64]| vector::norm1(&tv.apply(z));

    let op = inst.operator.clone();
    let y = inst.y.clone();
    let sigma = inst.sigma_noise;
    let projection: VectorMap =
        Arc::new(move |z: &[Complex64]| nesta_q_projection(z, &*op, &y, sigma).expect("operator has orthogonal rows"));
    let smoothed: SmoothedGradient = Arc::new(move |z: &[Complex64], mu: f64| {
        let w: Point = tv.apply(z).into_iter().map(|v| huber_gradient(v, mu)).collect();
        tv.adjoint(&w)
    });

    let problem = ProblemInstance::new(n, objective)
        .with_oracle("projection_q", Oracle::Projection(projection.clone()))
        .with_ground_truth(inst.ground_truth.clone());

    let u = tv.norm_bound().powi(2);
    let v = (inst.side * inst.side) as f64;
    let solver = NestaSolver::new(Arc::new(objective), smoothed, u, v, projection)?;

    let x0 = vector::scale(1.0 / nu, &inst.operator.adjoint(&inst.y));
    let eps0 = problem.merit(&x0);
    Ok(ExperimentSetup {
        problem,
        x0,
        alpha0: (inst.mask.len() as f64).sqrt(),
        beta0: 1.0,
        eps0,
        solver: SolverHandle::Nesta(solver),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> TvOptions {
        TvOptions { side: 16, sampling_rate: 0.3, sigma_noise: 1e-5, ..TvOptions::default() }
    }

    #[test]
    fn smoothing_constants() {
        let inst = gen_tv_fourier(&small(), 1).unwrap();
        let setup = tv_problem(&inst).unwrap();
        let SolverHandle::Nesta(s) = &setup.solver else { panic!("expected NESTA") };
        let (u, v) = s.smoothing_constants();
        assert!((u - 8.0).abs() < 1e-12);
        assert_eq!(v, 256.0);
    }

    #[test]
    fn start_is_feasible_and_noise_on_sphere() {
        let inst = gen_tv_fourier(&small(), 2).unwrap();
        let r = vector::dist2(&inst.operator.apply(&inst.ground_truth), &inst.y);
        assert!((r - 1e-5).abs() < 1e-17);
        let setup = tv_problem(&inst).unwrap();
        let res = vector::dist2(&inst.operator.apply(&setup.x0), &inst.y);
        assert!(res <= 1e-12);
        assert_eq!(setup.problem.feasibility_gap(&setup.x0), 0.0);
    }

    #[test]
    fn constant_image_reaches_zero_objective() {
        let side = 8;
        let mut inst =
            gen_tv_fourier(&TvOptions { side, sampling_rate: 0.5, sigma_noise: 0.0, ..TvOptions::default() }, 4)
                .unwrap();
        let truth = vector::from_real(&vec![0.3; side * side]);
        inst.y = inst.operator.apply(&truth);
        inst.ground_truth = truth.clone();
        let setup = tv_problem(&inst).unwrap();
        assert_eq!(setup.problem.objective(&truth), 0.0);
        // The constant is a minimizer, so the contract applies with δ = d(x₀, truth).
        let delta = vector::dist2(&setup.x0, &truth);
        let c = setup.solver.contract();
        let run = c.run(delta, 1e-3, &setup.x0, None).unwrap();
        assert!(setup.problem.objective(&run.point) <= 1e-3);
    }

    #[test]
    fn default_mask_rate() {
        let inst = gen_tv_fourier(&TvOptions::default(), 0).unwrap();
        let rate = inst.mask.len() as f64 / 4096.0;
        assert!((rate - 0.125).abs() < 0.02, "rate {rate}");
    }
}
