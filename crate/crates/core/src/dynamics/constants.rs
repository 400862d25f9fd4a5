use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DMatrix;

use super::{JointVec, RobotModel};
use crate::error::{Error, Result};
use crate::sampling;

/// Safety factor applied to sampled suprema.
pub const SAMPLED_BOUND_INFLATION: f64 = 1.1;

/// How joint configurations are drawn when estimating model constants.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingGrid {
    /// Tensor-grid nodes per joint (total `per_axis^n`).
    pub per_axis: usize,
    /// Additional uniformly random configurations.
    pub random: usize,
    /// Random unit velocity directions probed per configuration for `k_c`.
    pub directions: usize,
    pub lower: f64,
    pub upper: f64,
    pub seed: u64,
}

impl Default for SamplingGrid {
    fn default() -> Self {
        Self {
            per_axis: 12,
            random: 2000,
            directions: 24,
            lower: -PI,
            upper: PI,
            seed: 7,
        }
    }
}

impl SamplingGrid {
    pub fn configurations(&self, n: usize) -> Vec<JointVec> {
        let mut points = sampling::tensor_grid(n, self.per_axis, self.lower, self.upper);
        let mut rng = sampling::rng(self.seed);
        points.extend(
            (0..self.random).map(|_| sampling::uniform_vec(&mut rng, n, self.lower, self.upper)),
        );
        points
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConstants {
    pub lambda_min_h: f64,
    pub lambda_max_h: f64,
    pub k_c: f64,
    pub k_g: f64,
    pub sample_count: usize,
    /// Whether `k_c` came from the model's closed form instead of sampling.
    pub k_c_closed_form: bool,
}

/// Spectral norm of a square matrix.
pub(crate) fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    let gram = m.transpose() * m;
    let eig = gram.symmetric_eigenvalues();
    libm::sqrt(eig.max().max(0.0))
}

/// Central-difference Jacobian of the gravity vector.
pub(crate) fn gravity_jacobian(model: &dyn RobotModel, q: &JointVec) -> DMatrix<f64> {
    const STEP: f64 = 1e-6;
    let n = model.dof();
    let mut jac = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut plus = q.clone();
        let mut minus = q.clone();
        plus[k] += STEP;
        minus[k] -= STEP;
        let col = (model.gravity_torque(&plus) - model.gravity_torque(&minus)) / (2.0 * STEP);
        jac.set_column(k, &col);
    }
    jac
}

/// Inertia eigenvalue extrema, Coriolis gain `k_c` and gravity-gradient gain
/// `k_g` over the sampled workspace.
pub fn model_constants(model: &dyn RobotModel, grid: &SamplingGrid) -> Result<ModelConstants> {
    let n = model.dof();
    let configs = grid.configurations(n);
    if configs.is_empty() {
        return Err(Error::invalid("sampling grid is empty"));
    }
    let mut rng = sampling::rng(grid.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut directions: Vec<JointVec> = (0..n)
        .map(|k| JointVec::from_fn(n, |i, _| if i == k { 1.0 } else { 0.0 }))
        .collect();
    directions.extend((0..grid.directions).map(|_| sampling::unit_vec(&mut rng, n)));

    let closed_kc = model.coriolis_gain_bound();
    let mut lambda_min = f64::INFINITY;
    let mut lambda_max = f64::NEG_INFINITY;
    let mut kc_sampled: f64 = 0.0;
    let mut kg_sampled: f64 = 0.0;
    for q in &configs {
        let eig = model.mass_matrix(q).symmetric_eigenvalues();
        lambda_min = lambda_min.min(eig.min());
        lambda_max = lambda_max.max(eig.max());
        if closed_kc.is_none() {
            for x in &directions {
                kc_sampled = kc_sampled.max(spectral_norm(&model.coriolis_matrix(q, x)));
            }
        }
        kg_sampled = kg_sampled.max(spectral_norm(&gravity_jacobian(model, q)));
    }
    if !(lambda_min.is_finite() && lambda_min > 0.0) {
        return Err(Error::numerical("inertia matrix not positive definite on the grid"));
    }
    Ok(ModelConstants {
        lambda_min_h: lambda_min,
        lambda_max_h: lambda_max,
        k_c: closed_kc.unwrap_or(kc_sampled * SAMPLED_BOUND_INFLATION),
        k_g: kg_sampled * SAMPLED_BOUND_INFLATION,
        sample_count: configs.len(),
        k_c_closed_form: closed_kc.is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Manipulator, ModelKind, PointMassParams};

    fn small_grid() -> SamplingGrid {
        SamplingGrid {
            per_axis: 6,
            random: 100,
            directions: 8,
            ..SamplingGrid::default()
        }
    }

    #[test]
    fn point_mass_constants_are_exact() {
        let p = PointMassParams::default();
        let m = Manipulator::point_mass(p.clone()).unwrap();
        let grid = SamplingGrid {
            per_axis: 5,
            ..small_grid()
        };
        let c = model_constants(&m, &grid).unwrap();
        assert!((c.lambda_min_h - p.m * p.l * p.l).abs() < 1e-12);
        assert!((c.lambda_max_h - p.m * p.l * p.l).abs() < 1e-12);
        assert_eq!(c.k_c, 0.0);
        // |∂G/∂q| = m g l |sin q| peaks on the grid node q = π/2.
        let expected = p.m * p.g * p.l * SAMPLED_BOUND_INFLATION;
        assert!((c.k_g - expected).abs() < 1e-6 * expected);
    }

    #[test]
    fn phantom_uses_closed_form_coriolis_constant() {
        let m = Manipulator::default_for(ModelKind::Phantom3);
        let c = model_constants(&m, &small_grid()).unwrap();
        assert!(c.k_c_closed_form);
        assert_eq!(Some(c.k_c), m.coriolis_gain_bound());
        assert!(c.lambda_min_h > 0.0 && c.lambda_min_h < c.lambda_max_h);
    }

    #[test]
    fn empty_grid_is_rejected() {
        let m = Manipulator::default_for(ModelKind::Planar2);
        let grid = SamplingGrid {
            per_axis: 0,
            random: 0,
            ..SamplingGrid::default()
        };
        assert!(model_constants(&m, &grid).is_err());
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -4.0]);
        assert!((spectral_norm(&m) - 4.0).abs() < 1e-12);
    }
}
