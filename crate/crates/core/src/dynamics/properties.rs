//! Numeric checks of the structural properties every model must satisfy:
//! bounded positive definite inertia, skew-symmetry of `Ḣ − 2C`, the linear
//! Coriolis bound `‖C(q, x)‖ ≤ k_c ‖x‖` and the symmetry `C(q, x) y = C(q, y) x`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use super::constants::spectral_norm;
use super::{JointMat, JointVec, ModelConstants, RobotModel};
use crate::sampling;

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const SKEW_TOL: f64 = 1e-6;
pub const COMMUTE_TOL: f64 = 1e-10;

/// Outcome of one property over all samples. `worst` is the largest
/// normalized residual; the property holds when `worst ≤ tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub worst: f64,
    pub tolerance: f64,
    pub samples: usize,
}

impl PropertyCheck {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

/// `Ḣ` along `v` by central differences.
pub fn inertia_rate_fd(model: &dyn RobotModel, q: &JointVec, v: &JointVec) -> JointMat {
    const STEP: f64 = 1e-5;
    let plus = q + v * STEP;
    let minus = q - v * STEP;
    (model.mass_matrix(&plus) - model.mass_matrix(&minus)) / (2.0 * STEP)
}

/// Symmetry residual `max |H − Hᵀ|` and smallest eigenvalue of `H(q)`.
pub fn inertia_residuals(model: &dyn RobotModel, q: &JointVec) -> (f64, f64) {
    let h = model.mass_matrix(q);
    let asym = (&h - h.transpose()).amax();
    let lambda_min = h.symmetric_eigenvalues().min();
    (asym, lambda_min)
}

/// `|xᵀ(Ḣ − 2C)x| / (‖x‖² ‖v‖)`.
pub fn skew_residual(model: &dyn RobotModel, q: &JointVec, v: &JointVec, x: &JointVec) -> f64 {
    let n = model.dof();
    let hdot = inertia_rate_fd(model, q, v);
    let c = model.coriolis_matrix(q, v);
    let m = hdot - c * 2.0;
    debug_assert_eq!(m.nrows(), n);
    let scale = x.norm_squared() * v.norm();
    if scale == 0.0 {
        return 0.0;
    }
    x.dot(&(m * x)).abs() / scale
}

/// `‖C(q, x)‖₂ / ‖x‖`.
pub fn coriolis_gain(model: &dyn RobotModel, q: &JointVec, x: &JointVec) -> f64 {
    let norm = x.norm();
    if norm == 0.0 {
        return 0.0;
    }
    spectral_norm(&model.coriolis_matrix(q, x)) / norm
}

/// `‖C(q, x) y − C(q, y) x‖ / (1 + ‖x‖ ‖y‖)`.
pub fn commute_residual(model: &dyn RobotModel, q: &JointVec, x: &JointVec, y: &JointVec) -> f64 {
    let lhs = model.coriolis_matrix(q, x) * y;
    let rhs = model.coriolis_matrix(q, y) * x;
    (lhs - rhs).norm() / (1.0 + x.norm() * y.norm())
}

/// Runs the four property checks on `samples` random `(q, q̇, x, y)` tuples.
///
/// Positions are drawn from `[−π, π]`, velocity-like vectors from `[−v_max, v_max]`.
pub fn property_suite(
    model: &dyn RobotModel,
    constants: &ModelConstants,
    samples: usize,
    v_max: f64,
    seed: u64,
) -> Vec<PropertyCheck> {
    let n = model.dof();
    let mut rng = sampling::rng(seed);
    let mut symmetry: f64 = 0.0;
    let mut positivity: f64 = 0.0;
    let mut skew: f64 = 0.0;
    let mut gain: f64 = 0.0;
    let mut commute: f64 = 0.0;
    for _ in 0..samples {
        let q = sampling::uniform_vec(&mut rng, n, -PI, PI);
        let v = sampling::uniform_vec(&mut rng, n, -v_max, v_max);
        let x = sampling::uniform_vec(&mut rng, n, -v_max, v_max);
        let y = sampling::uniform_vec(&mut rng, n, -v_max, v_max);
        let (asym, lmin) = inertia_residuals(model, &q);
        symmetry = symmetry.max(asym);
        // 1 when the smallest eigenvalue is nonpositive, 0 otherwise.
        if !(lmin > 0.0) {
            positivity = 1.0;
        }
        skew = skew.max(skew_residual(model, &q, &v, &x));
        let g = coriolis_gain(model, &q, &x);
        gain = gain.max(if g == 0.0 {
            0.0
        } else if constants.k_c > 0.0 {
            g / constants.k_c
        } else {
            f64::INFINITY
        });
        commute = commute.max(commute_residual(model, &q, &x, &y));
    }
    alloc::vec![
        PropertyCheck {
            name: "inertia symmetric",
            worst: symmetry,
            tolerance: SYMMETRY_TOL,
            samples,
        },
        PropertyCheck {
            name: "inertia positive definite",
            worst: positivity,
            tolerance: 0.0,
            samples,
        },
        PropertyCheck {
            name: "skew symmetry of Hdot - 2C",
            worst: skew,
            tolerance: SKEW_TOL,
            samples,
        },
        PropertyCheck {
            name: "Coriolis bound ||C(q,x)|| <= k_c ||x||",
            worst: gain,
            tolerance: 1.0,
            samples,
        },
        PropertyCheck {
            name: "C(q,x)y = C(q,y)x",
            worst: commute,
            tolerance: COMMUTE_TOL,
            samples,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{model_constants, Manipulator, ModelKind, SamplingGrid};

    // Correct inertia, but a Coriolis matrix that is not built from it.
    struct BrokenCoriolis(Manipulator);

    impl RobotModel for BrokenCoriolis {
        fn dof(&self) -> usize {
            self.0.dof()
        }
        fn mass_matrix(&self, q: &JointVec) -> JointMat {
            self.0.mass_matrix(q)
        }
        fn mass_matrix_partial(&self, q: &JointVec, k: usize) -> JointMat {
            self.0.mass_matrix_partial(q, k)
        }
        fn gravity_torque(&self, q: &JointVec) -> JointVec {
            self.0.gravity_torque(q)
        }
        fn potential_energy(&self, q: &JointVec) -> f64 {
            self.0.potential_energy(q)
        }
        fn coriolis_matrix(&self, q: &JointVec, v: &JointVec) -> JointMat {
            self.0.coriolis_matrix(q, v) * 2.0
        }
    }

    #[test]
    fn planar_model_passes() {
        let m = Manipulator::default_for(ModelKind::Planar2);
        let c = model_constants(&m, &SamplingGrid::default()).unwrap();
        for check in property_suite(&m, &c, 500, 5.0, 1) {
            assert!(check.passed(), "{check:?}");
        }
    }

    #[test]
    fn scaled_coriolis_breaks_skew_symmetry() {
        let m = BrokenCoriolis(Manipulator::default_for(ModelKind::Planar2));
        let c = model_constants(&m.0, &SamplingGrid::default()).unwrap();
        let checks = property_suite(&m, &c, 200, 5.0, 1);
        let skew = checks.iter().find(|c| c.name.starts_with("skew")).unwrap();
        assert!(!skew.passed());
    }

    #[test]
    fn skew_residual_vanishes_for_zero_velocity() {
        let m = Manipulator::default_for(ModelKind::Phantom3);
        let q = JointVec::from_vec(alloc::vec![0.1, 0.2, 0.3]);
        let x = JointVec::from_vec(alloc::vec![1.0, -1.0, 0.5]);
        assert_eq!(skew_residual(&m, &q, &JointVec::zeros(3), &x), 0.0);
    }
}
