//! Lagrangian manipulator dynamics `H(q) q̈ + C(q, q̇) q̇ + G(q) = τ`.
//!
//! Models only supply the inertia matrix, its partial derivatives and the
//! potential/gravity pair. The Coriolis matrix is always assembled here from
//! Christoffel symbols of the first kind, so `Ḣ − 2C` is skew-symmetric and
//! `C(q, x) y = C(q, y) x` for every model.

mod constants;
mod manipulator;
mod phantom;
mod planar;
pub mod properties;

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};

pub use constants::{model_constants, ModelConstants, SamplingGrid};
pub use manipulator::{Manipulator, ModelKind};
pub use phantom::{Phantom3, Phantom3Params};
pub use planar::{Planar2Params, PlanarChain, PlanarLink, PointMassParams};

/// Joint-space vector (positions, velocities, accelerations or torques).
pub type JointVec = DVector<f64>;
/// Joint-space square matrix.
pub type JointMat = DMatrix<f64>;

/// A rigid serial manipulator described by its kinetic and potential energy.
///
/// Implementations return raw values without validating argument sizes; use
/// the free functions of this module ([`inertia`], [`coriolis`], ...) which
/// check dimensions and finiteness first.
pub trait RobotModel: Send + Sync {
    /// Number of joints.
    fn dof(&self) -> usize;

    /// Inertia matrix `H(q)`.
    fn mass_matrix(&self, q: &JointVec) -> JointMat;

    /// Partial derivative `∂H/∂q_k`.
    fn mass_matrix_partial(&self, q: &JointVec, k: usize) -> JointMat;

    /// Gravity torque `G(q) = ∂U/∂q`.
    fn gravity_torque(&self, q: &JointVec) -> JointVec;

    /// Potential energy `U(q)`.
    fn potential_energy(&self, q: &JointVec) -> f64;

    /// `C(q, v)`; defaults to the Christoffel symbols of `H`.
    fn coriolis_matrix(&self, q: &JointVec, v: &JointVec) -> JointMat {
        christoffel_matrix(self, q, v)
    }

    /// A closed-form constant `k_c` with `‖C(q, x)‖ ≤ k_c ‖x‖`, if the model has one.
    fn coriolis_gain_bound(&self) -> Option<f64> {
        None
    }
}

pub(crate) fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn check_joint_vec(model: &dyn RobotModel, what: &'static str, v: &JointVec) -> Result<()> {
    check_len(what, model.dof(), v.len())?;
    if !all_finite(v.as_slice()) {
        return Err(Error::invalid(alloc::format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// `H(q)`, symmetric positive definite.
pub fn inertia(model: &dyn RobotModel, q: &JointVec) -> Result<JointMat> {
    check_joint_vec(model, "q", q)?;
    Ok(model.mass_matrix(q))
}

/// `C(q, v)` built from Christoffel symbols of `H`.
pub fn coriolis(model: &dyn RobotModel, q: &JointVec, v: &JointVec) -> Result<JointMat> {
    check_joint_vec(model, "q", q)?;
    check_joint_vec(model, "v", v)?;
    Ok(model.coriolis_matrix(q, v))
}

/// Christoffel-symbol construction of `C(q, v)` from the partials of `H`.
pub fn christoffel_matrix<M: RobotModel + ?Sized>(model: &M, q: &JointVec, v: &JointVec) -> JointMat {
    let n = model.dof();
    let partials: Vec<JointMat> = (0..n).map(|i| model.mass_matrix_partial(q, i)).collect();
    let mut c = DMatrix::zeros(n, n);
    for k in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                if v[i] == 0.0 {
                    continue;
                }
                let symbol =
                    0.5 * (partials[i][(k, j)] + partials[j][(k, i)] - partials[k][(i, j)]);
                acc += symbol * v[i];
            }
            c[(k, j)] = acc;
        }
    }
    c
}

/// `G(q)`.
pub fn gravity(model: &dyn RobotModel, q: &JointVec) -> Result<JointVec> {
    check_joint_vec(model, "q", q)?;
    Ok(model.gravity_torque(q))
}

/// Joint accelerations solving `H(q) q̈ = τ − C(q, v) v − G(q)`.
pub fn forward_dynamics(
    model: &dyn RobotModel,
    q: &JointVec,
    v: &JointVec,
    tau: &JointVec,
) -> Result<JointVec> {
    check_joint_vec(model, "q", q)?;
    check_joint_vec(model, "v", v)?;
    check_len("tau", model.dof(), tau.len())?;
    if !all_finite(tau.as_slice()) {
        return Err(Error::numerical("torque has non-finite entries"));
    }
    let h = model.mass_matrix(q);
    let rhs = tau - model.coriolis_matrix(q, v) * v - model.gravity_torque(q);
    spd_solve(h, &rhs)
}

/// Solve `a x = b` for symmetric positive definite `a`.
pub(crate) fn spd_solve(a: JointMat, b: &JointVec) -> Result<JointVec> {
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::numerical("inertia matrix is not symmetric positive definite"))?;
    let x = chol.solve(b);
    if all_finite(x.as_slice()) {
        Ok(x)
    } else {
        Err(Error::numerical("linear solve produced non-finite values"))
    }
}

/// Kinetic energy `½ vᵀ H(q) v`.
pub fn kinetic_energy(model: &dyn RobotModel, q: &JointVec, v: &JointVec) -> Result<f64> {
    let h = inertia(model, q)?;
    check_joint_vec(model, "v", v)?;
    Ok(0.5 * v.dot(&(h * v)))
}
