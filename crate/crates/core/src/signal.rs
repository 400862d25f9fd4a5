//! Velocity-free signal generators, each written as a pure map from
//! (state, measured input) to state derivatives so the simulator can
//! integrate them together with the plant.

use alloc::vec::Vec;
use libm::{atan, atan2, sqrt};

use crate::dynamics::{spd_solve, JointMat, JointVec, RobotModel};
use crate::error::{check_len, Error, Result};
use crate::sim::rk4_step;

pub(crate) fn is_spd(m: &JointMat) -> bool {
    m.is_square()
        && (m - m.transpose()).amax() <= 1e-12 * (1.0 + m.amax())
        && m.clone().cholesky().is_some()
}

/// First-order dirty-derivative filter `ϑ_i = b_i s / (s + l_i) u_i`, realized
/// as `ż_i = −l_i z_i + u_i`, `ϑ_i = b_i (u_i − l_i z_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirtyDiffState {
    pub z: JointVec,
    pub b: JointVec,
    pub l: JointVec,
}

impl DirtyDiffState {
    pub fn new(b: JointVec, l: JointVec) -> Result<Self> {
        check_len("filter poles", b.len(), l.len())?;
        if b.iter().chain(l.iter()).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("filter gains b_i and poles l_i must be positive"));
        }
        let z = JointVec::zeros(b.len());
        Ok(Self { z, b, l })
    }

    /// Internal state for which the output is zero while the input rests at `u`.
    pub fn settled_on(mut self, u: &JointVec) -> Self {
        self.z = u.component_div(&self.l);
        self
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// Filter output `ϑ` for the current input `u`.
    pub fn output(&self, u: &JointVec) -> JointVec {
        (u - self.l.component_mul(&self.z)).component_mul(&self.b)
    }

    /// `(ż, ϑ)`. The only input is a position-like signal.
    pub fn derivatives(&self, u: &JointVec) -> Result<(JointVec, JointVec)> {
        check_len("filter input", self.dim(), u.len())?;
        let zdot = u - self.l.component_mul(&self.z);
        Ok((zdot, self.output(u)))
    }
}

/// Free-function form of [`DirtyDiffState::derivatives`].
pub fn dirty_diff_derivatives(state: &DirtyDiffState, u: &JointVec) -> Result<(JointVec, JointVec)> {
    state.derivatives(u)
}

/// Steady-state gain `b ω / √(l² + ω²)` of the continuous filter.
pub fn dirty_diff_gain(b: f64, l: f64, omega: f64) -> f64 {
    b * omega / sqrt(l * l + omega * omega)
}

/// Steady-state phase lead `π/2 − atan(ω / l)` of the continuous filter.
pub fn dirty_diff_phase(l: f64, omega: f64) -> f64 {
    core::f64::consts::FRAC_PI_2 - atan(omega / l)
}

/// Measures amplitude and phase lead of one filter channel driven by
/// `sin(ωt)` under RK4 at step `dt`, after the transient has decayed.
pub fn measure_filter_response(b: f64, l: f64, omega: f64, dt: f64) -> Result<(f64, f64)> {
    use core::f64::consts::PI;
    let period = 2.0 * PI / omega;
    let settle = 10.0 / l + period;
    let periods = if period < 1.0 { libm::ceil(1.0 / period) } else { 2.0 };
    let settle_steps = libm::ceil(settle / dt) as usize;
    let window = periods * period;
    let window_steps = libm::round(window / dt) as usize;
    let input = |t: f64| libm::sin(omega * t);

    let mut z = alloc::vec![0.0];
    let mut t = 0.0;
    let deriv = |t: f64, x: &[f64]| -> Result<Vec<f64>> { Ok(alloc::vec![input(t) - l * x[0]]) };
    for k in 0..settle_steps {
        z = rk4_step(&deriv, &z, t, dt)?;
        t = (k + 1) as f64 * dt;
    }
    // Project the output onto sin/cos over whole periods (trapezoid rule).
    let mut s = 0.0;
    let mut c = 0.0;
    for k in 0..=window_steps {
        let tk = t + k as f64 * dt;
        let out = b * (input(tk) - l * z[0]);
        let w = if k == 0 || k == window_steps { 0.5 } else { 1.0 };
        s += w * out * libm::sin(omega * tk);
        c += w * out * libm::cos(omega * tk);
        if k < window_steps {
            z = rk4_step(&deriv, &z, tk, dt)?;
        }
    }
    let scale = 2.0 * dt / (window_steps as f64 * dt);
    let (s, c) = (s * scale, c * scale);
    Ok((sqrt(s * s + c * c), atan2(c, s)))
}

/// Model-based velocity observer
/// `q̂̇ = v̂ + k_D q̄`, `v̂̇ = H⁻¹(q)[τ − C(q, q̂̇) q̂̇ − G(q) + L q̄]`, `q̄ = q − q̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct NicosiaObserverState {
    pub q_hat: JointVec,
    pub v_hat: JointVec,
    pub k_d: f64,
    pub l: JointMat,
}

impl NicosiaObserverState {
    pub fn new(q_hat: JointVec, v_hat: JointVec, k_d: f64, l: JointMat) -> Result<Self> {
        check_len("observer velocity", q_hat.len(), v_hat.len())?;
        check_len("observer gain L", q_hat.len(), l.nrows())?;
        if !(k_d.is_finite() && k_d > 0.0) {
            return Err(Error::invalid("observer gain k_D must be positive"));
        }
        if !is_spd(&l) {
            return Err(Error::invalid("observer gain L must be symmetric positive definite"));
        }
        Ok(Self { q_hat, v_hat, k_d, l })
    }

    /// The estimated velocity `q̂̇ = v̂ + k_D (q − q̂)`.
    pub fn estimated_velocity(&self, q: &JointVec) -> JointVec {
        &self.v_hat + (q - &self.q_hat) * self.k_d
    }
}

pub fn nicosia_observer_derivatives(
    state: &NicosiaObserverState,
    q: &JointVec,
    tau: &JointVec,
    model: &dyn RobotModel,
) -> Result<(JointVec, JointVec)> {
    let n = model.dof();
    check_len("observer state", n, state.q_hat.len())?;
    check_len("q", n, q.len())?;
    check_len("tau", n, tau.len())?;
    let q_hat_dot = state.estimated_velocity(q);
    let q_bar = q - &state.q_hat;
    let rhs = tau - model.coriolis_matrix(q, &q_hat_dot) * &q_hat_dot
        - model.gravity_torque(q)
        + &state.l * q_bar;
    let v_hat_dot = spd_solve(model.mass_matrix(q), &rhs)?;
    Ok((q_hat_dot, v_hat_dot))
}

/// Linear double-integrator error observer
/// `ê̇ = w + L_D (e − ê)`, `ẇ = L_P (e − ê)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearObserverState {
    pub e_hat: JointVec,
    pub w: JointVec,
    pub l_d: JointMat,
    pub l_p: JointMat,
}

impl LinearObserverState {
    pub fn new(e_hat: JointVec, w: JointVec, l_d: JointMat, l_p: JointMat) -> Result<Self> {
        let n = e_hat.len();
        check_len("observer w", n, w.len())?;
        check_len("observer L_D", n, l_d.nrows())?;
        check_len("observer L_P", n, l_p.nrows())?;
        if !is_spd(&l_d) || !is_spd(&l_p) {
            return Err(Error::invalid("observer gains L_D, L_P must be symmetric positive definite"));
        }
        Ok(Self { e_hat, w, l_d, l_p })
    }

    /// `ê̇ = w + L_D (e − ê)`.
    pub fn estimate_rate(&self, e: &JointVec) -> JointVec {
        &self.w + &self.l_d * (e - &self.e_hat)
    }
}

pub fn linear_observer_derivatives(
    state: &LinearObserverState,
    e: &JointVec,
) -> Result<(JointVec, JointVec)> {
    check_len("tracking error", state.e_hat.len(), e.len())?;
    let innovation = e - &state.e_hat;
    Ok((state.estimate_rate(e), &state.l_p * innovation))
}
