use alloc::vec::Vec;

use super::SimResult;
use crate::control::{ControllerKind, Gains};
use crate::dynamics::{JointVec, RobotModel};
use crate::error::{Error, Result};

/// `E_τ = ∫₀ᵀ ‖τ‖² dt` by the composite trapezoid rule over the stored samples.
/// [`SimResult::e_tau`] holds the same integral at full step resolution.
pub fn control_energy(result: &SimResult) -> Result<f64> {
    if result.is_empty() {
        return Err(Error::invalid("empty torque series"));
    }
    let sq = |k: usize| result.tau_at(k).iter().map(|x| x * x).sum::<f64>();
    Ok((1..result.len())
        .map(|k| 0.5 * (sq(k - 1) + sq(k)) * (result.time[k] - result.time[k - 1]))
        .sum())
}

/// `∫ Σ_i |q̃_i| dt` over `[t0, t1]` (trapezoid).
pub fn integrated_abs_error(result: &SimResult, t0: f64, t1: f64) -> f64 {
    let abs = |k: usize| result.err_at(k).iter().map(|x| x.abs()).sum::<f64>();
    let start = result.index_at(t0).max(1);
    (start..result.len())
        .take_while(|&k| result.time[k] <= t1 + 1e-12)
        .map(|k| 0.5 * (abs(k - 1) + abs(k)) * (result.time[k] - result.time[k - 1]))
        .sum()
}

/// Per-joint error statistics over a time window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowStats {
    pub mean: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// Largest `‖q̃‖` in the window.
    pub max_norm: f64,
    pub samples: usize,
}

impl WindowStats {
    /// Largest per-joint `max − min`.
    pub fn amplitude(&self) -> f64 {
        self.max
            .iter()
            .zip(&self.min)
            .map(|(a, b)| a - b)
            .fold(0.0, f64::max)
    }

    /// Norm of the per-joint mean error.
    pub fn bias(&self) -> f64 {
        libm::sqrt(self.mean.iter().map(|x| x * x).sum())
    }
}

/// Error statistics over the stored samples with `t0 ≤ t ≤ t1`.
pub fn window(result: &SimResult, t0: f64, t1: f64) -> Result<WindowStats> {
    let n = result.dof;
    let idx: Vec<usize> = (result.index_at(t0)..result.len())
        .take_while(|&k| result.time[k] <= t1 + 1e-12)
        .collect();
    if idx.is_empty() {
        return Err(Error::invalid("no samples in the requested window"));
    }
    let mut stats = WindowStats {
        mean: alloc::vec![0.0; n],
        min: alloc::vec![f64::INFINITY; n],
        max: alloc::vec![f64::NEG_INFINITY; n],
        max_norm: 0.0,
        samples: idx.len(),
    };
    for &k in &idx {
        let e = result.err_at(k);
        for (i, &x) in e.iter().enumerate().take(n) {
            stats.mean[i] += x;
            stats.min[i] = stats.min[i].min(x);
            stats.max[i] = stats.max[i].max(x);
        }
        stats.max_norm = stats.max_norm.max(libm::sqrt(e.iter().map(|x| x * x).sum()));
    }
    for m in &mut stats.mean {
        *m /= idx.len() as f64;
    }
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointMetrics {
    /// Peak excursion beyond the final value, in % of the initial error.
    pub overshoot_pct: f64,
    /// Time of the last entry into the ±2 % (of initial error) band around the final value.
    pub settling_time: f64,
    /// Mean error over the final 10 % of the run.
    pub steady_state_error: f64,
    /// `max − min` of the error over the final 10 % of the run.
    pub late_amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMetrics {
    pub joints: Vec<JointMetrics>,
    pub e_tau: f64,
    pub final_error_norm: f64,
}

impl ResponseMetrics {
    pub fn max_overshoot(&self) -> f64 {
        self.joints.iter().map(|j| j.overshoot_pct).fold(0.0, f64::max)
    }

    pub fn max_settling(&self) -> f64 {
        self.joints.iter().map(|j| j.settling_time).fold(0.0, f64::max)
    }

    pub fn max_late_amplitude(&self) -> f64 {
        self.joints.iter().map(|j| j.late_amplitude).fold(0.0, f64::max)
    }
}

pub const SETTLING_BAND: f64 = 0.02;
pub const LATE_WINDOW_FRACTION: f64 = 0.1;

/// Overshoot, settling time, steady-state error and late-window oscillation
/// per joint. Unavailable for diverged runs.
pub fn response_metrics(result: &SimResult) -> Result<ResponseMetrics> {
    if !result.is_completed() {
        return Err(Error::invalid("metrics unavailable: run diverged"));
    }
    if result.is_empty() {
        return Err(Error::invalid("metrics unavailable: empty run"));
    }
    let len = result.len();
    let t_end = result.time[len - 1];
    let late = window(result, t_end * (1.0 - LATE_WINDOW_FRACTION), t_end)?;
    let joints = (0..result.dof)
        .map(|i| {
            let e0 = result.err_at(0)[i];
            let fin = late.mean[i];
            let mut overshoot = 0.0;
            let mut settling = 0.0;
            if e0 != 0.0 {
                let dir = e0.signum();
                let band = SETTLING_BAND * e0.abs();
                let mut peak: f64 = 0.0;
                for k in 0..len {
                    let dev = result.err_at(k)[i] - fin;
                    peak = peak.max(-dir * dev);
                    if dev.abs() > band {
                        settling = result.time[(k + 1).min(len - 1)];
                    }
                }
                overshoot = 100.0 * peak / e0.abs();
            }
            JointMetrics {
                overshoot_pct: overshoot,
                settling_time: settling,
                steady_state_error: fin,
                late_amplitude: late.max[i] - late.min[i],
            }
        })
        .collect();
    Ok(ResponseMetrics {
        joints,
        e_tau: result.e_tau,
        final_error_norm: result.final_error_norm(),
    })
}

/// `V = ½ q̇ᵀ H(q) q̇ + ½ q̃ᵀ K_P q̃ + ½ ϑᵀ K_D B⁻¹ ϑ` for every stored sample of an R2 run.
pub fn r2_lyapunov_series(result: &SimResult, gains: &Gains, model: &dyn RobotModel) -> Result<Vec<f64>> {
    let kind = ControllerKind::R2;
    let k_p = gains.k_p(kind)?;
    let k_d = gains.k_d(kind)?;
    let (b, _) = gains.filter(kind)?;
    if result.internal_labels.len() != result.dof {
        return Err(Error::invalid("result does not carry R2 filter outputs"));
    }
    // K_D B⁻¹: column j of K_D scaled by 1 / b_j.
    let mut kd_binv = k_d.clone();
    for (j, mut col) in kd_binv.column_iter_mut().enumerate() {
        col /= b[j];
    }
    Ok((0..result.len())
        .map(|k| {
            let q = JointVec::from_column_slice(result.q_at(k));
            let dq = JointVec::from_column_slice(result.dq_at(k));
            let e = JointVec::from_column_slice(result.err_at(k));
            let theta = JointVec::from_column_slice(result.internals_at(k));
            0.5 * dq.dot(&(model.mass_matrix(&q) * &dq))
                + 0.5 * e.dot(&(k_p * &e))
                + 0.5 * theta.dot(&(&kd_binv * &theta))
        })
        .collect())
}

/// First index `k` with `V[k+1] > V[k] + slack·(1 + V[k])`.
pub fn first_lyapunov_violation(v: &[f64], slack: f64) -> Option<usize> {
    v.windows(2).position(|w| w[1] > w[0] + slack * (1.0 + w[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::SimStatus;
    use alloc::vec;

    fn synthetic(dt: f64, steps: usize, err: impl Fn(f64) -> f64, tau: impl Fn(f64) -> f64) -> SimResult {
        let time: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
        SimResult {
            dof: 1,
            q: time.iter().map(|&t| err(t)).collect(),
            dq: vec![0.0; time.len()],
            q_d: vec![0.0; time.len()],
            tau: time.iter().map(|&t| tau(t)).collect(),
            err: time.iter().map(|&t| err(t)).collect(),
            internal_labels: Vec::new(),
            internals: Vec::new(),
            status: SimStatus::Completed,
            disturbances: Vec::new(),
            e_tau: 0.0,
            time,
        }
    }

    #[test]
    fn energy_of_constant_and_sine_torques() {
        let r = synthetic(1e-3, 2000, |_| 0.0, |_| 1.0);
        assert!((control_energy(&r).unwrap() - 2.0).abs() < 1e-12);
        let n = 100_000;
        let r = synthetic(2.0 * core::f64::consts::PI / n as f64, n, |_| 0.0, libm::sin);
        assert!((control_energy(&r).unwrap() - core::f64::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn windows_and_abs_error() {
        let r = synthetic(0.01, 400, |t| if t < 2.0 { 1.0 } else { 0.1 * libm::sin(10.0 * t) }, |_| 0.0);
        let w = window(&r, 3.0, 4.0).unwrap();
        assert!((w.amplitude() - 0.2).abs() < 2e-3);
        assert!(w.bias() < 0.02);
        assert_eq!(window(&r, 0.0, 1.0).unwrap().max_norm, 1.0);
        assert!(window(&r, 10.0, 11.0).is_err());
        assert!((integrated_abs_error(&r, 0.0, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overshoot_and_settling_of_damped_oscillation() {
        let zeta: f64 = 0.2;
        let wn = 2.0;
        let wd = wn * libm::sqrt(1.0 - zeta * zeta);
        let phi = libm::acos(zeta);
        let err = |t: f64| {
            libm::exp(-zeta * wn * t) * libm::sin(wd * t + phi) / libm::sqrt(1.0 - zeta * zeta)
        };
        let r = synthetic(1e-3, 40_000, err, |_| 0.0);
        let m = response_metrics(&r).unwrap();
        let expected = 100.0 * libm::exp(-core::f64::consts::PI * zeta / libm::sqrt(1.0 - zeta * zeta));
        assert!((m.max_overshoot() - expected).abs() < 0.01 * expected);
        let envelope_settle = -libm::log(SETTLING_BAND * libm::sqrt(1.0 - zeta * zeta)) / (zeta * wn);
        assert!(m.max_settling() <= envelope_settle && m.max_settling() > 0.5 * envelope_settle);
    }

    #[test]
    fn diverged_runs_have_no_metrics() {
        let mut r = synthetic(0.1, 10, |_| 1.0, |_| 0.0);
        r.status = SimStatus::Diverged { time: 1.0, reason: "x".into() };
        assert!(response_metrics(&r).is_err());
    }

    #[test]
    fn lyapunov_violation_index() {
        assert_eq!(first_lyapunov_violation(&[3.0, 2.0, 2.0, 1.0], 1e-9), None);
        assert_eq!(first_lyapunov_violation(&[3.0, 2.0, 2.5, 1.0], 1e-9), Some(1));
    }
}
