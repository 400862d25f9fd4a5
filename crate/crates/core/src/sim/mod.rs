//! Closed-loop simulation: plant, controller and observer/filter states are
//! stacked into one ODE and advanced with fixed-step RK4. The torque is
//! recomputed at every stage, so the interconnection is continuous-time.

mod integrator;
mod metrics;

use alloc::string::String;
use alloc::vec::Vec;
use alloc::format;
use core::cell::RefCell;

pub use integrator::rk4_step;
pub use metrics::{
    control_energy, first_lyapunov_violation, integrated_abs_error, r2_lyapunov_series,
    response_metrics, window, JointMetrics, ResponseMetrics, WindowStats,
};

use crate::control::{ControlLaw, ControllerState, InitialConditions};
use crate::dynamics::{forward_dynamics, JointVec, Manipulator, RobotModel};
use crate::error::{check_len, Error, Result};
use crate::reference::Reference;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 1e3;

/// Scheduled parameter jump, e.g. `m_a += 1 kg` at `t = 5 s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Disturbance {
    pub time: f64,
    pub param: String,
    pub delta: f64,
}

/// A disturbance as it was actually applied.
#[derive(Debug, Clone, PartialEq)]
pub struct AppliedDisturbance {
    pub time: f64,
    pub step: usize,
    pub param: String,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// The simulated robot. Disturbances replace it mid-run.
    pub plant: Manipulator,
    /// Model used inside the controller; defaults to the undisturbed plant.
    pub nominal: Option<Manipulator>,
    pub law: ControlLaw,
    pub init: InitialConditions,
    pub reference: Reference,
    pub q0: JointVec,
    pub v0: JointVec,
    pub disturbances: Vec<Disturbance>,
    pub dt: f64,
    pub horizon: f64,
    /// Run is declared diverged once `‖(q, q̇)‖` exceeds this.
    pub divergence_threshold: f64,
    /// Store every k-th step (the final step is always stored).
    pub record_every: usize,
}

impl Scenario {
    /// Scenario with zero initial velocity, no disturbances and default settings.
    pub fn new(plant: Manipulator, law: ControlLaw, reference: Reference, q0: JointVec, horizon: f64) -> Self {
        let n = q0.len();
        Self {
            plant,
            nominal: None,
            law,
            init: InitialConditions::default(),
            reference,
            q0,
            v0: JointVec::zeros(n),
            disturbances: Vec::new(),
            dt: DEFAULT_DT,
            horizon,
            divergence_threshold: DEFAULT_DIVERGENCE_THRESHOLD,
            record_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.plant.dof();
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt must be positive"));
        }
        if !(self.horizon.is_finite() && self.horizon >= self.dt) {
            return Err(Error::invalid("horizon must be at least dt"));
        }
        if !(self.divergence_threshold > 0.0) {
            return Err(Error::invalid("divergence_threshold must be positive"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be at least 1"));
        }
        check_len("q0", n, self.q0.len())?;
        check_len("v0", n, self.v0.len())?;
        check_len("reference", n, self.reference.dof())?;
        if let Some(nominal) = &self.nominal {
            check_len("nominal model", n, nominal.dof())?;
        }
        for d in &self.disturbances {
            if !(d.time >= 0.0 && d.time <= self.horizon) {
                return Err(Error::invalid(format!(
                    "disturbance time {} outside [0, {}]",
                    d.time, self.horizon
                )));
            }
            self.plant.with_param_delta(&d.param, d.delta)?;
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        libm::round(self.horizon / self.dt) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimStatus {
    Completed,
    Diverged { time: f64, reason: String },
}

/// Recorded trajectory. Per-joint series are stored row-major: sample `k`,
/// joint `i` is at `k * dof + i`; internals use `internal_labels.len()` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub dof: usize,
    pub time: Vec<f64>,
    pub q: Vec<f64>,
    pub dq: Vec<f64>,
    pub q_d: Vec<f64>,
    pub tau: Vec<f64>,
    pub err: Vec<f64>,
    pub internal_labels: Vec<String>,
    pub internals: Vec<f64>,
    pub status: SimStatus,
    pub disturbances: Vec<AppliedDisturbance>,
    /// `∫ ‖τ‖² dt` by the trapezoid rule over every integration step, not
    /// only the stored ones.
    pub e_tau: f64,
}

impl SimResult {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn is_completed(&self) -> bool {
        self.status == SimStatus::Completed
    }

    fn row<'a>(&self, series: &'a [f64], k: usize) -> &'a [f64] {
        &series[k * self.dof..(k + 1) * self.dof]
    }

    pub fn q_at(&self, k: usize) -> &[f64] {
        self.row(&self.q, k)
    }

    pub fn dq_at(&self, k: usize) -> &[f64] {
        self.row(&self.dq, k)
    }

    pub fn q_d_at(&self, k: usize) -> &[f64] {
        self.row(&self.q_d, k)
    }

    pub fn tau_at(&self, k: usize) -> &[f64] {
        self.row(&self.tau, k)
    }

    pub fn err_at(&self, k: usize) -> &[f64] {
        self.row(&self.err, k)
    }

    pub fn internals_at(&self, k: usize) -> &[f64] {
        let m = self.internal_labels.len();
        &self.internals[k * m..(k + 1) * m]
    }

    /// `‖q̃‖` at the last stored sample.
    pub fn final_error_norm(&self) -> f64 {
        if self.is_empty() {
            return f64::NAN;
        }
        let e = self.err_at(self.len() - 1);
        libm::sqrt(e.iter().map(|x| x * x).sum())
    }

    /// Error norm `‖q̃(t_k)‖` for every stored sample.
    pub fn error_norms(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| libm::sqrt(self.err_at(k).iter().map(|x| x * x).sum()))
            .collect()
    }

    /// Index of the first stored sample at or after `t`.
    pub fn index_at(&self, t: f64) -> usize {
        self.time.partition_point(|&s| s < t - 1e-12)
    }
}

struct Recorder<'a> {
    result: SimResult,
    law: &'a ControlLaw,
}

impl Recorder<'_> {
    fn push(
        &mut self,
        t: f64,
        q: &JointVec,
        v: &JointVec,
        reference: &Reference,
        state: &ControllerState,
        tau: &JointVec,
    ) {
        let sample = reference.sample(t);
        let r = &mut self.result;
        r.time.push(t);
        r.q.extend(q.iter());
        r.dq.extend(v.iter());
        r.q_d.extend(sample.q.iter());
        r.tau.extend(tau.iter());
        r.err.extend((q - &sample.q).iter());
        r.internals.extend(self.law.internals(q, &sample, state));
    }
}

/// Integrates the closed loop from `t = 0` to the horizon.
///
/// A numerical failure or a state norm above the divergence threshold ends
/// the run early with [`SimStatus::Diverged`]; samples up to that point are kept.
pub fn run_scenario(scenario: &Scenario) -> Result<SimResult> {
    scenario.validate()?;
    let n = scenario.plant.dof();
    let law = &scenario.law;
    let nominal = scenario.nominal.clone().unwrap_or_else(|| scenario.plant.clone());
    let nominal_ref: Option<&dyn RobotModel> = Some(&nominal);
    let sample0 = scenario.reference.sample(0.0);
    let base_state = ControllerState::initial(law.kind, &law.gains, &scenario.q0, &sample0, &scenario.init)?;

    let mut plant = scenario.plant.clone();
    let mut x: Vec<f64> = scenario.q0.iter().chain(scenario.v0.iter()).copied().collect();
    x.extend(base_state.to_flat());

    let split = |x: &[f64]| -> Result<(JointVec, JointVec, ControllerState)> {
        let q = JointVec::from_column_slice(&x[..n]);
        let v = JointVec::from_column_slice(&x[n..2 * n]);
        Ok((q, v, base_state.with_flat(&x[2 * n..])?))
    };

    let steps = scenario.steps();
    let capacity = steps / scenario.record_every + 2;
    let mut rec = Recorder {
        result: SimResult {
            dof: n,
            time: Vec::with_capacity(capacity),
            q: Vec::with_capacity(capacity * n),
            dq: Vec::with_capacity(capacity * n),
            q_d: Vec::with_capacity(capacity * n),
            tau: Vec::with_capacity(capacity * n),
            err: Vec::with_capacity(capacity * n),
            internal_labels: law.internal_labels(n),
            internals: Vec::new(),
            status: SimStatus::Completed,
            disturbances: Vec::new(),
            e_tau: 0.0,
        },
        law,
    };
    // ‖τ‖² at the start of the previous step, taken from its first RK4 stage.
    let mut prev_sq: Option<f64> = None;
    let stage_tau: RefCell<Option<f64>> = RefCell::new(None);
    let mut pending: Vec<&crate::sim::Disturbance> = scenario.disturbances.iter().collect();
    pending.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut pending = pending.into_iter().peekable();

    for k in 0..=steps {
        let t = k as f64 * scenario.dt;
        while let Some(d) = pending.next_if(|d| d.time <= t + 1e-9 * scenario.dt) {
            plant = plant.with_param_delta(&d.param, d.delta)?;
            rec.result.disturbances.push(AppliedDisturbance {
                time: t,
                step: k,
                param: d.param.clone(),
                delta: d.delta,
            });
        }
        if k == steps {
            let (q, _, state) = split(&x)?;
            if let (Ok(tau), Some(p)) = (law.torque(&q, &scenario.reference.sample(t), &state, nominal_ref), prev_sq) {
                rec.result.e_tau += 0.5 * (p + tau.norm_squared()) * scenario.dt;
            }
        }
        if k % scenario.record_every == 0 || k == steps {
            let (q, v, state) = split(&x)?;
            let sample = scenario.reference.sample(t);
            match law.torque(&q, &sample, &state, nominal_ref) {
                Ok(tau) => rec.push(t, &q, &v, &scenario.reference, &state, &tau),
                Err(e) => {
                    rec.result.status = SimStatus::Diverged { time: t, reason: format!("{e}") };
                    break;
                }
            }
        }
        if k == steps {
            break;
        }

        let plant_ref = &plant;
        let deriv = |ts: f64, xs: &[f64]| -> Result<Vec<f64>> {
            let (q, v, state) = split(xs)?;
            let sample = scenario.reference.sample(ts);
            let tau = law.torque(&q, &sample, &state, nominal_ref)?;
            let mut first = stage_tau.borrow_mut();
            if first.is_none() {
                *first = Some(tau.norm_squared());
            }
            drop(first);
            let acc = forward_dynamics(plant_ref, &q, &v, &tau)?;
            let cdot = law.state_derivative(&q, &sample, &state, &tau, nominal_ref)?;
            let mut out = Vec::with_capacity(xs.len());
            out.extend(v.iter());
            out.extend(acc.iter());
            out.extend(cdot);
            Ok(out)
        };
        let t_next = (k + 1) as f64 * scenario.dt;
        let stepped = rk4_step(deriv, &x, t, scenario.dt);
        if let Some(cur) = stage_tau.borrow_mut().take() {
            if let Some(p) = prev_sq {
                rec.result.e_tau += 0.5 * (p + cur) * scenario.dt;
            }
            prev_sq = Some(cur);
        }
        match stepped {
            Ok(next) => x = next,
            Err(e) => {
                rec.result.status = SimStatus::Diverged { time: t_next, reason: format!("{e}") };
                break;
            }
        }
        let plant_norm = libm::sqrt(x[..2 * n].iter().map(|v| v * v).sum());
        if !(plant_norm <= scenario.divergence_threshold) {
            let (q, v, state) = split(&x)?;
            let sample = scenario.reference.sample(t_next);
            if let Ok(tau) = law.torque(&q, &sample, &state, nominal_ref) {
                rec.push(t_next, &q, &v, &scenario.reference, &state, &tau);
            }
            rec.result.status = SimStatus::Diverged {
                time: t_next,
                reason: format!(
                    "state norm {plant_norm:.3e} exceeded threshold {:.3e}",
                    scenario.divergence_threshold
                ),
            };
            break;
        }
    }
    Ok(rec.result)
}
