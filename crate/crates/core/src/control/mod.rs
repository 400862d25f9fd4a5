//! The six position-feedback control laws.
//!
//! Every torque map takes the measured position and the controller's own
//! state; none of them accepts a joint velocity. Regulators R1–R3 drive the
//! arm to a constant `q_d`, trackers T1–T3 follow a smooth `q_d(t)`.

mod check;
mod gains;

use alloc::string::String;
use alloc::vec::Vec;
use alloc::format;

pub use check::{check_gains, CheckInputs, GainCheckReport, GainCondition};
pub use gains::{Gains, ScalarGains};

use crate::dynamics::{JointVec, RobotModel};
use crate::error::{check_len, Error, Result};
use crate::reference::RefSample;
use crate::signal::{
    linear_observer_derivatives, nicosia_observer_derivatives, DirtyDiffState,
    LinearObserverState, NicosiaObserverState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllerKind {
    /// Gravity compensation + PD on the nonlinear observer's velocity estimate.
    R1,
    /// Gravity compensation + PD with a dirty-derivative filter on `q`.
    R2,
    /// PID-like law without gravity compensation.
    R3,
    /// Observer-based tracking with model feedforward.
    T1,
    /// Model feedforward + dirty-derivative filter on the tracking error.
    T2,
    /// Model-free linear observer + PD on the estimated error.
    T3,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 6] = [
        ControllerKind::R1,
        ControllerKind::R2,
        ControllerKind::R3,
        ControllerKind::T1,
        ControllerKind::T2,
        ControllerKind::T3,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ControllerKind::R1 => "R1",
            ControllerKind::R2 => "R2",
            ControllerKind::R3 => "R3",
            ControllerKind::T1 => "T1",
            ControllerKind::T2 => "T2",
            ControllerKind::T3 => "T3",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.id().eq_ignore_ascii_case(id))
    }

    pub fn is_tracking(self) -> bool {
        matches!(self, ControllerKind::T1 | ControllerKind::T2 | ControllerKind::T3)
    }

    /// R3 and T3 never evaluate `H`, `C` or `G`.
    pub fn uses_model(self) -> bool {
        !matches!(self, ControllerKind::R3 | ControllerKind::T3)
    }
}

/// Dynamic state carried by a controller between integration steps.
#[derive(Debug, Clone, PartialEq)]
pub enum ControllerState {
    /// R1, T1.
    Observer(NicosiaObserverState),
    /// R2 (filter input `q`), T2 (filter input `q − q_d(t)`).
    Filter(DirtyDiffState),
    /// R3: filter on `q` plus the integral state `ν`.
    FilterIntegral { filter: DirtyDiffState, nu: JointVec },
    /// T3.
    LinearObserver(LinearObserverState),
}

/// Optional initial values; anything unset gets the default described on each field.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InitialConditions {
    /// Observer position estimate (default: the measured `q(0)`).
    pub q_hat: Option<JointVec>,
    /// Observer velocity estimate (default: zero).
    pub v_hat: Option<JointVec>,
    /// Integral state of R3 (default: zero).
    pub nu: Option<JointVec>,
    /// T3 error estimate (default: the measured error `e(0)`).
    pub e_hat: Option<JointVec>,
    /// T3 rate state (default: zero).
    pub w: Option<JointVec>,
    /// Filter state (default: settled on the initial input, so `ϑ(0) = 0`).
    pub z: Option<JointVec>,
}

impl ControllerState {
    pub fn initial(
        kind: ControllerKind,
        gains: &Gains,
        q0: &JointVec,
        reference0: &RefSample,
        init: &InitialConditions,
    ) -> Result<Self> {
        let n = q0.len();
        let pick = |v: &Option<JointVec>, name: &'static str, default: JointVec| -> Result<JointVec> {
            match v {
                Some(v) => {
                    check_len(name, n, v.len())?;
                    Ok(v.clone())
                }
                None => Ok(default),
            }
        };
        let filter_on = |u: &JointVec| -> Result<DirtyDiffState> {
            let (b, l) = gains.filter(kind)?;
            let f = DirtyDiffState::new(b.clone(), l.clone())?;
            check_len("filter gains", n, f.dim())?;
            Ok(match &init.z {
                Some(z) => {
                    check_len("z", n, z.len())?;
                    DirtyDiffState { z: z.clone(), ..f }
                }
                None => f.settled_on(u),
            })
        };
        Ok(match kind {
            ControllerKind::R1 | ControllerKind::T1 => {
                let (k_d, l) = gains.observer(kind)?;
                ControllerState::Observer(NicosiaObserverState::new(
                    pick(&init.q_hat, "q_hat", q0.clone())?,
                    pick(&init.v_hat, "v_hat", JointVec::zeros(n))?,
                    k_d,
                    l.clone(),
                )?)
            }
            ControllerKind::R2 => ControllerState::Filter(filter_on(q0)?),
            ControllerKind::T2 => ControllerState::Filter(filter_on(&(q0 - &reference0.q))?),
            ControllerKind::R3 => ControllerState::FilterIntegral {
                filter: filter_on(q0)?,
                nu: pick(&init.nu, "nu", JointVec::zeros(n))?,
            },
            ControllerKind::T3 => {
                let (l_d, l_p) = gains.linear_observer(kind)?;
                ControllerState::LinearObserver(LinearObserverState::new(
                    pick(&init.e_hat, "e_hat", q0 - &reference0.q)?,
                    pick(&init.w, "w", JointVec::zeros(n))?,
                    l_d.clone(),
                    l_p.clone(),
                )?)
            }
        })
    }

    pub fn kind_matches(&self, kind: ControllerKind) -> bool {
        matches!(
            (self, kind),
            (ControllerState::Observer(_), ControllerKind::R1 | ControllerKind::T1)
                | (ControllerState::Filter(_), ControllerKind::R2 | ControllerKind::T2)
                | (ControllerState::FilterIntegral { .. }, ControllerKind::R3)
                | (ControllerState::LinearObserver(_), ControllerKind::T3)
        )
    }

    /// Dynamic part of the state as a flat vector.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        match self {
            ControllerState::Observer(s) => {
                out.extend(s.q_hat.iter());
                out.extend(s.v_hat.iter());
            }
            ControllerState::Filter(f) => out.extend(f.z.iter()),
            ControllerState::FilterIntegral { filter, nu } => {
                out.extend(filter.z.iter());
                out.extend(nu.iter());
            }
            ControllerState::LinearObserver(s) => {
                out.extend(s.e_hat.iter());
                out.extend(s.w.iter());
            }
        }
        out
    }

    pub fn flat_len(&self) -> usize {
        let n = self.dim();
        match self {
            ControllerState::Filter(_) => n,
            _ => 2 * n,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ControllerState::Observer(s) => s.q_hat.len(),
            ControllerState::Filter(f) => f.dim(),
            ControllerState::FilterIntegral { filter, .. } => filter.dim(),
            ControllerState::LinearObserver(s) => s.e_hat.len(),
        }
    }

    /// Copy of `self` with the dynamic part replaced by `flat`.
    pub fn with_flat(&self, flat: &[f64]) -> Result<Self> {
        check_len("controller state", self.flat_len(), flat.len())?;
        let n = self.dim();
        let part = |i: usize| JointVec::from_column_slice(&flat[i * n..(i + 1) * n]);
        let mut next = self.clone();
        match &mut next {
            ControllerState::Observer(s) => {
                s.q_hat = part(0);
                s.v_hat = part(1);
            }
            ControllerState::Filter(f) => f.z = part(0),
            ControllerState::FilterIntegral { filter, nu } => {
                filter.z = part(0);
                *nu = part(1);
            }
            ControllerState::LinearObserver(s) => {
                s.e_hat = part(0);
                s.w = part(1);
            }
        }
        Ok(next)
    }
}

fn need_model(kind: ControllerKind, model: Option<&dyn RobotModel>) -> Result<&dyn RobotModel> {
    model.ok_or_else(|| Error::invalid(format!("controller {} needs a nominal model", kind.id())))
}

/// R1: `τ = G(q) − K_P q̃ − K_D q̂̇` with `q̂̇ = v̂ + k_D (q − q̂)`.
pub fn r1_torque(
    q: &JointVec,
    q_d: &JointVec,
    state: &NicosiaObserverState,
    gains: &Gains,
    model: &dyn RobotModel,
) -> Result<JointVec> {
    let kind = ControllerKind::R1;
    check_len("q_d", q.len(), q_d.len())?;
    let q_hat_dot = state.estimated_velocity(q);
    Ok(model.gravity_torque(q) - gains.k_p(kind)? * (q - q_d) - gains.k_d(kind)? * q_hat_dot)
}

/// R2: `τ = G(q) − K_D ϑ − K_P q̃`, `ϑ = diag{b_i s/(s + l_i)} q`.
pub fn r2_torque(
    q: &JointVec,
    q_d: &JointVec,
    filter: &DirtyDiffState,
    gains: &Gains,
    model: &dyn RobotModel,
) -> Result<JointVec> {
    let kind = ControllerKind::R2;
    check_len("q_d", q.len(), q_d.len())?;
    let theta = filter.output(q);
    Ok(model.gravity_torque(q) - gains.k_d(kind)? * theta - gains.k_p(kind)? * (q - q_d))
}

/// R3: `τ = −K_P q̃ + ν − K_D ϑ`. No model term.
pub fn r3_torque(
    q: &JointVec,
    q_d: &JointVec,
    filter: &DirtyDiffState,
    nu: &JointVec,
    gains: &Gains,
) -> Result<JointVec> {
    let kind = ControllerKind::R3;
    check_len("q_d", q.len(), q_d.len())?;
    check_len("nu", q.len(), nu.len())?;
    let theta = filter.output(q);
    Ok(nu - gains.k_p(kind)? * (q - q_d) - gains.k_d(kind)? * theta)
}

/// R3 integral state rate `ν̇ = −K_I (q̃ − ϑ)`.
pub fn r3_integral_rate(
    q: &JointVec,
    q_d: &JointVec,
    filter: &DirtyDiffState,
    gains: &Gains,
) -> Result<JointVec> {
    let theta = filter.output(q);
    Ok(-(gains.k_i(ControllerKind::R3)? * ((q - q_d) - theta)))
}

/// T1: `τ = H(q) q̈_d + C(q, q̂̇) q̇_d + G(q) − K_P q̃ − K_D (q̂̇ − q̇_d)`.
pub fn t1_torque(
    q: &JointVec,
    reference: &RefSample,
    state: &NicosiaObserverState,
    gains: &Gains,
    model: &dyn RobotModel,
) -> Result<JointVec> {
    let kind = ControllerKind::T1;
    check_len("q_d", q.len(), reference.q.len())?;
    let q_hat_dot = state.estimated_velocity(q);
    let feedforward = model.mass_matrix(q) * &reference.qdd
        + model.coriolis_matrix(q, &q_hat_dot) * &reference.qd
        + model.gravity_torque(q);
    Ok(feedforward
        - gains.k_p(kind)? * (q - &reference.q)
        - gains.k_d(kind)? * (q_hat_dot - &reference.qd))
}

/// T2: `τ = H(q) q̈_d + C(q, q̇_d) q̇_d + G(q) − K_P q̃ − K_D ϑ̃`, with the filter
/// driven by the tracking error `q̃ = q − q_d(t)`.
pub fn t2_torque(
    q: &JointVec,
    reference: &RefSample,
    filter: &DirtyDiffState,
    gains: &Gains,
    model: &dyn RobotModel,
) -> Result<JointVec> {
    let kind = ControllerKind::T2;
    check_len("q_d", q.len(), reference.q.len())?;
    let err = q - &reference.q;
    let theta = filter.output(&err);
    let feedforward = model.mass_matrix(q) * &reference.qdd
        + model.coriolis_matrix(q, &reference.qd) * &reference.qd
        + model.gravity_torque(q);
    Ok(feedforward - gains.k_p(kind)? * err - gains.k_d(kind)? * theta)
}

/// T3: `τ = −K_D ê̇ − K_P ê` with `ê̇ = w + L_D (e − ê)`. No model term.
pub fn t3_torque(e: &JointVec, state: &LinearObserverState, gains: &Gains) -> Result<JointVec> {
    let kind = ControllerKind::T3;
    check_len("e", state.e_hat.len(), e.len())?;
    Ok(-(gains.k_d(kind)? * state.estimate_rate(e)) - gains.k_p(kind)? * &state.e_hat)
}

/// A control law with fixed gains, dispatching to the per-law torque maps.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlLaw {
    pub kind: ControllerKind,
    pub gains: Gains,
}

impl ControlLaw {
    pub fn new(kind: ControllerKind, gains: Gains) -> Self {
        Self { kind, gains }
    }

    fn mismatch(&self) -> Error {
        Error::invalid(format!("controller state does not belong to {}", self.kind.id()))
    }

    /// Torque from the measured position, the reference and the controller state.
    /// `model` is the controller's nominal model; R3 and T3 accept `None`.
    pub fn torque(
        &self,
        q: &JointVec,
        reference: &RefSample,
        state: &ControllerState,
        model: Option<&dyn RobotModel>,
    ) -> Result<JointVec> {
        let kind = self.kind;
        let g = &self.gains;
        match (kind, state) {
            (ControllerKind::R1, ControllerState::Observer(s)) => {
                r1_torque(q, &reference.q, s, g, need_model(kind, model)?)
            }
            (ControllerKind::R2, ControllerState::Filter(f)) => {
                r2_torque(q, &reference.q, f, g, need_model(kind, model)?)
            }
            (ControllerKind::R3, ControllerState::FilterIntegral { filter, nu }) => {
                r3_torque(q, &reference.q, filter, nu, g)
            }
            (ControllerKind::T1, ControllerState::Observer(s)) => {
                t1_torque(q, reference, s, g, need_model(kind, model)?)
            }
            (ControllerKind::T2, ControllerState::Filter(f)) => {
                t2_torque(q, reference, f, g, need_model(kind, model)?)
            }
            (ControllerKind::T3, ControllerState::LinearObserver(s)) => {
                t3_torque(&(q - &reference.q), s, g)
            }
            _ => Err(self.mismatch()),
        }
    }

    /// Time derivative of the controller's flat state, given the torque just applied.
    pub fn state_derivative(
        &self,
        q: &JointVec,
        reference: &RefSample,
        state: &ControllerState,
        tau: &JointVec,
        model: Option<&dyn RobotModel>,
    ) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(state.flat_len());
        match (self.kind, state) {
            (ControllerKind::R1 | ControllerKind::T1, ControllerState::Observer(s)) => {
                let (a, b) = nicosia_observer_derivatives(s, q, tau, need_model(self.kind, model)?)?;
                out.extend(a.iter());
                out.extend(b.iter());
            }
            (ControllerKind::R2, ControllerState::Filter(f)) => {
                out.extend(f.derivatives(q)?.0.iter());
            }
            (ControllerKind::T2, ControllerState::Filter(f)) => {
                out.extend(f.derivatives(&(q - &reference.q))?.0.iter());
            }
            (ControllerKind::R3, ControllerState::FilterIntegral { filter, .. }) => {
                out.extend(filter.derivatives(q)?.0.iter());
                out.extend(r3_integral_rate(q, &reference.q, filter, &self.gains)?.iter());
            }
            (ControllerKind::T3, ControllerState::LinearObserver(s)) => {
                let (a, b) = linear_observer_derivatives(s, &(q - &reference.q))?;
                out.extend(a.iter());
                out.extend(b.iter());
            }
            _ => return Err(self.mismatch()),
        }
        Ok(out)
    }

    /// Labels of [`ControlLaw::internals`], e.g. `theta1..thetan`.
    pub fn internal_labels(&self, n: usize) -> Vec<String> {
        let groups: &[&str] = match self.kind {
            ControllerKind::R1 | ControllerKind::T1 => &["qhat", "vhat"],
            ControllerKind::R2 | ControllerKind::T2 => &["theta"],
            ControllerKind::R3 => &["theta", "nu"],
            ControllerKind::T3 => &["ehat", "w"],
        };
        groups
            .iter()
            .flat_map(|g| (1..=n).map(move |i| format!("{g}{i}")))
            .collect()
    }

    /// Observable internal signals: `ϑ`, `ν`, `q̂`, `v̂`, `ê`, `w` as applicable.
    pub fn internals(&self, q: &JointVec, reference: &RefSample, state: &ControllerState) -> Vec<f64> {
        match state {
            ControllerState::Observer(s) => s.q_hat.iter().chain(s.v_hat.iter()).copied().collect(),
            ControllerState::Filter(f) => {
                let input = if self.kind == ControllerKind::T2 {
                    q - &reference.q
                } else {
                    q.clone()
                };
                f.output(&input).iter().copied().collect()
            }
            ControllerState::FilterIntegral { filter, nu } => {
                let mut v: Vec<f64> = filter.output(q).iter().copied().collect();
                v.extend(nu.iter());
                v
            }
            ControllerState::LinearObserver(s) => s.e_hat.iter().chain(s.w.iter()).copied().collect(),
        }
    }
}
