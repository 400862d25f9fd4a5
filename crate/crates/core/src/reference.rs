//! Desired joint motions and the bound constants tracking gain conditions use.

use alloc::vec::Vec;
use core::f64::consts::PI;
use libm::{cos, sin, sqrt};

use crate::dynamics::JointVec;
use crate::error::{Error, Result};

/// `q_d(t) = offset + amplitude · sin(frequency · t + phase)` for one joint.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SineComponent {
    pub offset: f64,
    pub amplitude: f64,
    /// rad/s
    pub frequency: f64,
    pub phase: f64,
}

impl SineComponent {
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        let arg = self.frequency * t + self.phase;
        let (s, c) = (sin(arg), cos(arg));
        let w = self.frequency;
        (
            self.offset + self.amplitude * s,
            self.amplitude * w * c,
            -self.amplitude * w * w * s,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    SetPoint(JointVec),
    Sinusoid(Vec<SineComponent>),
}

/// Desired position, velocity and acceleration at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct RefSample {
    pub q: JointVec,
    pub qd: JointVec,
    pub qdd: JointVec,
}

impl Reference {
    pub fn dof(&self) -> usize {
        match self {
            Reference::SetPoint(q) => q.len(),
            Reference::Sinusoid(c) => c.len(),
        }
    }

    pub fn is_set_point(&self) -> bool {
        matches!(self, Reference::SetPoint(_))
    }

    pub fn sample(&self, t: f64) -> RefSample {
        match self {
            Reference::SetPoint(q) => RefSample {
                q: q.clone(),
                qd: JointVec::zeros(q.len()),
                qdd: JointVec::zeros(q.len()),
            },
            Reference::Sinusoid(comps) => {
                let n = comps.len();
                let mut s = RefSample {
                    q: JointVec::zeros(n),
                    qd: JointVec::zeros(n),
                    qdd: JointVec::zeros(n),
                };
                for (i, c) in comps.iter().enumerate() {
                    let (p, v, a) = c.eval(t);
                    s.q[i] = p;
                    s.qd[i] = v;
                    s.qdd[i] = a;
                }
                s
            }
        }
    }

    pub fn position(&self, t: f64) -> JointVec {
        match self {
            Reference::SetPoint(q) => q.clone(),
            Reference::Sinusoid(_) => self.sample(t).q,
        }
    }

    /// Same reference with every offset and amplitude multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        match self {
            Reference::SetPoint(q) => Reference::SetPoint(q * k),
            Reference::Sinusoid(comps) => Reference::Sinusoid(
                comps
                    .iter()
                    .map(|c| SineComponent {
                        offset: c.offset * k,
                        amplitude: c.amplitude * k,
                        ..*c
                    })
                    .collect(),
            ),
        }
    }

    /// Common period `2π / ω_min` over components with nonzero frequency.
    pub fn base_period(&self) -> Option<f64> {
        match self {
            Reference::SetPoint(_) => None,
            Reference::Sinusoid(comps) => comps
                .iter()
                .map(|c| c.frequency.abs())
                .filter(|w| *w > 0.0)
                .fold(None, |acc: Option<f64>, w| Some(acc.map_or(w, |a| a.min(w))))
                .map(|w| 2.0 * PI / w),
        }
    }
}

/// Set-point `[π/4, π/2, −2π/3]` used by the regulation experiments.
pub fn benchmark_setpoint() -> Reference {
    Reference::SetPoint(JointVec::from_vec(alloc::vec![PI / 4.0, PI / 2.0, -2.0 * PI / 3.0]))
}

/// `q_d(t) = [π/4 sin t + π/2, π/6 sin(2t + π/4), π/6 cos t]`.
pub fn benchmark_sinusoid() -> Reference {
    Reference::Sinusoid(alloc::vec![
        SineComponent {
            offset: PI / 2.0,
            amplitude: PI / 4.0,
            frequency: 1.0,
            phase: 0.0,
        },
        SineComponent {
            offset: 0.0,
            amplitude: PI / 6.0,
            frequency: 2.0,
            phase: PI / 4.0,
        },
        SineComponent {
            offset: 0.0,
            amplitude: PI / 6.0,
            frequency: 1.0,
            phase: PI / 2.0,
        },
    ])
}

/// Velocity bound `k_q ≥ sup ‖q̇_d‖` and mixed bound
/// `k_δ ≥ max(sup ‖q_d‖, sup ‖q̇_d‖, sup ‖q̈_d‖)`.
///
/// `k_q`/`k_delta` are sampled suprema; the `*_envelope` fields are the
/// component-wise analytic bounds `√Σ (per-joint peak)²`, which never fall
/// below the sampled values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefBounds {
    pub k_q: f64,
    pub k_delta: f64,
    pub k_q_envelope: f64,
    pub k_delta_envelope: f64,
}

pub const MIN_BOUND_SAMPLES: usize = 10_000;

pub fn ref_bounds(reference: &Reference, samples: usize) -> Result<RefBounds> {
    let comps = match reference {
        Reference::SetPoint(q) => {
            let k = q.norm();
            return Ok(RefBounds {
                k_q: 0.0,
                k_delta: k,
                k_q_envelope: 0.0,
                k_delta_envelope: k,
            });
        }
        Reference::Sinusoid(c) => c,
    };
    if samples < 2 {
        return Err(Error::invalid("reference bound sampling needs at least two points"));
    }
    let horizon = reference.base_period().unwrap_or(1.0);
    let (mut sup_q, mut sup_v, mut sup_a): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in 0..samples {
        let t = horizon * k as f64 / (samples - 1) as f64;
        let s = reference.sample(t);
        sup_q = sup_q.max(s.q.norm());
        sup_v = sup_v.max(s.qd.norm());
        sup_a = sup_a.max(s.qdd.norm());
    }
    let root_sum_sq = |f: &dyn Fn(&SineComponent) -> f64| sqrt(comps.iter().map(|c| f(c) * f(c)).sum());
    let env_q = root_sum_sq(&|c| c.offset.abs() + c.amplitude.abs());
    let env_v = root_sum_sq(&|c| (c.amplitude * c.frequency).abs());
    let env_a = root_sum_sq(&|c| (c.amplitude * c.frequency * c.frequency).abs());
    Ok(RefBounds {
        k_q: sup_v,
        k_delta: sup_q.max(sup_v).max(sup_a),
        k_q_envelope: env_v,
        k_delta_envelope: env_q.max(env_v).max(env_a),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let r = benchmark_sinusoid();
        let h = 1e-5;
        for k in 0..50 {
            let t = 0.37 * k as f64;
            let s = r.sample(t);
            let (p, m) = (r.sample(t + h), r.sample(t - h));
            assert!(((&p.q - &m.q) / (2.0 * h) - &s.qd).amax() < 1e-8);
            assert!(((&p.qd - &m.qd) / (2.0 * h) - &s.qdd).amax() < 1e-8);
        }
    }

    #[test]
    fn sinusoid_envelopes() {
        let b = ref_bounds(&benchmark_sinusoid(), MIN_BOUND_SAMPLES).unwrap();
        let k_q = sqrt((PI / 4.0).powi(2) + (PI / 3.0).powi(2) + (PI / 6.0).powi(2));
        assert!((b.k_q_envelope - k_q).abs() < 1e-12);
        assert!((b.k_q_envelope - 1.40983).abs() < 1e-5);
        assert!((b.k_delta_envelope - 2.4699).abs() < 1e-4);
        assert!(b.k_q <= b.k_q_envelope + 1e-12);
        assert!(b.k_delta <= b.k_delta_envelope + 1e-12);
        assert!(b.k_q > 0.9 * b.k_q_envelope);
    }

    #[test]
    fn set_point_bounds() {
        let b = ref_bounds(&benchmark_setpoint(), 2).unwrap();
        assert_eq!(b.k_q, 0.0);
        let norm = sqrt((PI / 4.0).powi(2) + (PI / 2.0).powi(2) + (2.0 * PI / 3.0).powi(2));
        assert!((b.k_delta - norm).abs() < 1e-12);
        assert_eq!(benchmark_setpoint().base_period(), None);
    }

    #[test]
    fn base_period_and_scaling() {
        let r = benchmark_sinusoid();
        assert!((r.base_period().unwrap() - 2.0 * PI).abs() < 1e-12);
        let s = r.scaled(2.0);
        assert!((s.position(0.3) - r.position(0.3) * 2.0).amax() < 1e-15);
        assert!(ref_bounds(&r, 1).is_err());
    }
}
