use alloc::format;

use super::ControllerKind;
use crate::dynamics::{JointMat, JointVec};
use crate::error::{Error, Result};

/// Scalar gains expanded into the diagonal structure `K_P = α_P I`,
/// `K_D = α_D I`, `L = α_L I`, `B = b I`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScalarGains {
    pub alpha_p: Option<f64>,
    pub alpha_d: Option<f64>,
    pub alpha_i: Option<f64>,
    /// Filter pole for R2/R3/T2; observer matrix gain `L` for R1/T1.
    pub alpha_l: Option<f64>,
    pub b: Option<f64>,
    /// Observer gain `k_D` of R1/T1.
    pub k_d_obs: Option<f64>,
    /// T3 observer gains.
    pub alpha_lp: Option<f64>,
    pub alpha_ld: Option<f64>,
}

/// Gain matrices of one controller. Only the fields the law uses need to be set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gains {
    pub k_p: Option<JointMat>,
    pub k_d: Option<JointMat>,
    pub k_i: Option<JointMat>,
    /// Dirty-filter gains `b_i`.
    pub b: Option<JointVec>,
    /// Dirty-filter poles `l_i`.
    pub l: Option<JointVec>,
    pub k_d_obs: Option<f64>,
    pub l_obs: Option<JointMat>,
    pub l_p: Option<JointMat>,
    pub l_d: Option<JointMat>,
}

fn missing(kind: ControllerKind, name: &str) -> Error {
    Error::invalid(format!("controller {} requires gain {name}", kind.id()))
}

pub(crate) fn required<'a, T>(kind: ControllerKind, name: &str, v: &'a Option<T>) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| missing(kind, name))
}

impl Gains {
    pub fn from_scalars(kind: ControllerKind, n: usize, s: &ScalarGains) -> Self {
        let eye = |a: Option<f64>| a.map(|a| JointMat::identity(n, n) * a);
        let diag = |a: Option<f64>| a.map(|a| JointVec::from_element(n, a));
        let mut g = Gains {
            k_p: eye(s.alpha_p),
            k_d: eye(s.alpha_d),
            ..Gains::default()
        };
        match kind {
            ControllerKind::R1 | ControllerKind::T1 => {
                g.k_d_obs = s.k_d_obs;
                g.l_obs = eye(s.alpha_l);
            }
            ControllerKind::R2 | ControllerKind::T2 => {
                g.b = diag(s.b);
                g.l = diag(s.alpha_l);
            }
            ControllerKind::R3 => {
                g.b = diag(s.b);
                g.l = diag(s.alpha_l);
                g.k_i = eye(s.alpha_i);
            }
            ControllerKind::T3 => {
                g.l_p = eye(s.alpha_lp);
                g.l_d = eye(s.alpha_ld);
            }
        }
        g
    }

    pub fn k_p(&self, kind: ControllerKind) -> Result<&JointMat> {
        required(kind, "K_P", &self.k_p)
    }

    pub fn k_d(&self, kind: ControllerKind) -> Result<&JointMat> {
        required(kind, "K_D", &self.k_d)
    }

    pub fn k_i(&self, kind: ControllerKind) -> Result<&JointMat> {
        required(kind, "K_I", &self.k_i)
    }

    pub fn filter(&self, kind: ControllerKind) -> Result<(&JointVec, &JointVec)> {
        Ok((required(kind, "B", &self.b)?, required(kind, "L", &self.l)?))
    }

    pub fn observer(&self, kind: ControllerKind) -> Result<(f64, &JointMat)> {
        Ok((*required(kind, "k_D_obs", &self.k_d_obs)?, required(kind, "L_obs", &self.l_obs)?))
    }

    pub fn linear_observer(&self, kind: ControllerKind) -> Result<(&JointMat, &JointMat)> {
        Ok((required(kind, "L_D", &self.l_d)?, required(kind, "L_P", &self.l_p)?))
    }
}
