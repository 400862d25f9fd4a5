use alloc::vec::Vec;
use libm::{cos, sin};
use nalgebra::{DMatrix, DVector, Matrix2xX};

use super::{JointMat, JointVec, RobotModel};

/// Two-link arm moving in a vertical plane.
///
/// `q_1` is measured from the horizontal, `q_2` relative to link 1, so the
/// arm hangs straight down at `q = (−π/2, 0)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct Planar2Params {
    pub m_1: f64,
    pub m_2: f64,
    pub l_1: f64,
    pub l_2: f64,
    pub lc_1: f64,
    pub lc_2: f64,
    pub i_1: f64,
    pub i_2: f64,
    pub g: f64,
}

impl Default for Planar2Params {
    fn default() -> Self {
        Self {
            m_1: 1.0,
            m_2: 0.8,
            l_1: 0.5,
            l_2: 0.4,
            lc_1: 0.25,
            lc_2: 0.2,
            i_1: 0.02,
            i_2: 0.011,
            g: 9.80665,
        }
    }
}

impl Planar2Params {
    pub const FIELDS: &'static [&'static str] =
        &["m_1", "m_2", "l_1", "l_2", "lc_1", "lc_2", "i_1", "i_2", "g"];

    pub fn field_mut(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "m_1" => &mut self.m_1,
            "m_2" => &mut self.m_2,
            "l_1" => &mut self.l_1,
            "l_2" => &mut self.l_2,
            "lc_1" => &mut self.lc_1,
            "lc_2" => &mut self.lc_2,
            "i_1" => &mut self.i_1,
            "i_2" => &mut self.i_2,
            "g" => &mut self.g,
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        let positive = [self.m_1, self.m_2, self.l_1, self.l_2];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err("masses and lengths must be strictly positive");
        }
        if !(0.0..=self.l_1).contains(&self.lc_1) || !(0.0..=self.l_2).contains(&self.lc_2) {
            return Err("center-of-mass offsets must lie within their links");
        }
        if !(self.i_1 >= 0.0 && self.i_2 >= 0.0) {
            return Err("link inertias must be nonnegative");
        }
        if !self.g.is_finite() {
            return Err("gravity must be finite");
        }
        Ok(())
    }
}

/// Single point mass on a massless rod (a pendulum): `H = m l²`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PointMassParams {
    pub m: f64,
    pub l: f64,
    pub g: f64,
}

impl Default for PointMassParams {
    fn default() -> Self {
        Self {
            m: 1.0,
            l: 1.0,
            g: 9.80665,
        }
    }
}

impl PointMassParams {
    pub const FIELDS: &'static [&'static str] = &["m", "l", "g"];

    pub fn field_mut(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "m" => &mut self.m,
            "l" => &mut self.l,
            "g" => &mut self.g,
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.m.is_finite() && self.m > 0.0 && self.l.is_finite() && self.l > 0.0) {
            return Err("mass and length must be strictly positive");
        }
        if !self.g.is_finite() {
            return Err("gravity must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarLink {
    pub mass: f64,
    pub length: f64,
    /// Distance from the proximal joint to the link's center of mass.
    pub com: f64,
    /// Rotational inertia about the center of mass.
    pub inertia: f64,
}

/// Serial chain of revolute links in a vertical plane, with relative joint
/// angles. The inertia matrix is assembled from center-of-mass Jacobians:
/// `H = Σ m_i J_iᵀ J_i + I_i a_i a_iᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarChain {
    pub links: Vec<PlanarLink>,
    pub g: f64,
}

impl PlanarChain {
    pub fn two_link(p: &Planar2Params) -> Self {
        Self {
            links: alloc::vec![
                PlanarLink {
                    mass: p.m_1,
                    length: p.l_1,
                    com: p.lc_1,
                    inertia: p.i_1,
                },
                PlanarLink {
                    mass: p.m_2,
                    length: p.l_2,
                    com: p.lc_2,
                    inertia: p.i_2,
                },
            ],
            g: p.g,
        }
    }

    pub fn point_mass(p: &PointMassParams) -> Self {
        Self {
            links: alloc::vec![PlanarLink {
                mass: p.m,
                length: p.l,
                com: p.l,
                inertia: 0.0,
            }],
            g: p.g,
        }
    }

    fn absolute_angles(&self, q: &JointVec) -> Vec<f64> {
        q.iter()
            .scan(0.0, |acc, qi| {
                *acc += qi;
                Some(*acc)
            })
            .collect()
    }

    // Segments (length, absolute angle index) from the base to link i's COM.
    fn segments(&self, i: usize) -> impl Iterator<Item = (f64, usize)> + '_ {
        (0..i)
            .map(|j| (self.links[j].length, j))
            .chain(core::iter::once((self.links[i].com, i)))
    }

    fn com_jacobian(&self, phi: &[f64], i: usize) -> Matrix2xX<f64> {
        let n = self.links.len();
        let mut jac = Matrix2xX::zeros(n);
        for (len, j) in self.segments(i) {
            for k in 0..=j {
                jac[(0, k)] -= len * sin(phi[j]);
                jac[(1, k)] += len * cos(phi[j]);
            }
        }
        jac
    }

    fn com_jacobian_partial(&self, phi: &[f64], i: usize, m: usize) -> Matrix2xX<f64> {
        let n = self.links.len();
        let mut djac = Matrix2xX::zeros(n);
        for (len, j) in self.segments(i) {
            if j < m {
                continue;
            }
            for k in 0..=j {
                djac[(0, k)] -= len * cos(phi[j]);
                djac[(1, k)] -= len * sin(phi[j]);
            }
        }
        djac
    }
}

impl RobotModel for PlanarChain {
    fn dof(&self) -> usize {
        self.links.len()
    }

    fn mass_matrix(&self, q: &JointVec) -> JointMat {
        let n = self.dof();
        let phi = self.absolute_angles(q);
        let mut h = DMatrix::zeros(n, n);
        for (i, link) in self.links.iter().enumerate() {
            let jac = self.com_jacobian(&phi, i);
            h += link.mass * jac.transpose() * &jac;
            for r in 0..=i {
                for c in 0..=i {
                    h[(r, c)] += link.inertia;
                }
            }
        }
        h
    }

    fn mass_matrix_partial(&self, q: &JointVec, m: usize) -> JointMat {
        let n = self.dof();
        let phi = self.absolute_angles(q);
        let mut dh = DMatrix::zeros(n, n);
        for (i, link) in self.links.iter().enumerate() {
            let jac = self.com_jacobian(&phi, i);
            let djac = self.com_jacobian_partial(&phi, i, m);
            let prod = djac.transpose() * &jac;
            dh += link.mass * (&prod + prod.transpose());
        }
        dh
    }

    fn gravity_torque(&self, q: &JointVec) -> JointVec {
        let phi = self.absolute_angles(q);
        let mut g = DVector::zeros(self.dof());
        for (i, link) in self.links.iter().enumerate() {
            let jac = self.com_jacobian(&phi, i);
            g += link.mass * self.g * jac.row(1).transpose();
        }
        g
    }

    fn potential_energy(&self, q: &JointVec) -> f64 {
        let phi = self.absolute_angles(q);
        self.links
            .iter()
            .enumerate()
            .map(|(i, link)| {
                let height: f64 = self.segments(i).map(|(len, j)| len * sin(phi[j])).sum();
                link.mass * self.g * height
            })
            .sum()
    }
}

impl Planar2Params {
    /// Textbook `(H(q), G(q))` for the two-link arm, independent of [`PlanarChain`].
    pub fn closed_form(&self, q: &JointVec) -> (JointMat, JointVec) {
        let p = self;
        let c2 = cos(q[1]);
        let h11 = p.m_1 * p.lc_1 * p.lc_1
            + p.m_2 * (p.l_1 * p.l_1 + p.lc_2 * p.lc_2 + 2.0 * p.l_1 * p.lc_2 * c2)
            + p.i_1
            + p.i_2;
        let h12 = p.m_2 * (p.lc_2 * p.lc_2 + p.l_1 * p.lc_2 * c2) + p.i_2;
        let h22 = p.m_2 * p.lc_2 * p.lc_2 + p.i_2;
        let c12 = cos(q[0] + q[1]);
        let g = DVector::from_vec(alloc::vec![
            p.g * ((p.m_1 * p.lc_1 + p.m_2 * p.l_1) * cos(q[0]) + p.m_2 * p.lc_2 * c12),
            p.g * p.m_2 * p.lc_2 * c12,
        ]);
        (DMatrix::from_row_slice(2, 2, &[h11, h12, h12, h22]), g)
    }
}
