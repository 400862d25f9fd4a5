use libm::{cos, sin};
use nalgebra::{DMatrix, DVector};

use super::{JointMat, JointVec, RobotModel};

/// Parameters of the three-joint haptic arm.
///
/// Joint 1 rotates the whole arm about the vertical axis, joint 2 drives the
/// proximal link (length `l_1`) and joint 3 drives the distal link `a` through
/// a parallelogram, so `θ_3` is measured absolutely. Link `a` carries mass
/// `m_a` at `l_2 / 2`, link `c` carries `m_c` at `l_1 / 2` with lever `l_3`.
/// The `*_xx` inertias act about the in-plane rotation axes; `*_yy`/`*_zz`
/// combine into the base-rotation inertia.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct Phantom3Params {
    pub m_a: f64,
    pub m_c: f64,
    pub l_1: f64,
    pub l_2: f64,
    pub l_3: f64,
    pub i_ayy: f64,
    pub i_azz: f64,
    pub i_beyy: f64,
    pub i_bezz: f64,
    pub i_cyy: f64,
    pub i_czz: f64,
    pub i_dfyy: f64,
    pub i_dfzz: f64,
    pub i_axx: f64,
    pub i_bexx: f64,
    pub i_cxx: f64,
    pub i_dfxx: f64,
    pub g: f64,
}

impl Default for Phantom3Params {
    /// Lengths, masses and inertias of a PHANToM-class desktop haptic arm.
    fn default() -> Self {
        Self {
            m_a: 0.0202,
            m_c: 0.0249,
            l_1: 0.215,
            l_2: 0.170,
            l_3: 0.0325,
            i_ayy: 0.001843e-4,
            i_azz: 0.5568e-4,
            i_beyy: 10.06e-4,
            i_bezz: 0.591e-4,
            i_cyy: 0.9408e-4,
            i_czz: 0.9377e-4,
            i_dfyy: 0.629e-4,
            i_dfzz: 6.246e-4,
            i_axx: 0.4864e-4,
            i_bexx: 11.09e-4,
            i_cxx: 0.2499e-4,
            i_dfxx: 7.11e-4,
            g: 9.80665,
        }
    }
}

impl Phantom3Params {
    pub const FIELDS: &'static [&'static str] = &[
        "m_a", "m_c", "l_1", "l_2", "l_3", "i_ayy", "i_azz", "i_beyy", "i_bezz", "i_cyy",
        "i_czz", "i_dfyy", "i_dfzz", "i_axx", "i_bexx", "i_cxx", "i_dfxx", "g",
    ];

    pub fn field_mut(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "m_a" => &mut self.m_a,
            "m_c" => &mut self.m_c,
            "l_1" => &mut self.l_1,
            "l_2" => &mut self.l_2,
            "l_3" => &mut self.l_3,
            "i_ayy" => &mut self.i_ayy,
            "i_azz" => &mut self.i_azz,
            "i_beyy" => &mut self.i_beyy,
            "i_bezz" => &mut self.i_bezz,
            "i_cyy" => &mut self.i_cyy,
            "i_czz" => &mut self.i_czz,
            "i_dfyy" => &mut self.i_dfyy,
            "i_dfzz" => &mut self.i_dfzz,
            "i_axx" => &mut self.i_axx,
            "i_bexx" => &mut self.i_bexx,
            "i_cxx" => &mut self.i_cxx,
            "i_dfxx" => &mut self.i_dfxx,
            "g" => &mut self.g,
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        let positive = [self.m_a, self.m_c, self.l_1, self.l_2, self.l_3];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err("masses and lengths must be strictly positive");
        }
        let inertias = [
            self.i_ayy, self.i_azz, self.i_beyy, self.i_bezz, self.i_cyy, self.i_czz,
            self.i_dfyy, self.i_dfzz, self.i_axx, self.i_bexx, self.i_cxx, self.i_dfxx,
        ];
        if inertias.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err("inertias must be nonnegative");
        }
        if !self.g.is_finite() {
            return Err("gravity must be finite");
        }
        Ok(())
    }

    /// `α_1`: coefficient of `cos 2θ_2` in `8 H_11`.
    pub fn alpha_1(&self) -> f64 {
        4.0 * self.i_beyy - 4.0 * self.i_bezz + 4.0 * self.i_cyy - 4.0 * self.i_czz
            + 4.0 * self.l_1 * self.l_1 * self.m_a
            + self.l_1 * self.l_1 * self.m_c
    }

    /// `α_2`: minus the coefficient of `cos 2θ_3` in `8 H_11`.
    pub fn alpha_2(&self) -> f64 {
        -4.0 * self.i_ayy + 4.0 * self.i_azz - 4.0 * self.i_dfyy + 4.0 * self.i_dfzz
            + self.l_2 * self.l_2 * self.m_a
            + 4.0 * self.l_3 * self.l_3 * self.m_c
    }

    /// `α_3 = l_1 (l_2 m_a + l_3 m_c)`.
    pub fn alpha_3(&self) -> f64 {
        self.l_1 * (self.l_2 * self.m_a + self.l_3 * self.m_c)
    }

    /// `k_c = 3 (¼ max(|α_1|, |α_2|) + |α_3|)`, from the column-sum bound on `C`.
    pub fn coriolis_bound(&self) -> f64 {
        let a12 = self.alpha_1().abs().max(self.alpha_2().abs());
        3.0 * (0.25 * a12 + self.alpha_3().abs())
    }
}

/// Three-joint haptic arm with `H_12 = H_13 = 0`, `C_22 = C_33 = 0`, `G_1 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Phantom3 {
    pub params: Phantom3Params,
}

impl Phantom3 {
    pub fn new(params: Phantom3Params) -> Self {
        Self { params }
    }

    // (∂H11/∂θ2, ∂H11/∂θ3, ∂H23/∂θ3); ∂H23/∂θ2 is the negation of the last.
    fn slopes(&self, q: &JointVec) -> (f64, f64, f64) {
        let p = &self.params;
        let (s2, c2) = (sin(q[1]), cos(q[1]));
        let (s3, c3) = (sin(q[2]), cos(q[2]));
        let (ra, rc) = self.radii(c2, s3);
        let a = 2.0 * s2 * c2 * (p.i_bezz + p.i_czz - p.i_beyy - p.i_cyy)
            - 2.0 * p.m_a * ra * p.l_1 * s2
            - p.m_c * rc * p.l_1 * s2;
        let b = 2.0 * s3 * c3 * (p.i_azz + p.i_dfzz - p.i_ayy - p.i_dfyy)
            + p.m_a * ra * p.l_2 * c3
            + 2.0 * p.m_c * rc * p.l_3 * c3;
        (a, b, 0.5 * p.alpha_3() * cos(q[1] - q[2]))
    }

    // Horizontal distance of the two lumped masses from the base axis.
    fn radii(&self, c2: f64, s3: f64) -> (f64, f64) {
        let p = &self.params;
        (p.l_1 * c2 + 0.5 * p.l_2 * s3, 0.5 * p.l_1 * c2 + p.l_3 * s3)
    }
}

impl RobotModel for Phantom3 {
    fn dof(&self) -> usize {
        3
    }

    fn mass_matrix(&self, q: &JointVec) -> JointMat {
        let p = &self.params;
        let (s2, c2) = (sin(q[1]), cos(q[1]));
        let (s3, c3) = (sin(q[2]), cos(q[2]));
        let (ra, rc) = self.radii(c2, s3);
        let h11 = (p.i_ayy + p.i_dfyy) * c3 * c3
            + (p.i_azz + p.i_dfzz) * s3 * s3
            + (p.i_beyy + p.i_cyy) * c2 * c2
            + (p.i_bezz + p.i_czz) * s2 * s2
            + p.m_a * ra * ra
            + p.m_c * rc * rc;
        let h22 = p.i_bexx + p.i_cxx + p.m_a * p.l_1 * p.l_1 + 0.25 * p.m_c * p.l_1 * p.l_1;
        let h33 = p.i_axx + p.i_dfxx + 0.25 * p.m_a * p.l_2 * p.l_2 + p.m_c * p.l_3 * p.l_3;
        let h23 = -0.5 * p.alpha_3() * sin(q[1] - q[2]);
        DMatrix::from_row_slice(3, 3, &[h11, 0.0, 0.0, 0.0, h22, h23, 0.0, h23, h33])
    }

    fn mass_matrix_partial(&self, q: &JointVec, k: usize) -> JointMat {
        let (a, b, d) = self.slopes(q);
        let mut out = DMatrix::zeros(3, 3);
        match k {
            1 => {
                out[(0, 0)] = a;
                out[(1, 2)] = -d;
                out[(2, 1)] = -d;
            }
            2 => {
                out[(0, 0)] = b;
                out[(1, 2)] = d;
                out[(2, 1)] = d;
            }
            _ => {}
        }
        out
    }

    fn coriolis_matrix(&self, q: &JointVec, v: &JointVec) -> JointMat {
        let (a, b, d) = self.slopes(q);
        DMatrix::from_row_slice(
            3,
            3,
            &[
                0.5 * (a * v[1] + b * v[2]),
                0.5 * a * v[0],
                0.5 * b * v[0],
                -0.5 * a * v[0],
                0.0,
                d * v[2],
                -0.5 * b * v[0],
                -d * v[1],
                0.0,
            ],
        )
    }

    fn gravity_torque(&self, q: &JointVec) -> JointVec {
        let p = &self.params;
        DVector::from_vec(alloc::vec![
            0.0,
            p.g * cos(q[1]) * p.l_1 * (p.m_a + 0.5 * p.m_c),
            p.g * sin(q[2]) * (0.5 * p.m_a * p.l_2 + p.m_c * p.l_3),
        ])
    }

    fn potential_energy(&self, q: &JointVec) -> f64 {
        let p = &self.params;
        let (s2, c3) = (sin(q[1]), cos(q[2]));
        p.g * (p.m_a * (p.l_1 * s2 - 0.5 * p.l_2 * c3) + p.m_c * (0.5 * p.l_1 * s2 - p.l_3 * c3))
    }

    fn coriolis_gain_bound(&self) -> Option<f64> {
        Some(self.params.coriolis_bound())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::christoffel_matrix;
    use crate::sampling;
    use core::f64::consts::PI;

    fn model() -> Phantom3 {
        Phantom3::new(Phantom3Params::default())
    }

    #[test]
    fn coriolis_bound_matches_alpha_expression() {
        let p = Phantom3Params::default();
        let a12 = p.alpha_1().abs().max(p.alpha_2().abs());
        let expected = 3.0 * (0.25 * a12 + p.alpha_3().abs());
        assert!((p.coriolis_bound() - expected).abs() < 1e-15);
        assert_eq!(model().coriolis_gain_bound(), Some(p.coriolis_bound()));
    }

    #[test]
    fn partials_match_central_differences() {
        let m = model();
        let mut rng = sampling::rng(3);
        let h = 1e-6;
        for _ in 0..50 {
            let q = sampling::uniform_vec(&mut rng, 3, -PI, PI);
            for k in 0..3 {
                let mut plus = q.clone();
                let mut minus = q.clone();
                plus[k] += h;
                minus[k] -= h;
                let fd = (m.mass_matrix(&plus) - m.mass_matrix(&minus)) / (2.0 * h);
                assert!((fd - m.mass_matrix_partial(&q, k)).amax() < 1e-9);
            }
        }
    }

    #[test]
    fn gravity_is_potential_gradient() {
        let m = model();
        let mut rng = sampling::rng(4);
        let h = 1e-6;
        for _ in 0..50 {
            let q = sampling::uniform_vec(&mut rng, 3, -PI, PI);
            let g = m.gravity_torque(&q);
            for k in 0..3 {
                let mut plus = q.clone();
                let mut minus = q.clone();
                plus[k] += h;
                minus[k] -= h;
                let fd = (m.potential_energy(&plus) - m.potential_energy(&minus)) / (2.0 * h);
                assert!((fd - g[k]).abs() < 1e-8, "joint {k}: {fd} vs {}", g[k]);
            }
        }
    }

    #[test]
    fn closed_form_coriolis_agrees_with_christoffel_symbols() {
        let m = model();
        let mut rng = sampling::rng(5);
        for _ in 0..200 {
            let q = sampling::uniform_vec(&mut rng, 3, -PI, PI);
            let v = sampling::uniform_vec(&mut rng, 3, -5.0, 5.0);
            let diff = m.coriolis_matrix(&q, &v) - christoffel_matrix(&m, &q, &v);
            assert!(diff.amax() < 1e-15);
        }
    }

    #[test]
    fn base_joint_carries_no_gravity() {
        let m = model();
        let q = JointVec::from_vec(alloc::vec![0.3, 0.1, -0.4]);
        assert_eq!(m.gravity_torque(&q)[0], 0.0);
    }

    #[test]
    fn validation_rejects_nonpositive_mass() {
        let mut p = Phantom3Params::default();
        *p.field_mut("m_a").unwrap() = -1.0;
        assert!(p.validate().is_err());
        assert!(p.field_mut("no_such_field").is_none());
    }
}
