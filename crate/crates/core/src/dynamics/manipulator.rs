use alloc::format;

use super::{
    JointMat, JointVec, Phantom3, Phantom3Params, Planar2Params, PlanarChain, PointMassParams,
    RobotModel,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    PointMass,
    Planar2,
    Phantom3,
}

impl ModelKind {
    pub fn id(self) -> &'static str {
        match self {
            ModelKind::PointMass => "point_mass",
            ModelKind::Planar2 => "planar2",
            ModelKind::Phantom3 => "phantom3",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        match id {
            "point_mass" => Some(ModelKind::PointMass),
            "planar2" => Some(ModelKind::Planar2),
            "phantom3" => Some(ModelKind::Phantom3),
            _ => None,
        }
    }
}

/// One of the shipped models, identified by its parameter record.
///
/// Immutable once built; parameter changes (payload jumps) produce a new
/// instance through [`Manipulator::with_param_delta`].
#[derive(Debug, Clone, PartialEq)]
pub enum Manipulator {
    PointMass(PointMassParams, PlanarChain),
    Planar2(Planar2Params, PlanarChain),
    Phantom3(Phantom3),
}

impl Manipulator {
    pub fn point_mass(params: PointMassParams) -> Result<Self> {
        params.validate().map_err(Error::invalid)?;
        let chain = PlanarChain::point_mass(&params);
        Ok(Manipulator::PointMass(params, chain))
    }

    pub fn planar2(params: Planar2Params) -> Result<Self> {
        params.validate().map_err(Error::invalid)?;
        let chain = PlanarChain::two_link(&params);
        Ok(Manipulator::Planar2(params, chain))
    }

    pub fn phantom3(params: Phantom3Params) -> Result<Self> {
        params.validate().map_err(Error::invalid)?;
        Ok(Manipulator::Phantom3(Phantom3::new(params)))
    }

    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::PointMass => Self::point_mass(PointMassParams::default()),
            ModelKind::Planar2 => Self::planar2(Planar2Params::default()),
            ModelKind::Phantom3 => Self::phantom3(Phantom3Params::default()),
        }
        .expect("default parameters are valid")
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Manipulator::PointMass(..) => ModelKind::PointMass,
            Manipulator::Planar2(..) => ModelKind::Planar2,
            Manipulator::Phantom3(_) => ModelKind::Phantom3,
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            Manipulator::PointMass(..) => PointMassParams::FIELDS,
            Manipulator::Planar2(..) => Planar2Params::FIELDS,
            Manipulator::Phantom3(_) => Phantom3Params::FIELDS,
        }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.clone().param_slot(name).map(|v| *v)
    }

    fn param_slot(&mut self, name: &str) -> Option<&mut f64> {
        match self {
            Manipulator::PointMass(p, _) => p.field_mut(name),
            Manipulator::Planar2(p, _) => p.field_mut(name),
            Manipulator::Phantom3(m) => m.params.field_mut(name),
        }
    }

    /// A copy with parameter `name` increased by `delta`.
    pub fn with_param_delta(&self, name: &str, delta: f64) -> Result<Self> {
        let mut next = self.clone();
        let slot = next.param_slot(name).ok_or_else(|| {
            Error::invalid(format!("model {} has no parameter '{name}'", self.kind().id()))
        })?;
        *slot += delta;
        match next {
            Manipulator::PointMass(p, _) => Self::point_mass(p),
            Manipulator::Planar2(p, _) => Self::planar2(p),
            Manipulator::Phantom3(m) => Self::phantom3(m.params),
        }
    }

    fn inner(&self) -> &dyn RobotModel {
        match self {
            Manipulator::PointMass(_, c) | Manipulator::Planar2(_, c) => c,
            Manipulator::Phantom3(m) => m,
        }
    }
}

impl RobotModel for Manipulator {
    fn dof(&self) -> usize {
        self.inner().dof()
    }

    fn mass_matrix(&self, q: &JointVec) -> JointMat {
        self.inner().mass_matrix(q)
    }

    fn mass_matrix_partial(&self, q: &JointVec, k: usize) -> JointMat {
        self.inner().mass_matrix_partial(q, k)
    }

    fn gravity_torque(&self, q: &JointVec) -> JointVec {
        self.inner().gravity_torque(q)
    }

    fn potential_energy(&self, q: &JointVec) -> f64 {
        self.inner().potential_energy(q)
    }

    fn coriolis_matrix(&self, q: &JointVec, v: &JointVec) -> JointMat {
        self.inner().coriolis_matrix(q, v)
    }

    fn coriolis_gain_bound(&self) -> Option<f64> {
        self.inner().coriolis_gain_bound()
    }
}
