use proptest::prelude::*;
use velfree_core::dynamics::{forward_dynamics, kinetic_energy, JointVec, Manipulator, ModelKind, RobotModel};
use velfree_core::dynamics::properties::{commute_residual, skew_residual};

fn vec3() -> impl Strategy<Value = JointVec> {
    prop::array::uniform3(-3.0f64..3.0).prop_map(|a| JointVec::from_vec(a.to_vec()))
}

proptest! {
    #[test]
    fn phantom_inertia_is_symmetric_positive_definite(q in vec3()) {
        let m = Manipulator::default_for(ModelKind::Phantom3);
        let h = m.mass_matrix(&q);
        prop_assert!((&h - h.transpose()).amax() < 1e-15);
        prop_assert!(h.symmetric_eigenvalues().min() > 0.0);
    }

    #[test]
    fn phantom_structure(q in vec3(), v in vec3(), x in vec3()) {
        let m = Manipulator::default_for(ModelKind::Phantom3);
        prop_assert!(skew_residual(&m, &q, &v, &x) < 1e-6);
        prop_assert!(commute_residual(&m, &q, &v, &x) < 1e-12);
    }

    #[test]
    fn gravity_torque_balances_at_rest(q in vec3()) {
        let m = Manipulator::default_for(ModelKind::Phantom3);
        let acc = forward_dynamics(&m, &q, &JointVec::zeros(3), &m.gravity_torque(&q)).unwrap();
        prop_assert!(acc.amax() < 1e-9);
    }

    #[test]
    fn kinetic_energy_is_nonnegative(q in vec3(), v in vec3()) {
        let m = Manipulator::default_for(ModelKind::Planar2);
        let q2 = q.rows(0, 2).into_owned();
        let v2 = v.rows(0, 2).into_owned();
        prop_assert!(kinetic_energy(&m, &q2, &v2).unwrap() >= 0.0);
    }
}
