use std::f64::consts::PI;

use velfree_core::control::{ControlLaw, ControllerKind, Gains, ScalarGains};
use velfree_core::dynamics::{JointVec, Manipulator, ModelKind, Planar2Params};
use velfree_core::reference::{benchmark_setpoint, benchmark_sinusoid};
use velfree_core::sim::{
    first_lyapunov_violation, integrated_abs_error, r2_lyapunov_series, run_scenario, Disturbance,
    Scenario, SimStatus,
};

fn r2_gains(alpha_p: f64, alpha_d: f64) -> Gains {
    Gains::from_scalars(
        ControllerKind::R2,
        3,
        &ScalarGains {
            alpha_p: Some(alpha_p),
            alpha_d: Some(alpha_d),
            alpha_l: Some(100.0),
            b: Some(5.0),
            ..Default::default()
        },
    )
}

fn r2_scenario(horizon: f64) -> Scenario {
    Scenario::new(
        Manipulator::default_for(ModelKind::Phantom3),
        ControlLaw::new(ControllerKind::R2, r2_gains(10.0, 10.0)),
        benchmark_setpoint(),
        JointVec::zeros(3),
        horizon,
    )
}

#[test]
fn r2_reaches_the_set_point() {
    let r = run_scenario(&r2_scenario(10.0)).unwrap();
    assert!(r.is_completed());
    assert!(r.final_error_norm() < 1e-6, "{}", r.final_error_norm());
}

#[test]
fn r2_lyapunov_function_never_increases() {
    let s = r2_scenario(5.0);
    let r = run_scenario(&s).unwrap();
    let v = r2_lyapunov_series(&r, &s.law.gains, &s.plant).unwrap();
    assert_eq!(first_lyapunov_violation(&v, 1e-9), None);
    assert!(v[v.len() - 1] < 1e-6 * v[0]);
}

#[test]
fn runs_are_bit_identical() {
    let mut s = r2_scenario(1.0);
    s.disturbances.push(Disturbance { time: 0.5, param: "m_a".into(), delta: 0.1 });
    assert_eq!(run_scenario(&s).unwrap(), run_scenario(&s).unwrap());
}

#[test]
fn disturbance_is_applied_once_at_its_step() {
    let mut s = r2_scenario(1.0);
    s.disturbances.push(Disturbance { time: 0.25, param: "m_a".into(), delta: 1.0 });
    let r = run_scenario(&s).unwrap();
    assert_eq!(r.disturbances.len(), 1);
    assert_eq!(r.disturbances[0].step, 250);
    assert!((r.disturbances[0].time - 0.25).abs() < 1e-12);
}

#[test]
fn unknown_disturbance_parameter_is_rejected() {
    let mut s = r2_scenario(1.0);
    s.disturbances.push(Disturbance { time: 0.5, param: "m_z".into(), delta: 1.0 });
    assert!(run_scenario(&s).is_err());
    let mut s = r2_scenario(1.0);
    s.disturbances.push(Disturbance { time: 2.0, param: "m_a".into(), delta: 1.0 });
    assert!(run_scenario(&s).is_err());
}

#[test]
fn invalid_settings_are_rejected() {
    let mut s = r2_scenario(1.0);
    s.dt = 0.0;
    assert!(run_scenario(&s).is_err());
    let mut s = r2_scenario(1.0);
    s.q0 = JointVec::zeros(2);
    assert!(run_scenario(&s).is_err());
    let mut s = r2_scenario(1.0);
    s.record_every = 0;
    assert!(run_scenario(&s).is_err());
}

#[test]
fn weightless_arm_without_gains_stays_put() {
    let plant = Manipulator::planar2(Planar2Params { g: 0.0, ..Default::default() }).unwrap();
    let gains = Gains::from_scalars(
        ControllerKind::R2,
        2,
        &ScalarGains {
            alpha_p: Some(0.0),
            alpha_d: Some(0.0),
            alpha_l: Some(10.0),
            b: Some(10.0),
            ..Default::default()
        },
    );
    let q0 = JointVec::from_vec(vec![0.3, -0.8]);
    let s = Scenario::new(
        plant,
        ControlLaw::new(ControllerKind::R2, gains),
        velfree_core::reference::Reference::SetPoint(JointVec::from_vec(vec![1.0, 1.0])),
        q0.clone(),
        2.0,
    );
    let r = run_scenario(&s).unwrap();
    for k in 0..r.len() {
        assert!((JointVec::from_column_slice(r.q_at(k)) - &q0).amax() < 1e-15);
        assert!(r.tau_at(k).iter().all(|t| *t == 0.0));
    }
}

#[test]
fn stronger_proportional_gain_tracks_faster_under_observer_feedback() {
    let iae = |alpha_p: f64| {
        let gains = Gains::from_scalars(
            ControllerKind::T1,
            3,
            &ScalarGains {
                alpha_p: Some(alpha_p),
                alpha_d: Some(1.0),
                alpha_l: Some(10.0),
                k_d_obs: Some(2000.0),
                ..Default::default()
            },
        );
        let mut s = Scenario::new(
            Manipulator::default_for(ModelKind::Phantom3),
            ControlLaw::new(ControllerKind::T1, gains),
            benchmark_sinusoid(),
            JointVec::from_vec(vec![PI / 2.0 - 0.5, 0.3, 0.2]),
            1.0,
        );
        s.dt = 1e-4;
        let r = run_scenario(&s).unwrap();
        assert!(r.is_completed());
        integrated_abs_error(&r, 0.0, 1.0)
    };
    assert!(iae(20.0) < iae(5.0));
}

#[test]
fn divergence_stops_the_run_early() {
    let mut s = r2_scenario(5.0);
    s.law = ControlLaw::new(ControllerKind::R2, r2_gains(-50.0, 1.0));
    s.divergence_threshold = 10.0;
    let r = run_scenario(&s).unwrap();
    match r.status {
        SimStatus::Diverged { time, .. } => assert!(time < 5.0 && time > 0.0),
        SimStatus::Completed => panic!("expected divergence"),
    }
    assert!(!r.is_empty());
}

#[test]
fn record_every_keeps_the_final_sample() {
    let mut s = r2_scenario(1.0);
    s.record_every = 300;
    let r = run_scenario(&s).unwrap();
    for (t, expected) in r.time.iter().zip([0.0, 0.3, 0.6, 0.9, 1.0]) {
        assert!((t - expected).abs() < 1e-12);
    }
    assert_eq!(r.len(), 5);
    assert!((r.time[4] - 1.0).abs() < 1e-12);
}

#[test]
fn step_energy_matches_sampled_energy() {
    let mut s = r2_scenario(2.0);
    let dense = run_scenario(&s).unwrap();
    let sampled = velfree_core::sim::control_energy(&dense).unwrap();
    assert!((dense.e_tau - sampled).abs() < 1e-12 * sampled);
    s.record_every = 7;
    let sparse = run_scenario(&s).unwrap();
    assert_eq!(sparse.e_tau, dense.e_tau);
}
