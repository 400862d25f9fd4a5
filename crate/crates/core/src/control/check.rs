use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::format;

use super::{ControllerKind, Gains};
use crate::dynamics::{JointMat, ModelConstants};
use crate::error::{Error, Result};

/// One inequality `lhs > rhs` evaluated numerically.
#[derive(Debug, Clone, PartialEq)]
pub struct GainCondition {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

impl GainCondition {
    fn greater(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            satisfied: lhs > rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainCheckReport {
    pub controller: ControllerKind,
    pub conditions: Vec<GainCondition>,
    pub notes: Vec<String>,
    /// Conjunction of every condition's flag.
    pub verdict: bool,
}

/// Reference-dependent bounds needed by the tracking conditions.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CheckInputs {
    /// `sup ‖q̇‖` bound: true velocity for R1, desired velocity for T1.
    pub k_q: Option<f64>,
    /// `k_δ` for the global T2 condition.
    pub k_delta: Option<f64>,
    /// `β ∈ (0, 1)` for the semiglobal T2 filter bound.
    pub beta: Option<f64>,
}

fn eig_extrema(m: &JointMat) -> (f64, f64) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    (eig.min(), eig.max())
}

fn need_input(kind: ControllerKind, name: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| {
        Error::invalid(format!("gain check for {} requires constant {name}", kind.id()))
    })
}

/// Evaluates every stability inequality that applies to `kind`.
///
/// Violations are reported, never raised: several of the conditions are
/// sufficient only and the loop may still converge when they fail.
pub fn check_gains(
    kind: ControllerKind,
    gains: &Gains,
    constants: &ModelConstants,
    inputs: &CheckInputs,
) -> Result<GainCheckReport> {
    let lmin_h = constants.lambda_min_h;
    let lmax_h = constants.lambda_max_h;
    if !(lmin_h > 0.0 && lmin_h.is_finite()) {
        return Err(Error::invalid("gain check requires constant lambda_min_h > 0"));
    }
    if !(lmax_h >= lmin_h && lmax_h.is_finite()) {
        return Err(Error::invalid("gain check requires constant lambda_max_h >= lambda_min_h"));
    }
    let mut conditions = Vec::new();
    let mut notes = Vec::new();

    let positive = |conditions: &mut Vec<GainCondition>, name: &str, m: &JointMat| {
        conditions.push(GainCondition::greater(
            format!("lambda_min({name}) > 0"),
            eig_extrema(m).0,
            0.0,
        ));
    };
    let positive_vec = |conditions: &mut Vec<GainCondition>, name: &str, v: &nalgebra::DVector<f64>| {
        conditions.push(GainCondition::greater(format!("min {name} > 0"), v.min(), 0.0));
    };

    let k_p = gains.k_p(kind)?;
    let k_d = gains.k_d(kind)?;
    positive(&mut conditions, "K_P", k_p);
    positive(&mut conditions, "K_D", k_d);
    let (kd_min, kd_max) = eig_extrema(k_d);

    match kind {
        ControllerKind::R1 => {
            let (k_obs, l_obs) = gains.observer(kind)?;
            positive(&mut conditions, "L", l_obs);
            conditions.push(GainCondition::greater(
                "k_D > (lambda_max(K_D))^2 / (4 lambda_min(K_D) lambda_min_H)",
                k_obs,
                kd_max * kd_max / (4.0 * kd_min * lmin_h),
            ));
            if let Some(k_q) = inputs.k_q {
                conditions.push(GainCondition::greater(
                    "k_D > k_c k_q / lambda_min_H (observer)",
                    k_obs,
                    constants.k_c * k_q / lmin_h,
                ));
            } else {
                notes.push("observer convergence bound skipped: no velocity bound k_q given".to_string());
            }
        }
        ControllerKind::R2 => {
            let (b, l) = gains.filter(kind)?;
            positive_vec(&mut conditions, "b_i", b);
            positive_vec(&mut conditions, "l_i", l);
        }
        ControllerKind::R3 => {
            let (b, l) = gains.filter(kind)?;
            positive_vec(&mut conditions, "l_i", l);
            positive(&mut conditions, "K_I", gains.k_i(kind)?);
            conditions.push(GainCondition::greater(
                "min b_i > 2 lambda_max_H / lambda_min_H",
                b.min(),
                2.0 * lmax_h / lmin_h,
            ));
            conditions.push(GainCondition::greater(
                "lambda_min(K_P) > 4 k_g + 1",
                eig_extrema(k_p).0,
                4.0 * constants.k_g + 1.0,
            ));
        }
        ControllerKind::T1 => {
            let (k_obs, l_obs) = gains.observer(kind)?;
            positive(&mut conditions, "L", l_obs);
            let k_q = need_input(kind, "k_q", inputs.k_q)?;
            let k_c = constants.k_c;
            if !(k_c > 0.0) {
                return Err(Error::invalid("gain check for T1 requires constant k_c > 0"));
            }
            let inner = kd_max + k_c * k_q;
            conditions.push(GainCondition::greater(
                "k_D > k_c/lambda_min_H [k_q + (lambda_max(K_D) + k_c k_q)^2 / (4 lambda_min(K_D) k_c)]",
                k_obs,
                k_c / lmin_h * (k_q + inner * inner / (4.0 * kd_min * k_c)),
            ));
        }
        ControllerKind::T2 => {
            let (b, l) = gains.filter(kind)?;
            positive_vec(&mut conditions, "l_i", l);
            let beta = need_input(kind, "beta", inputs.beta)?;
            if !(beta > 0.0 && beta < 1.0) {
                return Err(Error::invalid("gain check for T2 requires constant beta in (0, 1)"));
            }
            let k_delta = need_input(kind, "k_delta", inputs.k_delta)?;
            conditions.push(GainCondition::greater(
                "min b_i > lambda_max_H / (beta lambda_min_H)",
                b.min(),
                lmax_h / (beta * lmin_h),
            ));
            let k_dm = k_d.diagonal().min();
            if (k_d - JointMat::from_diagonal(&k_d.diagonal())).amax() > 0.0 {
                notes.push("K_D is not diagonal; k_dm taken from its diagonal".to_string());
            }
            conditions.push(GainCondition::greater(
                "(k_dm / 2)(b_m / a_M) > k_c k_delta",
                0.5 * k_dm * b.min() / l.max(),
                constants.k_c * k_delta,
            ));
            notes.push("a_M is taken as the largest filter pole l_M".to_string());
        }
        ControllerKind::T3 => {
            let (l_d, l_p) = gains.linear_observer(kind)?;
            positive(&mut conditions, "L_D", l_d);
            positive(&mut conditions, "L_P", l_p);
            notes.push("T3 guarantees only ultimate boundedness; no convergence condition".to_string());
        }
    }
    let verdict = conditions.iter().all(|c| c.satisfied);
    Ok(GainCheckReport {
        controller: kind,
        conditions,
        notes,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::ScalarGains;

    fn constants() -> ModelConstants {
        ModelConstants {
            lambda_min_h: 0.0003,
            lambda_max_h: 0.0052,
            k_c: 0.0095,
            k_g: 0.08,
            sample_count: 1,
            k_c_closed_form: true,
        }
    }

    fn gains(kind: ControllerKind, s: ScalarGains) -> Gains {
        Gains::from_scalars(kind, 3, &s)
    }

    fn row<'a>(r: &'a GainCheckReport, prefix: &str) -> &'a GainCondition {
        r.conditions.iter().find(|c| c.name.starts_with(prefix)).unwrap()
    }

    #[test]
    fn r1_observer_bound_is_conservative() {
        let g = gains(
            ControllerKind::R1,
            ScalarGains {
                alpha_p: Some(5.0),
                alpha_d: Some(5.0),
                alpha_l: Some(3.0),
                k_d_obs: Some(900.0),
                ..Default::default()
            },
        );
        let r = check_gains(ControllerKind::R1, &g, &constants(), &CheckInputs::default()).unwrap();
        let c = row(&r, "k_D > (lambda_max(K_D))^2");
        assert!((c.rhs - 5.0 / (4.0 * 0.0003)).abs() < 1e-9);
        assert!((c.rhs - 4166.7).abs() < 0.1);
        assert!(!c.satisfied);
        assert!(!r.verdict);
    }

    #[test]
    fn r1_bound_is_monotone_in_observer_gain() {
        let mut last = false;
        for k in [1e2, 1e3, 4e3, 5e3, 1e4] {
            let g = gains(
                ControllerKind::R1,
                ScalarGains {
                    alpha_p: Some(5.0),
                    alpha_d: Some(5.0),
                    alpha_l: Some(3.0),
                    k_d_obs: Some(k),
                    ..Default::default()
                },
            );
            let r = check_gains(ControllerKind::R1, &g, &constants(), &CheckInputs::default()).unwrap();
            let now = row(&r, "k_D > (lambda_max(K_D))^2").satisfied;
            assert!(now || !last);
            last = now;
        }
        assert!(last);
    }

    #[test]
    fn r3_filter_and_proportional_bounds() {
        let c = constants();
        let ratio = c.lambda_max_h / c.lambda_min_h;
        let make = |b: f64| {
            gains(
                ControllerKind::R3,
                ScalarGains {
                    alpha_p: Some(4.0 * c.k_g + 1.5),
                    alpha_d: Some(1.0),
                    alpha_i: Some(1.0),
                    alpha_l: Some(10.0),
                    b: Some(b),
                    ..Default::default()
                },
            )
        };
        let ok = check_gains(ControllerKind::R3, &make(2.2 * ratio), &c, &CheckInputs::default()).unwrap();
        assert!(ok.verdict, "{ok:?}");
        let bad = check_gains(ControllerKind::R3, &make(ratio), &c, &CheckInputs::default()).unwrap();
        assert!(!row(&bad, "min b_i > 2").satisfied);
        assert!(row(&bad, "lambda_min(K_P) > 4 k_g").satisfied);
        assert!(!bad.verdict);
    }

    fn t2_gains(k_d: f64, b: f64, l: f64) -> Gains {
        gains(
            ControllerKind::T2,
            ScalarGains {
                alpha_p: Some(30.0),
                alpha_d: Some(k_d),
                alpha_l: Some(l),
                b: Some(b),
                ..Default::default()
            },
        )
    }

    #[test]
    fn t2_rows_and_global_scaling() {
        let inputs = CheckInputs {
            k_delta: Some(2.4510),
            beta: Some(0.5),
            ..Default::default()
        };
        let c = constants();
        let r = check_gains(ControllerKind::T2, &t2_gains(1.0, 100.0, 1000.0), &c, &inputs).unwrap();
        assert!(r.verdict, "{r:?}");
        let semi = row(&r, "min b_i > lambda_max_H");
        assert!((semi.rhs - c.lambda_max_h / (0.5 * c.lambda_min_h)).abs() < 1e-9);
        let global = row(&r, "(k_dm / 2)");
        assert!((global.rhs - c.k_c * 2.4510).abs() < 1e-15);
        assert!((global.lhs - 0.5 * 100.0 / 1000.0).abs() < 1e-15);
        assert!(!r.notes.is_empty());

        let doubled = check_gains(ControllerKind::T2, &t2_gains(2.0, 100.0, 1000.0), &c, &inputs).unwrap();
        assert!((row(&doubled, "(k_dm / 2)").lhs - 2.0 * global.lhs).abs() < 1e-15);
    }

    #[test]
    fn missing_inputs_are_named() {
        let err = check_gains(
            ControllerKind::T2,
            &t2_gains(1.0, 100.0, 1000.0),
            &constants(),
            &CheckInputs::default(),
        )
        .unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("beta") || msg.contains("k_delta"), "{msg}");

        let mut c = constants();
        c.lambda_min_h = 0.0;
        let err = check_gains(ControllerKind::T2, &t2_gains(1.0, 1.0, 1.0), &c, &CheckInputs::default())
            .unwrap_err();
        assert!(format!("{err}").contains("lambda_min_h"));
    }

    #[test]
    fn unit_gains_and_constants_are_finite_for_every_law() {
        let c = ModelConstants {
            lambda_min_h: 1.0,
            lambda_max_h: 1.0,
            k_c: 1.0,
            k_g: 1.0,
            sample_count: 1,
            k_c_closed_form: false,
        };
        let s = ScalarGains {
            alpha_p: Some(1.0),
            alpha_d: Some(1.0),
            alpha_i: Some(1.0),
            alpha_l: Some(1.0),
            b: Some(1.0),
            k_d_obs: Some(1.0),
            alpha_lp: Some(1.0),
            alpha_ld: Some(1.0),
        };
        let inputs = CheckInputs {
            k_q: Some(1.0),
            k_delta: Some(1.0),
            beta: Some(0.5),
        };
        for kind in ControllerKind::ALL {
            let r = check_gains(kind, &Gains::from_scalars(kind, 3, &s), &c, &inputs).unwrap();
            assert!(!r.conditions.is_empty());
            for cond in &r.conditions {
                assert!(cond.lhs.is_finite() && cond.rhs.is_finite(), "{kind:?} {cond:?}");
            }
            assert_eq!(r.verdict, r.conditions.iter().all(|c| c.satisfied));
        }
    }
}
