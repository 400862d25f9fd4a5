use alloc::vec::Vec;

use crate::dynamics::all_finite;
use crate::error::{Error, Result};

/// One classical fourth-order Runge–Kutta step of `ẋ = f(t, x)`.
///
/// Any non-finite stage derivative aborts the step with a numerical failure.
pub fn rk4_step<F>(mut f: F, x: &[f64], t: f64, dt: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let mut stage = |tau: f64, y: &[f64]| -> Result<Vec<f64>> {
        let k = f(tau, y)?;
        if k.len() != n {
            return Err(Error::DimensionMismatch {
                what: "state derivative",
                expected: n,
                found: k.len(),
            });
        }
        if !all_finite(&k) {
            return Err(Error::numerical("non-finite derivative in RK4 stage"));
        }
        Ok(k)
    };
    let offset = |k: &[f64], h: f64| -> Vec<f64> { x.iter().zip(k).map(|(xi, ki)| xi + h * ki).collect() };

    let k1 = stage(t, x)?;
    let k2 = stage(t + 0.5 * dt, &offset(&k1, 0.5 * dt))?;
    let k3 = stage(t + 0.5 * dt, &offset(&k2, 0.5 * dt))?;
    let k4 = stage(t + dt, &offset(&k3, dt))?;
    let next: Vec<f64> = (0..n)
        .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if all_finite(&next) {
        Ok(next)
    } else {
        Err(Error::numerical("non-finite state after RK4 step"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_leaves_state_unchanged() {
        let x = [1.0, -2.0, 3.5];
        let next = rk4_step(|_, y: &[f64]| Ok(alloc::vec![0.0; y.len()]), &x, 0.0, 0.1).unwrap();
        assert_eq!(next, x);
    }

    #[test]
    fn nan_stage_is_a_numerical_failure() {
        let err = rk4_step(|_, _: &[f64]| Ok(alloc::vec![f64::NAN]), &[0.0], 0.0, 0.1).unwrap_err();
        assert!(matches!(err, Error::NumericalFailure(_)));
    }

    #[test]
    fn wrong_derivative_length_is_rejected() {
        let err = rk4_step(|_, _: &[f64]| Ok(alloc::vec![0.0, 0.0]), &[0.0], 0.0, 0.1).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }
}
