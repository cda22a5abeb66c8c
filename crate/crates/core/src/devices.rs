//! Static device relations: fan-coil heat flow, heat pump consumption,
//! battery state update and PV availability.

use crate::comfort::Mode;
use crate::error::{Error, Result};

/// Heat delivered to a zone by its fan-coil, kW. Negative when cooling.
pub fn fan_heat_flow(gamma: f64, t_supply: f64, t_zone: f64, v: f64) -> f64 {
    gamma * (t_supply - t_zone) * v
}

/// Electrical energy of the heat pump for one step, kWh.
///
/// Heating lifts from the tank temperature `t_in` up to `t0`; cooling pulls
/// the loop return `t_in` down to `t0`.
pub fn hp_energy(mode: Mode, t0: f64, t_in: f64, alpha: f64) -> Result<f64> {
    let lift = match mode {
        Mode::Heating => t0 - t_in,
        Mode::Cooling => t_in - t0,
    };
    if lift < 0.0 {
        return Err(Error::SignConvention(format!(
            "{mode} setpoint {t0} °C on the wrong side of inlet {t_in} °C"
        )));
    }
    Ok(alpha * lift)
}

/// Battery charge after one step, kWh.
pub fn ees_step(soc: f64, charge: f64, discharge: f64, eta: f64) -> f64 {
    soc + eta * charge - discharge / eta
}

/// Same as [`ees_step`], rejecting results outside `[0, capacity]` by more
/// than `tol`; results within tolerance are clamped.
pub fn ees_step_checked(
    soc: f64,
    charge: f64,
    discharge: f64,
    eta: f64,
    capacity: f64,
    tol: f64,
) -> Result<f64> {
    let next = ees_step(soc, charge, discharge, eta);
    if !next.is_finite() || next < -tol || next > capacity + tol {
        return Err(Error::CapacityViolation { soc: next, capacity });
    }
    Ok(next.clamp(0.0, capacity))
}

/// Unclamped PVUSA regression value, kWh per step.
pub fn pv_raw(irr: f64, ta: f64, theta: &[f64; 3]) -> f64 {
    theta[0] * irr + theta[1] * irr * irr + theta[2] * irr * ta
}

/// PV energy available in one step, kWh.
pub fn pv_available(irr: f64, ta: f64, theta: &[f64; 3]) -> f64 {
    pv_raw(irr, ta, theta).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn fan_heat_examples() {
        assert_relative_eq!(fan_heat_flow(2.0, 40.0, 20.0, 0.5), 20.0);
        assert_eq!(fan_heat_flow(2.0, 21.3, 21.3, 0.7), 0.0);
        assert_relative_eq!(fan_heat_flow(1.5, 10.0, 25.0, 1.0), -22.5);
    }

    #[test]
    fn hp_examples() {
        assert_relative_eq!(hp_energy(Mode::Heating, 45.0, 40.0, 0.8).unwrap(), 4.0);
        assert_eq!(hp_energy(Mode::Heating, 38.0, 38.0, 0.8).unwrap(), 0.0);
        assert_relative_eq!(hp_energy(Mode::Cooling, 7.0, 12.0, 0.8).unwrap(), 4.0);
        assert!(matches!(
            hp_energy(Mode::Heating, 30.0, 40.0, 0.8),
            Err(Error::SignConvention(_))
        ));
        assert!(hp_energy(Mode::Cooling, 14.0, 12.0, 0.8).is_err());
    }

    #[test]
    fn ees_examples() {
        assert_relative_eq!(ees_step(10.0, 2.0, 0.0, 0.9), 11.8);
        assert_relative_eq!(ees_step(10.0, 0.0, 0.9, 0.9), 9.0);
        assert_eq!(ees_step(4.2, 0.0, 0.0, 0.9), 4.2);
        assert!(ees_step_checked(9.5, 2.0, 0.0, 0.9, 10.0, 1e-6).is_err());
        assert!(ees_step_checked(0.5, 0.0, 1.0, 0.9, 10.0, 1e-6).is_err());
        assert_eq!(ees_step_checked(10.0 + 1e-9, 0.0, 0.0, 0.9, 10.0, 1e-6).unwrap(), 10.0);
    }

    #[test]
    fn pv_examples() {
        let theta = [1.6e-3, -5e-8, -1e-6];
        assert_eq!(pv_available(0.0, 17.0, &theta), 0.0);
        assert_relative_eq!(pv_available(1000.0, 25.0, &theta), 1.525, max_relative = 1e-12);
        assert_eq!(pv_available(100.0, 0.0, &[-1.0, 0.0, 0.0]), 0.0);
    }

    proptest! {
        #[test]
        fn fan_heat_is_bilinear(g in 0.01f64..5.0, ts in -10.0f64..60.0, tz in 0.0f64..40.0,
                                v1 in 0.0f64..2.0, v2 in 0.0f64..2.0, c in 0.0f64..3.0) {
            let lhs = fan_heat_flow(g, ts, tz, v1 + c * v2);
            let rhs = fan_heat_flow(g, ts, tz, v1) + c * fan_heat_flow(g, ts, tz, v2);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
            prop_assert_eq!(fan_heat_flow(g, ts, tz, 0.0), 0.0);
        }
    }
}
