//! Device parameters shared by the plant, the controllers and the optimizer.

use serde::{Deserialize, Serialize};

use crate::comfort::{Mode, ZoneClass};
use crate::error::{Error, Result};

/// Fan-coil and layout data for one zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneParams {
    pub class: ZoneClass,
    /// Heat exchanger coefficient, kW per °C per unit of air flow.
    pub gamma: f64,
    /// Maximum fan air flow.
    pub v_max: f64,
    /// Indices of geometrically adjacent zones.
    #[serde(default)]
    pub neighbors: Vec<usize>,
}

impl ZoneParams {
    /// Heat flow at full fan speed per °C of supply/zone difference.
    pub fn capacity_per_degree(&self) -> f64 {
        self.gamma * self.v_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub zones: Vec<ZoneParams>,
    /// Heating heat pump consumption, kWh per °C of lift per step.
    pub alpha_heat: f64,
    /// Cooling heat pump consumption, kWh per °C of lift per step.
    pub alpha_cool: f64,
    /// Battery charge/discharge efficiency.
    pub eta: f64,
    /// Battery capacity, kWh.
    pub ees_capacity: f64,
    /// Maximum energy fed to the battery per step, kWh.
    pub ees_charge_max: f64,
    /// Maximum energy drawn from the battery per step, kWh.
    pub ees_discharge_max: f64,
    /// PVUSA coefficients for [I, I², I·T^A] giving kWh per step.
    pub pv_theta: [f64; 3],
    /// Heating setpoint ceiling, °C.
    pub t0_max_heat: f64,
    /// Coldest loop temperature the heating pump is rated to lift from, °C.
    pub loop_min_heat: f64,
    /// Cooling setpoint floor, °C.
    pub t0_min_cool: f64,
    /// Warmest loop temperature the cooling pump is rated to lift from, °C.
    pub loop_max_cool: f64,
}

impl DeviceParams {
    pub fn zones(&self) -> usize {
        self.zones.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.zones.is_empty() {
            return Err(Error::param("devices.zones", "at least one zone required"));
        }
        let m = self.zones.len();
        for (i, z) in self.zones.iter().enumerate() {
            positive(&format!("zones[{i}].gamma"), z.gamma)?;
            positive(&format!("zones[{i}].v_max"), z.v_max)?;
            for &j in &z.neighbors {
                if j >= m || j == i {
                    return Err(Error::param(
                        format!("zones[{i}].neighbors"),
                        format!("invalid neighbor index {j}"),
                    ));
                }
                if !self.zones[j].neighbors.contains(&i) {
                    return Err(Error::param(
                        format!("zones[{i}].neighbors"),
                        format!("adjacency with zone {j} is not symmetric"),
                    ));
                }
            }
        }
        positive("devices.alpha_heat", self.alpha_heat)?;
        positive("devices.alpha_cool", self.alpha_cool)?;
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::param("devices.eta", "must lie strictly between 0 and 1"));
        }
        positive("devices.ees_capacity", self.ees_capacity)?;
        positive("devices.ees_charge_max", self.ees_charge_max)?;
        positive("devices.ees_discharge_max", self.ees_discharge_max)?;
        if self.pv_theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::param("devices.pv_theta", "coefficients must be finite"));
        }
        if !(self.t0_max_heat > self.loop_min_heat) {
            return Err(Error::param("devices.t0_max_heat", "must exceed loop_min_heat"));
        }
        if !(self.loop_max_cool > self.t0_min_cool) {
            return Err(Error::param("devices.loop_max_cool", "must exceed t0_min_cool"));
        }
        Ok(())
    }

    pub fn alpha(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Heating => self.alpha_heat,
            Mode::Cooling => self.alpha_cool,
        }
    }

    /// Largest setpoint lift the heat pump can sustain, °C.
    pub fn max_lift(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Heating => self.t0_max_heat - self.loop_min_heat,
            Mode::Cooling => self.loop_max_cool - self.t0_min_cool,
        }
    }

    /// Heat pump energy ceiling per step, kWh.
    pub fn hp_energy_max(&self, mode: Mode) -> f64 {
        self.alpha(mode) * self.max_lift(mode)
    }

    /// Upper bound on grid energy per step: heat pump ceiling plus battery
    /// charging, rounded up to a whole kWh.
    pub fn big_m(&self, mode: Mode) -> f64 {
        (self.hp_energy_max(mode) + self.ees_charge_max).ceil()
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(field, "must be strictly positive"))
    }
}

#[cfg(test)]
pub(crate) fn test_devices(m: usize) -> DeviceParams {
    DeviceParams {
        zones: (0..m)
            .map(|i| ZoneParams {
                class: ZoneClass::Office,
                gamma: 0.12,
                v_max: 1.0,
                neighbors: [i.checked_sub(1), (i + 1 < m).then_some(i + 1)]
                    .into_iter()
                    .flatten()
                    .collect(),
            })
            .collect(),
        alpha_heat: 0.3,
        alpha_cool: 0.3,
        eta: 0.9,
        ees_capacity: 10.0,
        ees_charge_max: 2.0,
        ees_discharge_max: 2.0,
        pv_theta: [1.6e-3, -5e-8, -1e-6],
        t0_max_heat: 55.0,
        loop_min_heat: 10.0,
        t0_min_cool: 5.0,
        loop_max_cool: 30.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let mut d = test_devices(3);
        d.validate().unwrap();
        assert_eq!(d.big_m(Mode::Heating), (0.3f64 * 45.0 + 2.0).ceil());
        d.eta = 1.0;
        assert!(d.validate().is_err());
        let mut d = test_devices(3);
        d.zones[0].neighbors = vec![2];
        assert!(d.validate().is_err());
    }
}
