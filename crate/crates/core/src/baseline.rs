//! Thermostatic benchmark controller.
//!
//! Each zone runs a hysteresis relay on the lead-shifted comfort schedule:
//! in heating the fan switches on below `T̲ + hyst` and off above
//! `T̲ + 3·hyst`; cooling mirrors this around `T̄`. The heat pump holds a
//! fixed supply setpoint. PV covers the heat pump first and any surplus is
//! stored; a shortfall is taken from the battery before the grid.

use serde::{Deserialize, Serialize};

use crate::comfort::{ComfortSchedule, Mode};
use crate::error::{Error, Result};
use crate::params::DeviceParams;
use crate::plant::{Measurements, StepDecision};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThermostatConfig {
    pub hysteresis: f64,
    pub lead_hours: f64,
    pub supply_heat: f64,
    pub supply_cool: f64,
}

impl Default for ThermostatConfig {
    fn default() -> Self {
        Self { hysteresis: 0.5, lead_hours: 2.0, supply_heat: 45.0, supply_cool: 7.0 }
    }
}

impl ThermostatConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.hysteresis > 0.0) {
            return Err(Error::param("thermostat.hysteresis", "must be positive"));
        }
        if !(self.lead_hours >= 0.0) {
            return Err(Error::param("thermostat.lead_hours", "must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Thermostat {
    cfg: ThermostatConfig,
    schedule: ComfortSchedule,
    on: Vec<bool>,
}

impl Thermostat {
    /// `schedule` is the nominal comfort schedule; the lead shift by
    /// `lead_steps` is applied here.
    pub fn new(cfg: ThermostatConfig, schedule: &ComfortSchedule, lead_steps: usize, mode: Mode) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            schedule: schedule.lead_shifted(lead_steps, mode),
            on: vec![false; schedule.zones()],
        })
    }

    pub fn is_on(&self) -> &[bool] {
        &self.on
    }

    /// Update the relays and return the decision for step `k`.
    pub fn step(
        &mut self,
        meas: &Measurements,
        k: usize,
        pv_available: f64,
        devices: &DeviceParams,
        mode: Mode,
    ) -> StepDecision {
        let hyst = self.cfg.hysteresis;
        for (i, on) in self.on.iter_mut().enumerate() {
            let t = meas.zone[i];
            match mode {
                Mode::Heating => {
                    let lo = self.schedule.lower(i, k);
                    if t < lo + hyst {
                        *on = true;
                    } else if t > lo + 3.0 * hyst {
                        *on = false;
                    }
                }
                Mode::Cooling => {
                    let hi = self.schedule.upper(i, k);
                    if t > hi - hyst {
                        *on = true;
                    } else if t < hi - 3.0 * hyst {
                        *on = false;
                    }
                }
            }
        }
        let v = self.on.iter().zip(&devices.zones).map(|(&on, z)| if on { z.v_max } else { 0.0 }).collect();
        let (t0, hp) = match mode {
            Mode::Heating => {
                let t0 = self.cfg.supply_heat.min(devices.t0_max_heat).max(meas.tes);
                (t0, devices.alpha_heat * (t0 - meas.tes))
            }
            Mode::Cooling => {
                let t0 = self.cfg.supply_cool.max(devices.t0_min_cool).min(meas.cool_in);
                (t0, devices.alpha_cool * (meas.cool_in - t0))
            }
        };
        let (charge, discharge, pv) = battery_rule(hp, pv_available, meas.soc, devices);
        StepDecision { v, t0, ees_charge: charge, ees_discharge: discharge, pv }
    }
}

/// PV-first battery rule. Returns `(charge, discharge, pv draw)`.
pub fn battery_rule(hp: f64, pv_available: f64, soc: f64, d: &DeviceParams) -> (f64, f64, f64) {
    if pv_available >= hp {
        let room = ((d.ees_capacity - soc) / d.eta).max(0.0);
        let charge = (pv_available - hp).min(d.ees_charge_max).min(room);
        (charge, 0.0, hp + charge)
    } else {
        let discharge = (hp - pv_available).min(d.ees_discharge_max).min((soc * d.eta).max(0.0));
        (0.0, discharge, pv_available)
    }
}
