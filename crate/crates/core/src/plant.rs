//! Ground-truth building used for closed-loop evaluation.
//!
//! Each zone is an air node coupled to a wall node (two-node RC network);
//! air nodes of adjacent zones exchange heat through a common conductance.
//! Inputs are held over the step and the network is integrated exactly.
//! The heating tank and the chilled-water loop are well-mixed volumes fed
//! by the heat pump outlet, which follows its setpoint with one step delay.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::comfort::Mode;
use crate::devices::{ees_step, fan_heat_flow, pv_available};
use crate::error::{Error, Result};
use crate::params::DeviceParams;
use crate::series::Exogenous;

/// Thermal parameters of one zone. Capacities in kJ/K, conductances in kW/K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneThermal {
    pub c_air: f64,
    pub c_wall: f64,
    /// Air to wall.
    pub u_aw: f64,
    /// Wall to outdoor.
    pub u_wo: f64,
    /// Air to outdoor (infiltration, glazing).
    pub u_ao: f64,
    /// Effective solar aperture, m².
    pub aperture: f64,
    /// Share of solar gain landing on the air node.
    pub solar_to_air: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    pub tau_s: f64,
    pub zones: Vec<ZoneThermal>,
    /// Air-to-air conductance between adjacent zones, kW/K.
    pub u_neighbor: f64,
    /// Heating tank capacity, kJ/K.
    pub tes_capacity: f64,
    /// Heat pump to tank exchange, kW/K.
    pub tes_exchange: f64,
    /// Chilled-water loop capacity, kJ/K.
    pub cool_capacity: f64,
    /// Heat pump to chilled loop exchange, kW/K.
    pub cool_exchange: f64,
    /// Standard deviation of temperature sensor noise, °C.
    #[serde(default)]
    pub sensor_sigma: f64,
}

impl PlantParams {
    pub fn validate(&self, zones: usize) -> Result<()> {
        if self.zones.len() != zones {
            return Err(Error::LengthMismatch { expected: zones, found: self.zones.len() });
        }
        if !(self.tau_s > 0.0) {
            return Err(Error::param("plant.tau_s", "must be positive"));
        }
        for (i, z) in self.zones.iter().enumerate() {
            for (name, v) in [
                ("c_air", z.c_air),
                ("c_wall", z.c_wall),
                ("u_aw", z.u_aw),
                ("u_wo", z.u_wo),
                ("u_ao", z.u_ao),
            ] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::param(format!("plant.zones[{i}].{name}"), "must be positive"));
                }
            }
            if !(z.aperture >= 0.0) || !(0.0..=1.0).contains(&z.solar_to_air) {
                return Err(Error::param(format!("plant.zones[{i}]"), "invalid solar parameters"));
            }
        }
        if !(self.u_neighbor >= 0.0) {
            return Err(Error::param("plant.u_neighbor", "must be nonnegative"));
        }
        for (name, cap, ex) in [
            ("tes", self.tes_capacity, self.tes_exchange),
            ("cool", self.cool_capacity, self.cool_exchange),
        ] {
            if !(cap > 0.0 && ex > 0.0) {
                return Err(Error::param(format!("plant.{name}"), "capacity and exchange must be positive"));
            }
            if self.tau_s * ex / cap >= 1.0 {
                return Err(Error::param(
                    format!("plant.{name}_exchange"),
                    "loop time constant shorter than one step",
                ));
            }
        }
        if !(self.sensor_sigma >= 0.0) {
            return Err(Error::param("plant.sensor_sigma", "must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    pub zone: Vec<f64>,
    pub wall: Vec<f64>,
    pub tes: f64,
    pub hp_heat: f64,
    pub hp_cool: f64,
    pub cool_in: f64,
    pub soc: f64,
}

impl PlantState {
    /// Every node at `t`, loops at their supply temperatures, battery at `soc`.
    pub fn uniform(zones: usize, t: f64, tes: f64, cool: f64, soc: f64) -> Self {
        Self {
            zone: vec![t; zones],
            wall: vec![t; zones],
            tes,
            hp_heat: tes,
            hp_cool: cool,
            cool_in: cool,
            soc,
        }
    }

    fn check_finite(&self) -> Result<()> {
        let scalars = [self.tes, self.hp_heat, self.hp_cool, self.cool_in, self.soc];
        if self.zone.iter().chain(&self.wall).chain(&scalars).all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite("plant state"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDecision {
    /// Fan air flow per zone.
    pub v: Vec<f64>,
    /// Heat pump outlet setpoint, °C.
    pub t0: f64,
    /// Energy into the battery, kWh.
    pub ees_charge: f64,
    /// Energy out of the battery, kWh.
    pub ees_discharge: f64,
    /// PV energy drawn, kWh.
    pub pv: f64,
}

impl StepDecision {
    pub fn idle(zones: usize, t0: f64) -> Self {
        Self { v: vec![0.0; zones], t0, ees_charge: 0.0, ees_discharge: 0.0, pv: 0.0 }
    }
}

/// Realized energy flows of one step, kWh.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub hp: f64,
    pub ees_charge: f64,
    pub ees_discharge: f64,
    /// Net battery exchange, charge minus discharge.
    pub ees: f64,
    pub pv: f64,
    /// Energy bought from the grid.
    pub grid: f64,
}

impl EnergyLedger {
    fn new(hp: f64, ees_charge: f64, ees_discharge: f64, pv: f64) -> Self {
        let ees = ees_charge - ees_discharge;
        Self { hp, ees_charge, ees_discharge, ees, pv, grid: hp + ees - pv }
    }
}

/// Sensor readings available to a controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurements {
    pub zone: Vec<f64>,
    pub tes: f64,
    pub hp_heat: f64,
    pub hp_cool: f64,
    pub cool_in: f64,
    pub soc: f64,
}

impl Measurements {
    /// Supply water temperature seen by the fan-coils.
    pub fn supply(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Heating => self.tes,
            Mode::Cooling => self.hp_cool,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: PlantState,
    pub ledger: EnergyLedger,
    /// Fan-coil heat flow per zone over the step, kW.
    pub heat: Vec<f64>,
    /// PV energy that could have been drawn, kWh.
    pub pv_available: f64,
}

/// Tolerance on battery bounds and actuation limits in decisions.
pub const DECISION_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Plant {
    params: PlantParams,
    devices: DeviceParams,
    ad: DMatrix<f64>,
    gamma_int: DMatrix<f64>,
}

impl Plant {
    pub fn new(params: PlantParams, devices: DeviceParams) -> Result<Self> {
        devices.validate()?;
        params.validate(devices.zones())?;
        let (ad, gamma_int) = discretize(&continuous_matrix(&params, &devices), params.tau_s);
        Ok(Self { params, devices, ad, gamma_int })
    }

    pub fn params(&self) -> &PlantParams {
        &self.params
    }

    pub fn devices(&self) -> &DeviceParams {
        &self.devices
    }

    pub fn zones(&self) -> usize {
        self.devices.zones()
    }

    /// Exact readings of the state.
    pub fn measure_exact(&self, s: &PlantState) -> Measurements {
        Measurements {
            zone: s.zone.clone(),
            tes: s.tes,
            hp_heat: s.hp_heat,
            hp_cool: s.hp_cool,
            cool_in: s.cool_in,
            soc: s.soc,
        }
    }

    /// Readings with the configured sensor noise on every temperature.
    pub fn measure<R: Rng + ?Sized>(&self, s: &PlantState, rng: &mut R) -> Measurements {
        let mut m = self.measure_exact(s);
        if self.params.sensor_sigma > 0.0 {
            let n = Normal::new(0.0, self.params.sensor_sigma).expect("validated sigma");
            for t in m.zone.iter_mut() {
                *t += n.sample(rng);
            }
            for t in [&mut m.tes, &mut m.hp_heat, &mut m.hp_cool, &mut m.cool_in] {
                *t += n.sample(rng);
            }
        }
        m
    }

    /// Advance one step.
    pub fn step(&self, s: &PlantState, u: &StepDecision, e: &Exogenous, mode: Mode) -> Result<StepOutcome> {
        let m = self.zones();
        s.check_finite()?;
        e.validate()?;
        if u.v.len() != m || e.gains.len() != m {
            return Err(Error::LengthMismatch { expected: m, found: u.v.len().min(e.gains.len()) });
        }
        let d = &self.devices;
        let scalars = [u.t0, u.ees_charge, u.ees_discharge, u.pv];
        if u.v.iter().chain(&scalars).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("step decision"));
        }
        let mut v = u.v.clone();
        for (i, vi) in v.iter_mut().enumerate() {
            let vmax = d.zones[i].v_max;
            if *vi < -DECISION_TOL || *vi > vmax + DECISION_TOL {
                return Err(Error::param(format!("decision.v[{i}]"), format!("{vi} outside [0, {vmax}]")));
            }
            *vi = vi.clamp(0.0, vmax);
        }
        let bound = |name: &str, x: f64, hi: f64| -> Result<f64> {
            if x < -DECISION_TOL || x > hi + DECISION_TOL {
                return Err(Error::param(format!("decision.{name}"), format!("{x} outside [0, {hi}]")));
            }
            Ok(x.clamp(0.0, hi))
        };
        let charge = bound("ees_charge", u.ees_charge, d.ees_charge_max)?;
        let mut discharge = bound("ees_discharge", u.ees_discharge, d.ees_discharge_max)?;
        let pv_avail = pv_available(e.irr, e.ta, &d.pv_theta);
        if u.pv < -DECISION_TOL {
            return Err(Error::param("decision.pv", "must be nonnegative"));
        }
        let mut pv = u.pv.clamp(0.0, pv_avail);

        let supply = match mode {
            Mode::Heating => s.tes,
            Mode::Cooling => s.hp_cool,
        };
        let heat: Vec<f64> = (0..m)
            .map(|i| fan_heat_flow(d.zones[i].gamma, supply, s.zone[i], v[i]))
            .collect();
        let total_heat: f64 = heat.iter().sum();

        let (zone, wall) = self.thermal_update(s, e, &heat);
        let p = &self.params;
        let mut next = PlantState { zone, wall, ..s.clone() };
        let hp = match mode {
            Mode::Heating => {
                let t0 = u.t0.min(d.t0_max_heat).max(s.tes);
                next.hp_heat = t0;
                next.tes = s.tes + p.tau_s / p.tes_capacity * (p.tes_exchange * (s.hp_heat - s.tes) - total_heat);
                d.alpha_heat * (t0 - s.tes)
            }
            Mode::Cooling => {
                let t0 = u.t0.max(d.t0_min_cool).min(s.cool_in);
                next.hp_cool = t0;
                next.cool_in =
                    s.cool_in + p.tau_s / p.cool_capacity * (p.cool_exchange * (s.hp_cool - s.cool_in) - total_heat);
                d.alpha_cool * (s.cool_in - t0)
            }
        };

        // No export: curtail PV first, then battery discharge.
        if hp + charge - discharge < 0.0 {
            discharge = hp + charge;
        }
        pv = pv.min((hp + (charge - discharge)).max(0.0));
        let soc = ees_step(s.soc, charge, discharge, d.eta);
        if soc < -DECISION_TOL {
            return Err(Error::CapacityViolation { soc, capacity: d.ees_capacity });
        }
        if soc > d.ees_capacity + DECISION_TOL {
            // The curtailment above only ever lowers the charge.
            return Err(Error::CapacityViolation { soc, capacity: d.ees_capacity });
        }
        next.soc = soc.clamp(0.0, d.ees_capacity);
        let ledger = EnergyLedger::new(hp, charge, discharge, pv);
        next.check_finite()?;
        Ok(StepOutcome { state: next, ledger, heat, pv_available: pv_avail })
    }

    fn thermal_update(&self, s: &PlantState, e: &Exogenous, heat: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = self.zones();
        let mut x = DVector::zeros(2 * m);
        let mut b = DVector::zeros(2 * m);
        for (i, z) in self.params.zones.iter().enumerate() {
            x[i] = s.zone[i];
            x[m + i] = s.wall[i];
            let solar = z.aperture * e.irr / 1000.0;
            b[i] = (z.u_ao * e.ta + z.solar_to_air * solar + e.gains[i] + heat[i]) / z.c_air;
            b[m + i] = (z.u_wo * e.ta + (1.0 - z.solar_to_air) * solar) / z.c_wall;
        }
        let y = &self.ad * x + &self.gamma_int * b;
        (y.rows(0, m).iter().copied().collect(), y.rows(m, m).iter().copied().collect())
    }
}

/// Continuous-time state matrix (1/s) over `[air nodes, wall nodes]`.
fn continuous_matrix(p: &PlantParams, d: &DeviceParams) -> DMatrix<f64> {
    let m = d.zones();
    let mut a = DMatrix::zeros(2 * m, 2 * m);
    for (i, z) in p.zones.iter().enumerate() {
        let (ai, wi) = (i, m + i);
        a[(ai, ai)] -= (z.u_aw + z.u_ao) / z.c_air;
        a[(ai, wi)] += z.u_aw / z.c_air;
        for &j in &d.zones[i].neighbors {
            a[(ai, ai)] -= p.u_neighbor / z.c_air;
            a[(ai, j)] += p.u_neighbor / z.c_air;
        }
        a[(wi, wi)] -= (z.u_aw + z.u_wo) / z.c_wall;
        a[(wi, ai)] += z.u_aw / z.c_wall;
    }
    a
}

/// Zero-order-hold discretization: returns `(e^{Aτ}, ∫₀^τ e^{As} ds)`.
fn discretize(a: &DMatrix<f64>, tau: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut aug = DMatrix::zeros(2 * n, 2 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(&(a * tau));
    aug.view_mut((0, n), (n, n)).copy_from(&(DMatrix::<f64>::identity(n, n) * tau));
    let ex = aug.exp();
    (ex.view((0, 0), (n, n)).into_owned(), ex.view((0, n), (n, n)).into_owned())
}

#[cfg(test)]
pub(crate) fn test_plant_params(m: usize) -> PlantParams {
    PlantParams {
        tau_s: 600.0,
        zones: (0..m)
            .map(|i| ZoneThermal {
                c_air: 600.0 + 10.0 * i as f64,
                c_wall: 8000.0,
                u_aw: 0.6,
                u_wo: 0.035,
                u_ao: 0.025,
                aperture: 1.5,
                solar_to_air: 0.4,
            })
            .collect(),
        u_neighbor: 0.05,
        tes_capacity: 500.0 * m as f64,
        tes_exchange: 0.35 * m as f64,
        cool_capacity: 300.0 * m as f64,
        cool_exchange: 0.35 * m as f64,
        sensor_sigma: 0.0,
    }
}
