#![allow(dead_code)]

use hvac_mpc::problem::History;
use hvac_mpc_core::config::MpcSettings;
use hvac_mpc_core::forecast::ForecastBundle;
use hvac_mpc_core::identify::ModelBundle;
use hvac_mpc_core::sysid::{LoopArxModel, RegressorSpec, ZoneArxModel};
use hvac_mpc_core::{ComfortSchedule, DeviceParams, Measurements, Mode, ZoneClass, ZoneParams};

/// Static zone rows: `T' = a T + c Σ T_nbr + b h + q TA + 0.05 gain`.
pub struct Toy {
    pub zones: usize,
    pub a: f64,
    pub coupling: f64,
    pub b: f64,
    /// `L' = loop L + outlet O + total Σh`.
    pub loop_coef: [f64; 3],
    pub gamma: f64,
    pub v_max: f64,
}

impl Toy {
    pub fn new(zones: usize) -> Self {
        Self { zones, a: 0.9, coupling: 0.02, b: 0.1, loop_coef: [0.8, 0.2, -0.01], gamma: 0.5, v_max: 1.0 }
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let m = self.zones;
        (0..m).map(|i| [i.checked_sub(1), (i + 1 < m).then_some(i + 1)].into_iter().flatten().collect()).collect()
    }

    pub fn models(&self, mode: Mode) -> ModelBundle {
        let spec = RegressorSpec { k_t: 0, k_h: 0, k_e: 0, k_loop: 0, k_outlet: 0, k_heat: 0, neighbors: self.neighbors() };
        let theta = spec
            .neighbors
            .iter()
            .map(|ns| {
                let q = 1.0 - self.a - self.coupling * ns.len() as f64;
                let mut row = vec![self.a];
                row.extend(ns.iter().map(|_| self.coupling));
                row.push(self.b);
                // TA, I, I², I·TA, gain
                row.extend([q, 0.0, 0.0, 0.0, 0.05]);
                row
            })
            .collect();
        let loop_model = LoopArxModel { terms: spec.loop_terms(), theta: self.loop_coef.to_vec() };
        ModelBundle {
            mode,
            tau_s: 600.0,
            zone: ZoneArxModel { spec, theta },
            loop_model,
            pv_theta: [1.6e-3, 0.0, 0.0],
            report: None,
        }
    }

    pub fn devices(&self) -> DeviceParams {
        DeviceParams {
            zones: self
                .neighbors()
                .into_iter()
                .map(|neighbors| ZoneParams { class: ZoneClass::Office, gamma: self.gamma, v_max: self.v_max, neighbors })
                .collect(),
            alpha_heat: 0.3,
            alpha_cool: 0.3,
            eta: 0.9,
            ees_capacity: 10.0,
            ees_charge_max: 2.0,
            ees_discharge_max: 2.0,
            pv_theta: [1.6e-3, 0.0, 0.0],
            t0_max_heat: 55.0,
            loop_min_heat: 10.0,
            t0_min_cool: 5.0,
            loop_max_cool: 30.0,
        }
    }
}

pub fn meas(zone: Vec<f64>, loop_t: f64, outlet: f64, soc: f64) -> Measurements {
    Measurements { zone, tes: loop_t, hp_heat: outlet, hp_cool: outlet, cool_in: loop_t, soc }
}

pub fn forecast(zones: usize, len: usize, ta: f64, irr: f64) -> ForecastBundle {
    ForecastBundle { ta: vec![ta; len], irr: vec![irr; len], gains: vec![vec![0.0; zones]; len] }
}

pub fn bounds(zones: usize, len: usize, lo: f64, hi: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    (vec![vec![lo; zones]; len], vec![vec![hi; zones]; len])
}

pub fn schedule(zones: usize, len: usize, lo: f64, hi: f64) -> ComfortSchedule {
    ComfortSchedule::new(vec![vec![lo; len]; zones], vec![vec![hi; len]; zones]).unwrap()
}

pub fn settings(horizon: usize) -> MpcSettings {
    MpcSettings { horizon, comfort_margin: 0.0, ..MpcSettings::default() }
}

pub fn empty_history() -> History {
    History::default()
}
