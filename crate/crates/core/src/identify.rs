//! Identification campaign on the plant and the resulting model bundle.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::comfort::Mode;
use crate::config::ExperimentConfig;
use crate::devices::pv_available;
use crate::error::{Error, Result};
use crate::plant::{Plant, StepDecision};
use crate::rng::substream;
use crate::scenario::Scenario;
use crate::series::Exogenous;
use crate::synth::{self, WeatherProfile};
use crate::sysid::{
    fit_loop_model, fit_pvusa, fit_zone_model, loop_fit_at_depth, zone_fit_at_depth, LoopArxModel, LoopData,
    RegressorSpec, ZoneArxModel, ZoneData,
};
use crate::time::TimeGrid;

/// Recorded campaign.
#[derive(Debug, Clone, Default)]
pub struct Campaign {
    pub zone: ZoneData,
    pub loop_data: LoopData,
    pub pv: Vec<f64>,
    pub steps_per_day: usize,
}

/// FIT scores of a depth, per zone and summarized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthFit {
    pub steps: usize,
    pub zone_mean: f64,
    pub zone_min: f64,
    pub loop_fit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub estimation_steps: usize,
    pub validation_steps: usize,
    /// Keyed by depth label: `1step`, `1h`, `6h`, `12h`.
    pub depths: BTreeMap<String, DepthFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub mode: Mode,
    pub tau_s: f64,
    pub zone: ZoneArxModel,
    /// Tank model in heating, chilled-water return model in cooling.
    pub loop_model: LoopArxModel,
    pub pv_theta: [f64; 3],
    pub report: Option<FitReport>,
}

impl ModelBundle {
    pub fn zones(&self) -> usize {
        self.zone.zones()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_s > 0.0 && self.tau_s.is_finite()) {
            return Err(Error::param("model.tau_s", "must be positive"));
        }
        self.zone.validate()?;
        self.loop_model.validate()?;
        if self.pv_theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("model.pv_theta"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let b: Self = serde_json::from_str(text)?;
        b.validate()?;
        Ok(b)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}

/// Drive the plant with pseudo-random fan and setpoint excitation.
pub fn run_campaign(cfg: &ExperimentConfig, scenario: &Scenario) -> Result<Campaign> {
    let mode = scenario.mode;
    let m = scenario.zones();
    let plant = Plant::new(scenario.plant.clone(), scenario.devices.clone())?;
    let grid = TimeGrid::new(scenario.grid.tau_s, 0, cfg.identification.days * scenario.grid.steps_per_day())?;
    let seed = cfg.seed ^ 0x1d3_0007;
    let profile = cfg.weather.profile.unwrap_or_else(|| WeatherProfile::for_mode(mode));
    let weather = synth::weather(&grid, &profile, &cfg.weather.price, seed);
    let gains = synth::gains(&grid, &scenario.classes, &cfg.gains, seed);
    let mut rng = substream(cfg.seed, "identification", 0);
    let setpoint_hold = grid.steps_for_hours(cfg.identification.setpoint_hold_hours).max(1);
    let hold = cfg.identification.prbs_hold;

    let d = &scenario.devices;
    let mut state = scenario.initial.clone();
    state.soc = 0.0;
    let mut camp = Campaign { steps_per_day: grid.steps_per_day(), ..Default::default() };
    let mut v = vec![0.0; m];
    let mut t0 = 0.0;
    for k in 0..grid.steps {
        if k % setpoint_hold == 0 {
            t0 = match mode {
                Mode::Heating => rng.random_range(30.0..d.t0_max_heat),
                Mode::Cooling => rng.random_range(d.t0_min_cool..16.0),
            };
        }
        for (i, vi) in v.iter_mut().enumerate() {
            if k % hold == 0 {
                *vi = if rng.random_bool(0.5) { d.zones[i].v_max * rng.random_range(0.2..=1.0) } else { 0.0 };
            }
            // Keep the zone in a plausible range.
            let t = state.zone[i];
            let (cold, hot) = (16.0, 27.0);
            match mode {
                Mode::Heating if t < cold => *vi = d.zones[i].v_max,
                Mode::Heating if t > hot => *vi = 0.0,
                Mode::Cooling if t > hot + 2.0 => *vi = d.zones[i].v_max,
                Mode::Cooling if t < cold + 4.0 => *vi = 0.0,
                _ => {}
            }
        }
        let e = Exogenous { ta: weather[k].ta, irr: weather[k].irr, gains: gains[k].clone() };
        let u = StepDecision { v: v.clone(), t0, ees_charge: 0.0, ees_discharge: 0.0, pv: 0.0 };
        let out = plant.step(&state, &u, &e, mode)?;
        camp.zone.temp.push(state.zone.clone());
        camp.zone.heat.push(out.heat.clone());
        camp.zone.ta.push(e.ta);
        camp.zone.irr.push(e.irr);
        camp.zone.gains.push(e.gains.clone());
        let (loop_t, outlet) = match mode {
            Mode::Heating => (state.tes, state.hp_heat),
            Mode::Cooling => (state.cool_in, state.hp_cool),
        };
        camp.loop_data.loop_t.push(loop_t);
        camp.loop_data.outlet.push(outlet);
        camp.loop_data.total_heat.push(out.heat.iter().sum());
        camp.pv.push(pv_available(e.irr, e.ta, &d.pv_theta));
        state = out.state;
    }
    Ok(camp)
}

/// Fit the bundle on the estimation days and score it on the rest.
pub fn identify(cfg: &ExperimentConfig, scenario: &Scenario) -> Result<ModelBundle> {
    let camp = run_campaign(cfg, scenario)?;
    let spec = RegressorSpec::controller_default(scenario.devices.zones.iter().map(|z| z.neighbors.clone()).collect());
    let split = cfg.identification.estimation_days * camp.steps_per_day;
    let n = camp.zone.len();
    let zone = fit_zone_model(&camp.zone, &spec, 0..split)?;
    let loop_model = fit_loop_model(&camp.loop_data, &spec, 0..split)?;
    let sunny: Vec<usize> = (0..split).filter(|&k| camp.zone.irr[k] > 0.0).collect();
    let pv_theta = if sunny.len() >= 3 {
        fit_pvusa(
            &sunny.iter().map(|&k| camp.zone.irr[k]).collect::<Vec<_>>(),
            &sunny.iter().map(|&k| camp.zone.ta[k]).collect::<Vec<_>>(),
            &sunny.iter().map(|&k| camp.pv[k]).collect::<Vec<_>>(),
        )?
    } else {
        scenario.devices.pv_theta
    };
    let per_hour = (3600.0 / scenario.grid.tau_s).round().max(1.0) as usize;
    let mut depths = BTreeMap::new();
    for (label, steps) in [("1step", 1), ("1h", per_hour), ("6h", 6 * per_hour), ("12h", 12 * per_hour)] {
        let fits = zone_fit_at_depth(&zone, &camp.zone, split..n, steps)?;
        depths.insert(
            label.to_string(),
            DepthFit {
                steps,
                zone_mean: fits.iter().sum::<f64>() / fits.len() as f64,
                zone_min: fits.iter().copied().fold(f64::INFINITY, f64::min),
                loop_fit: loop_fit_at_depth(&loop_model, &camp.loop_data, split..n, steps)?,
            },
        );
    }
    Ok(ModelBundle {
        mode: scenario.mode,
        tau_s: scenario.grid.tau_s,
        zone,
        loop_model,
        pv_theta,
        report: Some(FitReport { estimation_steps: split, validation_steps: n - split, depths }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_campaign_identifies_well() {
        let mut cfg = ExperimentConfig::default();
        cfg.building.zones = 4;
        cfg.building.columns = 2;
        cfg.identification.days = 6;
        cfg.identification.estimation_days = 4;
        let s = Scenario::from_config(&cfg).unwrap();
        let b = identify(&cfg, &s).unwrap();
        let r = b.report.as_ref().unwrap();
        let one = &r.depths["1step"];
        assert!(one.zone_min > 90.0, "{r:?}");
        assert!(r.depths["6h"].zone_mean > 80.0, "{r:?}");
        assert!(r.depths["12h"].zone_min > 50.0, "{r:?}");
        assert!(one.loop_fit > 90.0, "{r:?}");
        let back = ModelBundle::from_json(&b.to_json()).unwrap();
        assert_eq!(back, b);
        assert!(ModelBundle::from_json("{}").is_err());
    }
}
