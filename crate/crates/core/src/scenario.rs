//! Materialized experiment: building, devices, schedules and input series
//! built from an [`ExperimentConfig`].

use rand::Rng;

use crate::comfort::{ComfortSchedule, Mode, ZoneClass};
use crate::config::ExperimentConfig;
use crate::dr::DrProgram;
use crate::error::{Error, Result};
use crate::params::{DeviceParams, ZoneParams};
use crate::plant::{PlantParams, PlantState, ZoneThermal};
use crate::rng::substream;
use crate::series::{read_weather_csv, Exogenous, PriceSeries, WeatherRecord};
use crate::synth::{self, WeatherProfile};
use crate::time::TimeGrid;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: TimeGrid,
    pub mode: Mode,
    pub classes: Vec<ZoneClass>,
    pub devices: DeviceParams,
    pub plant: PlantParams,
    /// Nominal comfort bounds covering the run plus one horizon.
    pub schedule: ComfortSchedule,
    /// Weather and price covering the run plus one horizon.
    pub weather: Vec<WeatherRecord>,
    /// Internal gains per step and zone, same length as `weather`.
    pub gains: Vec<Vec<f64>>,
    pub price: PriceSeries,
    pub program: DrProgram,
    pub initial: PlantState,
}

/// 4-connected adjacency of zones laid out row by row.
pub fn grid_neighbors(zones: usize, columns: usize) -> Vec<Vec<usize>> {
    (0..zones)
        .map(|i| {
            let (r, c) = (i / columns, i % columns);
            let mut n = Vec::new();
            if c > 0 {
                n.push(i - 1);
            }
            if c + 1 < columns && i + 1 < zones {
                n.push(i + 1);
            }
            if r > 0 {
                n.push(i - columns);
            }
            if i + columns < zones {
                n.push(i + columns);
            }
            n.sort_unstable();
            n
        })
        .collect()
}

/// PVUSA coefficients giving `peak_kw` at 1000 W/m² and 25 °C with mild
/// quadratic and temperature derating.
pub fn pv_theta_for_peak(peak_kw: f64, tau_s: f64) -> [f64; 3] {
    let energy = peak_kw * tau_s / 3600.0;
    let s = energy / (10.0 * 600.0 / 3600.0);
    let (t2, t3) = (-1e-7 * s, -2e-6 * s);
    [(energy - t2 * 1e6 - t3 * 25_000.0) / 1000.0, t2, t3]
}

impl Scenario {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = TimeGrid::new(cfg.grid.tau_s, 0, cfg.grid.steps)?;
        let m = cfg.building.zones;
        let classes: Vec<ZoneClass> = (0..m).map(|i| cfg.building.classes[i % cfg.building.classes.len()]).collect();
        let neighbors = grid_neighbors(m, cfg.building.columns);
        let d = &cfg.devices;
        let p = &cfg.plant;
        let tau_h = grid.tau_s / 3600.0;
        let exchange_heat = p.tes_exchange_per_zone * m as f64;
        let exchange_cool = p.cool_exchange_per_zone * m as f64;
        let rate = d.ees_rate_kw(m) * tau_h;
        let devices = DeviceParams {
            zones: (0..m)
                .map(|i| ZoneParams { class: classes[i], gamma: d.gamma, v_max: d.v_max, neighbors: neighbors[i].clone() })
                .collect(),
            alpha_heat: exchange_heat * tau_h / d.cop_heat,
            alpha_cool: exchange_cool * tau_h / d.cop_cool,
            eta: d.eta,
            ees_capacity: d.ees_capacity(m),
            ees_charge_max: rate,
            ees_discharge_max: rate,
            pv_theta: pv_theta_for_peak(d.pv_peak_kw(m), grid.tau_s),
            t0_max_heat: d.t0_max_heat,
            loop_min_heat: d.loop_min_heat,
            t0_min_cool: d.t0_min_cool,
            loop_max_cool: d.loop_max_cool,
        };
        devices.validate().map_err(|e| Error::config("devices", e.to_string()))?;

        let mut rng = substream(cfg.seed, "building", 0);
        let var = cfg.building.variation;
        let mut jitter = |x: f64| x * (1.0 + if var > 0.0 { rng.random_range(-var..=var) } else { 0.0 });
        let zones: Vec<ZoneThermal> = classes
            .iter()
            .map(|c| {
                let base = match c {
                    ZoneClass::Residential => &p.residential,
                    _ => &p.office,
                };
                ZoneThermal {
                    c_air: jitter(base.c_air),
                    c_wall: jitter(base.c_wall),
                    u_aw: jitter(base.u_aw),
                    u_wo: jitter(base.u_wo),
                    u_ao: jitter(base.u_ao),
                    aperture: jitter(base.aperture),
                    solar_to_air: base.solar_to_air,
                }
            })
            .collect();
        let plant = PlantParams {
            tau_s: grid.tau_s,
            zones,
            u_neighbor: p.u_neighbor,
            tes_capacity: p.tes_capacity_per_zone * m as f64,
            tes_exchange: exchange_heat,
            cool_capacity: p.cool_capacity_per_zone * m as f64,
            cool_exchange: exchange_cool,
            sensor_sigma: p.sensor_sigma,
        };
        plant.validate(m).map_err(|e| Error::config("plant", e.to_string()))?;

        let total = grid.steps + cfg.mpc.horizon + 1;
        let long = TimeGrid { steps: total, ..grid };
        let weather = match &cfg.weather.csv {
            Some(path) => {
                let path = cfg.resolve(path);
                let file = std::fs::File::open(&path)
                    .map_err(|e| Error::config("weather.csv", format!("{}: {e}", path.display())))?;
                let recs = read_weather_csv(file).map_err(|e| Error::config("weather.csv", e.to_string()))?;
                extend_periodic(recs, grid.steps, total, grid.steps_per_day())?
            }
            None => {
                let profile = cfg.weather.profile.unwrap_or_else(|| WeatherProfile::for_mode(cfg.mode));
                synth::weather(&long, &profile, &cfg.weather.price, cfg.seed)
            }
        };
        let gains = synth::gains(&long, &classes, &cfg.gains, cfg.seed);
        let price = PriceSeries::new(weather.iter().map(|r| r.price).collect())?;
        let schedule = ComfortSchedule::from_classes(&grid, &classes, cfg.mode, total + grid.steps_for_hours(24.0));
        let program = cfg.dr_program()?;
        let t_init = cfg.initial.zone.unwrap_or(match cfg.mode {
            Mode::Heating => 21.0,
            Mode::Cooling => 24.0,
        });
        let mut initial = PlantState::uniform(
            m,
            t_init,
            cfg.initial.tes,
            cfg.initial.cool,
            cfg.initial.soc_fraction * devices.ees_capacity,
        );
        initial.cool_in = cfg.initial.cool + 4.0;
        Ok(Self { grid, mode: cfg.mode, classes, devices, plant, schedule, weather, gains, price, program, initial })
    }

    pub fn zones(&self) -> usize {
        self.devices.zones()
    }

    pub fn exogenous(&self, k: usize) -> Exogenous {
        let k = k.min(self.weather.len() - 1);
        Exogenous { ta: self.weather[k].ta, irr: self.weather[k].irr, gains: self.gains[k].clone() }
    }

    /// True inputs for steps `k .. k + len`.
    pub fn window(&self, k: usize, len: usize) -> Vec<Exogenous> {
        (k..k + len).map(|l| self.exogenous(l)).collect()
    }
}

/// Extend a record beyond its end by repeating its last day.
fn extend_periodic(mut recs: Vec<WeatherRecord>, steps: usize, total: usize, day: usize) -> Result<Vec<WeatherRecord>> {
    if recs.len() < steps {
        return Err(Error::config(
            "weather.csv",
            format!("{} records, run needs {steps}", recs.len()),
        ));
    }
    let n = recs.len();
    let period = day.min(n).max(1);
    while recs.len() < total {
        let k = recs.len();
        let src = recs[n - period + (k - n) % period];
        recs.push(WeatherRecord { k, ..src });
    }
    Ok(recs)
}
