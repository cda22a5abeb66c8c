//! Experiment configuration document (TOML).
//!
//! Every section is optional; omitted fields take the defaults below.
//! Storage and PV sizes default to a per-zone share of a 126-zone reference
//! building (28 kWh / 24 kW battery, 10 kW peak PV).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baseline::ThermostatConfig;
use crate::comfort::{Mode, ZoneClass};
use crate::dr::{DrProgram, DrRequest};
use crate::error::{Error, Result};
use crate::plant::ZoneThermal;
use crate::synth::{GainProfile, PriceProfile, WeatherProfile};

const REFERENCE_ZONES: f64 = 126.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    #[default]
    Mpc,
    Thermostat,
}

impl std::str::FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mpc" => Ok(Self::Mpc),
            "thermostat" => Ok(Self::Thermostat),
            _ => Err(Error::config("controller", format!("unknown controller `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub tau_s: f64,
    pub steps: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { tau_s: 600.0, steps: 432 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildingConfig {
    pub zones: usize,
    /// Zones per row of the floor plan; adjacency is 4-connected.
    pub columns: usize,
    /// Zone classes, cycled over the zone index.
    pub classes: Vec<ZoneClass>,
    /// Relative spread of thermal parameters between zones.
    pub variation: f64,
}

impl Default for BuildingConfig {
    fn default() -> Self {
        Self {
            zones: 20,
            columns: 5,
            classes: vec![ZoneClass::Office, ZoneClass::Office, ZoneClass::Residential, ZoneClass::Commercial],
            variation: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceConfig {
    pub gamma: f64,
    pub v_max: f64,
    pub cop_heat: f64,
    pub cop_cool: f64,
    pub eta: f64,
    /// kWh; defaults to the per-zone share of the reference building.
    pub ees_capacity: Option<f64>,
    /// kW; defaults to the per-zone share of the reference building.
    pub ees_rate_kw: Option<f64>,
    /// kW at 1000 W/m² and 25 °C.
    pub pv_peak_kw: Option<f64>,
    pub t0_max_heat: f64,
    pub loop_min_heat: f64,
    pub t0_min_cool: f64,
    pub loop_max_cool: f64,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            gamma: 0.12,
            v_max: 1.0,
            cop_heat: 4.7,
            cop_cool: 4.0,
            eta: 0.95,
            ees_capacity: None,
            ees_rate_kw: None,
            pv_peak_kw: None,
            t0_max_heat: 55.0,
            loop_min_heat: 15.0,
            t0_min_cool: 5.0,
            loop_max_cool: 30.0,
        }
    }
}

impl DeviceConfig {
    pub fn ees_capacity(&self, zones: usize) -> f64 {
        self.ees_capacity.unwrap_or(28.0 * zones as f64 / REFERENCE_ZONES)
    }

    pub fn ees_rate_kw(&self, zones: usize) -> f64 {
        self.ees_rate_kw.unwrap_or(24.0 * zones as f64 / REFERENCE_ZONES)
    }

    pub fn pv_peak_kw(&self, zones: usize) -> f64 {
        self.pv_peak_kw.unwrap_or(10.0 * zones as f64 / REFERENCE_ZONES)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantConfig {
    pub u_neighbor: f64,
    /// kJ/K per zone.
    pub tes_capacity_per_zone: f64,
    /// kW/K per zone.
    pub tes_exchange_per_zone: f64,
    pub cool_capacity_per_zone: f64,
    pub cool_exchange_per_zone: f64,
    pub sensor_sigma: f64,
    /// Used for office and commercial zones.
    pub office: ZoneThermal,
    pub residential: ZoneThermal,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            u_neighbor: 0.05,
            tes_capacity_per_zone: 266.0,
            tes_exchange_per_zone: 0.2,
            cool_capacity_per_zone: 200.0,
            cool_exchange_per_zone: 0.2,
            sensor_sigma: 0.0,
            office: ZoneThermal {
                c_air: 1200.0,
                c_wall: 8000.0,
                u_aw: 0.6,
                u_wo: 0.035,
                u_ao: 0.025,
                aperture: 1.5,
                solar_to_air: 0.4,
            },
            residential: ZoneThermal {
                c_air: 1000.0,
                c_wall: 9000.0,
                u_aw: 0.5,
                u_wo: 0.03,
                u_ao: 0.02,
                aperture: 1.2,
                solar_to_air: 0.4,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    /// Zone air and wall temperature; defaults to the season's comfort midpoint.
    pub zone: Option<f64>,
    pub tes: f64,
    pub cool: f64,
    /// State of charge as a fraction of capacity.
    pub soc_fraction: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self { zone: None, tes: 40.0, cool: 12.0, soc_fraction: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeatherConfig {
    /// Weather/price CSV; relative paths resolve against the config file.
    pub csv: Option<PathBuf>,
    /// Synthetic weather; defaults to the season of `mode`.
    pub profile: Option<WeatherProfile>,
    pub price: PriceProfile,
}

/// Controller tuning consumed by the predictive controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpcSettings {
    pub horizon: usize,
    /// Comfort bands are narrowed by this much on each side, °C.
    pub comfort_margin: f64,
    pub max_binaries: usize,
    /// Penalty on technological slacks relative to comfort slacks.
    pub tech_slack_weight: f64,
    /// Cost on battery throughput that makes charge/discharge exclusive, €/kWh.
    pub battery_regularizer: f64,
    /// Solve enumerated MILP assignments in parallel.
    pub parallel: bool,
}

impl Default for MpcSettings {
    fn default() -> Self {
        Self {
            horizon: 72,
            comfort_margin: 0.1,
            max_binaries: 12,
            tech_slack_weight: 100.0,
            battery_regularizer: 1e-5,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentificationConfig {
    pub days: usize,
    pub estimation_days: usize,
    /// Steps a PRBS fan level is held.
    pub prbs_hold: usize,
    /// Hours between random heat pump setpoint changes.
    pub setpoint_hold_hours: f64,
    /// Previously identified model file; identification runs when absent.
    pub model: Option<PathBuf>,
}

impl Default for IdentificationConfig {
    fn default() -> Self {
        Self { days: 18, estimation_days: 14, prbs_hold: 12, setpoint_hold_hours: 1.0, model: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UncertaintySource {
    Temp,
    Irr,
    Gains,
}

impl std::str::FromStr for UncertaintySource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "temp" => Ok(Self::Temp),
            "irr" => Ok(Self::Irr),
            "gains" => Ok(Self::Gains),
            _ => Err(Error::config("uncertainty.sources", format!("unknown source `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UncertaintyConfig {
    pub sources: Vec<UncertaintySource>,
    /// 90th percentile of the worst temperature error over a horizon, °C.
    pub temperature_envelope: f64,
    /// Same for the relative irradiance error.
    pub irradiance_envelope: f64,
    /// Same for internal gains, kW.
    pub gains_envelope: f64,
}

impl Default for UncertaintyConfig {
    fn default() -> Self {
        Self { sources: Vec::new(), temperature_envelope: 3.0, irradiance_envelope: 0.4, gains_envelope: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub mode: Mode,
    pub controller: ControllerKind,
    pub grid: GridConfig,
    pub building: BuildingConfig,
    pub devices: DeviceConfig,
    pub plant: PlantConfig,
    pub initial: InitialConfig,
    pub weather: WeatherConfig,
    pub gains: GainProfile,
    pub dr: Vec<DrRequest>,
    pub mpc: MpcSettings,
    pub thermostat: ThermostatConfig,
    pub identification: IdentificationConfig,
    pub uncertainty: UncertaintyConfig,
    /// Directory against which relative paths resolve.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            mode: Mode::Heating,
            controller: ControllerKind::Mpc,
            grid: GridConfig::default(),
            building: BuildingConfig::default(),
            devices: DeviceConfig::default(),
            plant: PlantConfig::default(),
            initial: InitialConfig::default(),
            weather: WeatherConfig::default(),
            gains: GainProfile::default(),
            dr: Vec::new(),
            mpc: MpcSettings::default(),
            thermostat: ThermostatConfig::default(),
            identification: IdentificationConfig::default(),
            uncertainty: UncertaintyConfig::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let path = e.span().map_or_else(|| "<document>".to_string(), |s| locate(text, s.start));
            Error::config(path, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn dr_program(&self) -> Result<DrProgram> {
        DrProgram::new(self.dr.clone()).map_err(|e| Error::config("dr", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let need = |ok: bool, path: &str, msg: &str| if ok { Ok(()) } else { Err(Error::config(path, msg)) };
        need(self.grid.tau_s > 0.0 && self.grid.tau_s.is_finite(), "grid.tau_s", "must be positive")?;
        need(self.grid.steps >= 1, "grid.steps", "must be at least 1")?;
        need(self.building.zones >= 1, "building.zones", "must be at least 1")?;
        need(self.building.columns >= 1, "building.columns", "must be at least 1")?;
        need(!self.building.classes.is_empty(), "building.classes", "must not be empty")?;
        need((0.0..0.5).contains(&self.building.variation), "building.variation", "must lie in [0, 0.5)")?;
        let d = &self.devices;
        need(d.gamma > 0.0, "devices.gamma", "must be positive")?;
        need(d.v_max > 0.0, "devices.v_max", "must be positive")?;
        need(d.cop_heat > 0.0, "devices.cop_heat", "must be positive")?;
        need(d.cop_cool > 0.0, "devices.cop_cool", "must be positive")?;
        need(d.eta > 0.0 && d.eta < 1.0, "devices.eta", "must lie strictly between 0 and 1")?;
        let m = self.building.zones;
        need(d.ees_capacity(m) > 0.0, "devices.ees_capacity", "must be positive")?;
        need(d.ees_rate_kw(m) > 0.0, "devices.ees_rate_kw", "must be positive")?;
        need(d.pv_peak_kw(m) >= 0.0, "devices.pv_peak_kw", "must be nonnegative")?;
        need(d.t0_max_heat > d.loop_min_heat, "devices.t0_max_heat", "must exceed loop_min_heat")?;
        need(d.loop_max_cool > d.t0_min_cool, "devices.loop_max_cool", "must exceed t0_min_cool")?;
        need(self.plant.sensor_sigma >= 0.0, "plant.sensor_sigma", "must be nonnegative")?;
        need(
            (0.0..=1.0).contains(&self.initial.soc_fraction),
            "initial.soc_fraction",
            "must lie in [0, 1]",
        )?;
        need(self.mpc.horizon >= 1, "mpc.horizon", "must be at least 1")?;
        need(self.mpc.comfort_margin >= 0.0, "mpc.comfort_margin", "must be nonnegative")?;
        need((1..=20).contains(&self.mpc.max_binaries), "mpc.max_binaries", "must lie in 1..=20")?;
        need(self.mpc.tech_slack_weight > 0.0, "mpc.tech_slack_weight", "must be positive")?;
        need(self.mpc.battery_regularizer >= 0.0, "mpc.battery_regularizer", "must be nonnegative")?;
        self.thermostat.validate().map_err(|e| Error::config("thermostat", e.to_string()))?;
        let id = &self.identification;
        need(id.days > id.estimation_days && id.estimation_days >= 1, "identification.days", "must exceed estimation_days ≥ 1")?;
        need(id.prbs_hold >= 1, "identification.prbs_hold", "must be at least 1")?;
        let u = &self.uncertainty;
        need(u.temperature_envelope >= 0.0, "uncertainty.temperature_envelope", "must be nonnegative")?;
        need(u.irradiance_envelope >= 0.0, "uncertainty.irradiance_envelope", "must be nonnegative")?;
        need(u.gains_envelope >= 0.0, "uncertainty.gains_envelope", "must be nonnegative")?;
        for (j, r) in self.dr.iter().enumerate() {
            r.validate().map_err(|e| Error::config(format!("dr[{j}]"), e.to_string()))?;
        }
        self.dr_program()?;
        Ok(())
    }
}

/// Dotted key path of the table header or key nearest before `offset`.
fn locate(text: &str, offset: usize) -> String {
    let upto = &text[..offset.min(text.len())];
    let line_no = upto.matches('\n').count() + 1;
    let section = upto
        .lines()
        .rev()
        .find_map(|l| {
            let t = l.trim();
            t.starts_with('[').then(|| t.trim_matches(|c| c == '[' || c == ']').to_string())
        })
        .unwrap_or_default();
    let key = text[upto.rfind('\n').map_or(0, |i| i + 1)..]
        .lines()
        .next()
        .and_then(|l| l.split('=').next())
        .map(|k| k.trim().to_string())
        .filter(|k| !k.is_empty() && !k.starts_with('['));
    match (section.is_empty(), key) {
        (true, Some(k)) => format!("{k} (line {line_no})"),
        (false, Some(k)) => format!("{section}.{k} (line {line_no})"),
        (_, None) => format!("{section} (line {line_no})"),
    }
}
