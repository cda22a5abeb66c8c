//! Closed-loop simulation of one controller on one scenario.

use log::{debug, info};
use rand_chacha::ChaCha8Rng;

use hvac_mpc::{dr_settlement, MpcController, RequestStatus, StepInput};
use hvac_mpc_core::baseline::Thermostat;
use hvac_mpc_core::config::{ControllerKind, ExperimentConfig, UncertaintySource};
use hvac_mpc_core::devices::pv_available;
use hvac_mpc_core::forecast::{Ar2Noise, ForecastBundle, Uncertainty};
use hvac_mpc_core::identify::{identify, ModelBundle};
use hvac_mpc_core::metrics::{MetricsReport, Trajectory, TrajectoryRow};
use hvac_mpc_core::rng::substream;
use hvac_mpc_core::scenario::Scenario;
use hvac_mpc_core::{Plant, StepDecision};

use crate::HarnessError;

/// Forecast noise for the configured sources, calibrated to the horizon.
pub fn uncertainty(cfg: &ExperimentConfig, sources: &[UncertaintySource]) -> Uncertainty {
    let n = cfg.mpc.horizon;
    let u = &cfg.uncertainty;
    let pick = |s: UncertaintySource, env: f64| sources.contains(&s).then(|| Ar2Noise::calibrated(env, n));
    Uncertainty {
        temperature: pick(UncertaintySource::Temp, u.temperature_envelope),
        irradiance: pick(UncertaintySource::Irr, u.irradiance_envelope),
        gains: pick(UncertaintySource::Gains, u.gains_envelope),
    }
}

/// Loads the configured model file, or identifies one on the scenario.
pub fn models_for(cfg: &ExperimentConfig, scenario: &Scenario) -> Result<ModelBundle, HarnessError> {
    match &cfg.identification.model {
        Some(path) => {
            let path = cfg.resolve(path);
            let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
            let b = ModelBundle::from_json(&text).map_err(HarnessError::Config)?;
            if b.mode != scenario.mode || b.zones() != scenario.zones() {
                return Err(HarnessError::Config(hvac_mpc_core::Error::config(
                    "identification.model",
                    "model does not match the scenario mode or zone count",
                )));
            }
            Ok(b)
        }
        None => identify(cfg, scenario).map_err(HarnessError::Config),
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub controller: ControllerKind,
    pub uncertainty: Uncertainty,
    /// Index of the random realization (sensor and forecast noise).
    pub realization: u64,
    /// Run only the first steps of the scenario.
    pub steps: Option<usize>,
}

impl RunOptions {
    pub fn nominal(controller: ControllerKind) -> Self {
        Self { controller, uncertainty: Uncertainty::default(), realization: 0, steps: None }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub metrics: MetricsReport,
    /// Per-step MPC diagnostics, empty for the thermostat.
    pub steps: Vec<StepSummary>,
}

/// What the controller planned at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSummary {
    pub k: usize,
    pub feasibility_objective: f64,
    pub comfort_slack: f64,
    pub objective: f64,
    pub requests: Vec<usize>,
    pub assignment: Vec<bool>,
    /// Planned charge, discharge and state of charge over the horizon.
    pub charge: Vec<f64>,
    pub discharge: Vec<f64>,
    pub soc: Vec<f64>,
}

/// Forecast for `k .. k + n` with independent error streams per source.
struct Forecaster {
    unc: Uncertainty,
    temp: ChaCha8Rng,
    irr: ChaCha8Rng,
    gains: ChaCha8Rng,
}

impl Forecaster {
    fn new(seed: u64, realization: u64, unc: Uncertainty) -> Self {
        Self {
            unc,
            temp: substream(seed, "forecast-temp", realization),
            irr: substream(seed, "forecast-irr", realization),
            gains: substream(seed, "forecast-gains", realization),
        }
    }

    fn forecast(&mut self, scenario: &Scenario, k: usize, n: usize) -> Result<ForecastBundle, HarnessError> {
        let truth = scenario.window(k, n);
        let mut f = ForecastBundle::perfect(&truth);
        if let Some(noise) = self.unc.temperature {
            let u = Uncertainty { temperature: Some(noise), ..Uncertainty::default() };
            f.ta = ForecastBundle::perturbed(&truth, &u, &mut self.temp).map_err(HarnessError::Config)?.ta;
        }
        if let Some(noise) = self.unc.irradiance {
            let u = Uncertainty { irradiance: Some(noise), ..Uncertainty::default() };
            f.irr = ForecastBundle::perturbed(&truth, &u, &mut self.irr).map_err(HarnessError::Config)?.irr;
        }
        if let Some(noise) = self.unc.gains {
            let u = Uncertainty { gains: Some(noise), ..Uncertainty::default() };
            f.gains = ForecastBundle::perturbed(&truth, &u, &mut self.gains).map_err(HarnessError::Config)?.gains;
        }
        Ok(f)
    }
}

enum Driver {
    Mpc(Box<MpcController>),
    Thermostat(Thermostat),
}

/// Runs the closed loop. `models` is required for the predictive controller.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    scenario: &Scenario,
    models: Option<&ModelBundle>,
    opts: &RunOptions,
) -> Result<RunOutput, HarnessError> {
    let mode = scenario.mode;
    let devices = &scenario.devices;
    let plant = Plant::new(scenario.plant.clone(), devices.clone()).map_err(HarnessError::Config)?;
    let n = cfg.mpc.horizon;
    let steps = opts.steps.unwrap_or(scenario.grid.steps).min(scenario.grid.steps);
    let mut driver = match opts.controller {
        ControllerKind::Mpc => {
            let models = models.ok_or_else(|| {
                HarnessError::Config(hvac_mpc_core::Error::config("identification", "predictive control needs a model"))
            })?;
            let ctl = MpcController::new(models.clone(), devices.clone(), cfg.mpc.clone(), mode, &scenario.schedule)
                .map_err(|e| HarnessError::Solver { k: 0, source: e })?;
            Driver::Mpc(Box::new(ctl))
        }
        ControllerKind::Thermostat => {
            let lead = scenario.grid.steps_for_hours(cfg.thermostat.lead_hours);
            let t = Thermostat::new(cfg.thermostat, &scenario.schedule, lead, mode).map_err(HarnessError::Config)?;
            Driver::Thermostat(t)
        }
    };

    let mut sensor = substream(cfg.seed, "sensor", opts.realization);
    let mut forecaster = Forecaster::new(cfg.seed, opts.realization, opts.uncertainty);
    let mut state = scenario.initial.clone();
    let mut grid: Vec<f64> = Vec::with_capacity(steps);
    let mut rows = Vec::with_capacity(steps);
    let mut summaries = Vec::new();
    let mut settled = vec![false; scenario.program.requests.len()];

    for k in 0..steps {
        let meas = plant.measure(&state, &mut sensor);
        let exo = scenario.exogenous(k);
        let (decision, solve_ms): (StepDecision, f64) = match &mut driver {
            Driver::Mpc(ctl) => {
                let fc = forecaster.forecast(scenario, k, n)?;
                let price = &scenario.price.as_slice()[k..k + n];
                let input = StepInput { k, meas: &meas, forecast: &fc, price, program: &scenario.program, realized_grid: &grid };
                let (d, rep) = ctl.step(&input).map_err(|e| HarnessError::Solver { k, source: e })?;
                summaries.push(StepSummary {
                    k,
                    feasibility_objective: rep.feasibility_objective,
                    comfort_slack: rep.comfort_slack,
                    objective: rep.objective,
                    requests: rep.requests.clone(),
                    assignment: rep.assignment.clone(),
                    charge: rep.plan.charge.clone(),
                    discharge: rep.plan.discharge.clone(),
                    soc: rep.plan.soc.clone(),
                });
                (d, rep.total_ms)
            }
            Driver::Thermostat(t) => {
                let pv = pv_available(exo.irr, exo.ta, &devices.pv_theta);
                (t.step(&meas, k, pv, devices, mode), 0.0)
            }
        };
        let out = plant.step(&state, &decision, &exo, mode).map_err(HarnessError::Plant)?;
        let m = scenario.zones();
        rows.push(TrajectoryRow {
            k,
            price: scenario.price.at(k),
            ta: exo.ta,
            irr: exo.irr,
            pv_available: out.pv_available,
            t0: decision.t0,
            hp: out.ledger.hp,
            ees_charge: out.ledger.ees_charge,
            ees_discharge: out.ledger.ees_discharge,
            pv: out.ledger.pv,
            grid: out.ledger.grid,
            tes: state.tes,
            hp_heat: state.hp_heat,
            cool_in: state.cool_in,
            hp_cool: state.hp_cool,
            soc: state.soc,
            solve_ms,
            zone: state.zone.clone(),
            lower: (0..m).map(|i| scenario.schedule.lower(i, k)).collect(),
            upper: (0..m).map(|i| scenario.schedule.upper(i, k)).collect(),
            v: decision.v.clone(),
            heat: out.heat.clone(),
            gains: exo.gains.clone(),
        });
        grid.push(out.ledger.grid);
        state = out.state;

        // Settle requests whose window just closed.
        let s = dr_settlement(&scenario.program, &grid);
        for (j, st) in s.status.iter().enumerate() {
            if !settled[j] && *st != RequestStatus::Pending {
                settled[j] = true;
                info!("k={k} request {j}: {st:?}, consumption {:.3} kWh", s.consumption[j]);
            }
        }
        debug!("k={k} grid={:.3} hp={:.3} soc={:.3}", out.ledger.grid, out.ledger.hp, state.soc);
    }

    let trajectory = Trajectory { rows };
    let metrics = MetricsReport::from_trajectory(&trajectory, &scenario.program);
    Ok(RunOutput { trajectory, metrics, steps: summaries })
}
