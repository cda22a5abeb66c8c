use std::time::Instant;

use log::info;

use hvac_mpc_core::config::MpcSettings;
use hvac_mpc_core::dr::DrProgram;
use hvac_mpc_core::forecast::ForecastBundle;
use hvac_mpc_core::identify::ModelBundle;
use hvac_mpc_core::{ComfortSchedule, DeviceParams, Measurements, Mode, StepDecision};
use hvac_mpc_optim::{solve_binary_milp, to_lp_format, EnumOptions, LinearProgram, LpSession, MilpSession, Status};

use crate::fan::recover_fan_commands;
use crate::problem::{
    build_feasibility_lp, build_operation_milp, energy_cost, relaxation_from, History, HorizonInput, OperationInput,
    Plan, Relaxation,
};
use crate::MpcError;

/// Per-step inputs from the plant and the environment.
#[derive(Debug, Clone, Copy)]
pub struct StepInput<'a> {
    pub k: usize,
    pub meas: &'a Measurements,
    /// Exogenous forecast for `k .. k + horizon`.
    pub forecast: &'a ForecastBundle,
    /// Price for `k .. k + horizon`.
    pub price: &'a [f64],
    pub program: &'a DrProgram,
    /// Realized grid energy before `k`.
    pub realized_grid: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub feasibility_objective: f64,
    pub comfort_slack: f64,
    pub technical_slack: f64,
    /// Operation objective: planned energy cost minus planned rewards.
    pub objective: f64,
    pub energy_cost: f64,
    /// Requests in the horizon and the chosen indicators.
    pub requests: Vec<usize>,
    pub assignment: Vec<bool>,
    pub feasibility_ms: f64,
    pub operation_ms: f64,
    pub total_ms: f64,
    pub iterations: u64,
    pub saturated: Vec<usize>,
    pub plan: Plan,
    pub relaxation: Relaxation,
}

pub struct MpcController {
    models: ModelBundle,
    devices: DeviceParams,
    settings: MpcSettings,
    mode: Mode,
    schedule: ComfortSchedule,
    history: History,
    depth: usize,
    // Solver state carried from step to step; the problems keep their
    // structure, so each solve starts from the previous basis.
    feasibility: Option<LpSession>,
    operation: MilpSession,
}

impl MpcController {
    /// `schedule` is the comfort schedule as given; the controller narrows
    /// it by the configured margin.
    pub fn new(
        models: ModelBundle,
        devices: DeviceParams,
        settings: MpcSettings,
        mode: Mode,
        schedule: &ComfortSchedule,
    ) -> Result<Self, MpcError> {
        models.validate().map_err(|e| MpcError::Input(e.to_string()))?;
        devices.validate().map_err(|e| MpcError::Input(e.to_string()))?;
        if models.mode != mode {
            return Err(MpcError::Input(format!("model identified for {:?}, controller runs {mode:?}", models.mode)));
        }
        if schedule.zones() != models.zones() {
            return Err(MpcError::Input("schedule zone count differs from the model".into()));
        }
        let depth = models.zone.spec.max_zone_lag().max(models.loop_model.max_lag()).max(1);
        Ok(Self {
            schedule: schedule.tightened(settings.comfort_margin),
            models,
            devices,
            settings,
            mode,
            history: History::default(),
            depth,
            feasibility: None,
            operation: MilpSession::new(),
        })
    }

    pub fn horizon(&self) -> usize {
        self.settings.horizon
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    /// Comfort bounds `[l][i]` for the temperatures at `k + 1 ..= k + horizon`.
    pub fn bounds(&self, k: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let m = self.models.zones();
        let n = self.settings.horizon;
        let lower = (0..n).map(|l| (0..m).map(|i| self.schedule.lower(i, k + l + 1)).collect()).collect();
        let upper = (0..n).map(|l| (0..m).map(|i| self.schedule.upper(i, k + l + 1)).collect()).collect();
        (lower, upper)
    }

    fn dump(lp: &LinearProgram, binaries: &[usize]) -> String {
        to_lp_format(lp, binaries)
    }

    /// One pass of the two-step procedure; returns the first decision of
    /// the plan and records the step in the regressor history.
    pub fn step(&mut self, s: &StepInput) -> Result<(StepDecision, StepReport), MpcError> {
        let start = Instant::now();
        let n = self.settings.horizon;
        let (lower, upper) = self.bounds(s.k);
        let inp = HorizonInput {
            k: s.k,
            horizon: n,
            mode: self.mode,
            models: &self.models,
            devices: &self.devices,
            meas: s.meas,
            history: &self.history,
            forecast: s.forecast,
            lower: &lower,
            upper: &upper,
        };

        let (feas, feas_layout) = build_feasibility_lp(&inp, self.settings.tech_slack_weight, None)?;
        let solved = match self.feasibility.as_mut() {
            Some(session) => session.update(feas.clone()).and_then(|_| session.solve()),
            None => LpSession::new(feas.clone()).and_then(|s| self.feasibility.insert(s).solve()),
        };
        let r = solved.map_err(|source| {
            self.feasibility = None;
            MpcError::Solver { stage: "feasibility", source, dump: Self::dump(&feas, &[]) }
        })?;
        if r.status != Status::Optimal {
            return Err(MpcError::Status { stage: "feasibility", status: r.status, dump: Self::dump(&feas, &[]) });
        }
        let relax = relaxation_from(&feas_layout, &r.x);
        let feasibility_ms = r.wall_ms;
        let mut iterations = r.iterations;

        let op = OperationInput {
            price: s.price,
            program: s.program,
            realized_grid: s.realized_grid,
            battery_regularizer: self.settings.battery_regularizer,
            max_binaries: self.settings.max_binaries,
        };
        let (spec, layout, requests) = build_operation_milp(&inp, &op, &relax)?;
        let opts = EnumOptions { parallel: self.settings.parallel };
        let solved = if opts.parallel { solve_binary_milp(&spec, opts) } else { self.operation.solve(&spec) };
        let sol = solved.map_err(|source| MpcError::Solver {
            stage: "operation",
            source,
            dump: Self::dump(&spec.lp, &spec.binaries),
        })?;
        if sol.status != Status::Optimal {
            return Err(MpcError::Status { stage: "operation", status: sol.status, dump: Self::dump(&spec.lp, &spec.binaries) });
        }
        iterations += sol.iterations;
        let plan = Plan::extract(&layout, &sol.x);

        let meas = s.meas;
        let supply = meas.supply(self.mode);
        let gamma: Vec<f64> = self.devices.zones.iter().map(|z| z.gamma).collect();
        let v_max: Vec<f64> = self.devices.zones.iter().map(|z| z.v_max).collect();
        let fans = recover_fan_commands(&plan.heat[0], supply, &meas.zone, &gamma, &v_max);
        // The plan may sit on the setpoint limit plus the relaxation pad.
        let t0 = match self.mode {
            Mode::Heating => plan.setpoint[0].min(self.devices.t0_max_heat),
            Mode::Cooling => plan.setpoint[0].max(self.devices.t0_min_cool),
        };
        let decision = StepDecision {
            v: fans.v.clone(),
            t0,
            ees_charge: plan.charge[0],
            ees_discharge: plan.discharge[0],
            pv: plan.pv[0],
        };

        // Heat the fan-coils deliver with these commands, as the next
        // regressor sample.
        let heat: Vec<f64> = (0..fans.v.len()).map(|i| gamma[i] * (supply - meas.zone[i]) * fans.v[i]).collect();
        let (loop_t, outlet) = match self.mode {
            Mode::Heating => (meas.tes, meas.hp_heat),
            Mode::Cooling => (meas.cool_in, meas.hp_cool),
        };
        self.history.push(meas.zone.clone(), loop_t, outlet, heat, s.forecast.at(0), self.depth);

        let report = StepReport {
            feasibility_objective: r.objective,
            comfort_slack: relax.comfort_total(),
            technical_slack: relax.technical_total(),
            objective: sol.objective,
            energy_cost: energy_cost(&layout, s.price, &sol.x),
            requests: requests.iter().map(|a| a.index).collect(),
            assignment: sol.assignment.clone(),
            feasibility_ms,
            operation_ms: sol.wall_ms,
            total_ms: start.elapsed().as_secs_f64() * 1e3,
            iterations,
            saturated: fans.saturated,
            plan,
            relaxation: relax,
        };
        info!(
            "k={} objective={:.6} energy_cost={:.6} comfort_slack={:.4} tech_slack={:.4} eps={:?} feas_ms={:.1} op_ms={:.1}",
            s.k,
            report.objective,
            report.energy_cost,
            report.comfort_slack,
            report.technical_slack,
            report.requests.iter().zip(&report.assignment).collect::<Vec<_>>(),
            report.feasibility_ms,
            report.operation_ms
        );
        Ok((decision, report))
    }
}
