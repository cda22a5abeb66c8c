//! Repeated closed-loop runs under independent forecast-error draws.

use rayon::prelude::*;
use serde::Serialize;

use hvac_mpc_core::config::{ControllerKind, ExperimentConfig, UncertaintySource};
use hvac_mpc_core::identify::ModelBundle;
use hvac_mpc_core::metrics::{cost_delta_percent, MetricsReport};
use hvac_mpc_core::scenario::Scenario;

use crate::experiment::{run_experiment, uncertainty, RunOptions};
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Quartiles {
    /// Linear-interpolation quartiles; `values` must not be empty.
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |p: f64| {
            let x = p * (v.len() - 1) as f64;
            let (lo, hi) = (x.floor() as usize, x.ceil() as usize);
            v[lo] + (x - lo as f64) * (v[hi] - v[lo])
        };
        Self { min: v[0], q1: at(0.25), median: at(0.5), q3: at(0.75), max: v[v.len() - 1] }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct McSummary {
    pub sources: Vec<UncertaintySource>,
    pub nominal: MetricsReport,
    pub runs: Vec<MetricsReport>,
    pub overall_cost: Quartiles,
    pub worst_zone_violation: Quartiles,
    /// Worst realized overall cost relative to the nominal run, percent.
    pub cost_inflation_percent: f64,
    /// Worst realized violation minus the nominal one, °C.
    pub violation_increase: f64,
}

/// Nominal run plus `realizations` runs with forecast error on `sources`.
/// Realizations are independent and run on the rayon pool; results are
/// ordered by realization index.
pub fn monte_carlo(
    cfg: &ExperimentConfig,
    scenario: &Scenario,
    models: &ModelBundle,
    sources: &[UncertaintySource],
    realizations: usize,
    steps: Option<usize>,
) -> Result<McSummary, HarnessError> {
    if realizations == 0 {
        return Err(HarnessError::Mismatch("at least one realization is required".into()));
    }
    let nominal_opts = RunOptions { steps, ..RunOptions::nominal(ControllerKind::Mpc) };
    let nominal = run_experiment(cfg, scenario, Some(models), &nominal_opts)?.metrics;
    let unc = uncertainty(cfg, sources);
    let runs: Vec<MetricsReport> = (1..=realizations as u64)
        .into_par_iter()
        .map(|r| {
            let opts = RunOptions { controller: ControllerKind::Mpc, uncertainty: unc, realization: r, steps };
            run_experiment(cfg, scenario, Some(models), &opts).map(|o| o.metrics)
        })
        .collect::<Result<_, _>>()?;
    let costs: Vec<f64> = runs.iter().map(|r| r.overall_cost).collect();
    let viol: Vec<f64> = runs.iter().map(|r| r.worst_zone_violation).collect();
    let overall_cost = Quartiles::of(&costs);
    let worst_zone_violation = Quartiles::of(&viol);
    Ok(McSummary {
        sources: sources.to_vec(),
        // `+ 0.0` keeps an exact tie at 0 rather than -0.
        cost_inflation_percent: -cost_delta_percent(overall_cost.max, nominal.overall_cost) + 0.0,
        violation_increase: worst_zone_violation.max - nominal.worst_zone_violation,
        nominal,
        runs,
        overall_cost,
        worst_zone_violation,
    })
}
