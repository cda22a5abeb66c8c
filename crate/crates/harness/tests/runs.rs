use hvac_mpc_core::config::{ControllerKind, ExperimentConfig, UncertaintySource};
use hvac_mpc_core::metrics::{MetricsReport, Trajectory};
use hvac_mpc_core::scenario::Scenario;
use hvac_mpc_harness::output::{metrics_from_file, read_trajectory, write_trajectory};
use hvac_mpc_harness::{compare_reports, models_for, monte_carlo, run_experiment, RunOptions};

const SMALL: &str = r#"
seed = 5
mode = "heating"

[grid]
steps = 36

[building]
zones = 4
columns = 2

[mpc]
horizon = 12

[[dr]]
start = 10
len = 3
cap = 4.0
reward = 0.5
"#;

fn small() -> (ExperimentConfig, Scenario) {
    let cfg = ExperimentConfig::from_toml_str(SMALL).unwrap();
    let scenario = Scenario::from_config(&cfg).unwrap();
    (cfg, scenario)
}

fn without_timing(t: &Trajectory) -> Trajectory {
    let mut t = t.clone();
    for r in &mut t.rows {
        r.solve_ms = 0.0;
    }
    t
}

#[test]
fn same_seed_same_run() {
    let (cfg, scenario) = small();
    let models = models_for(&cfg, &scenario).unwrap();
    let opts = RunOptions::nominal(ControllerKind::Mpc);
    let a = run_experiment(&cfg, &scenario, Some(&models), &opts).unwrap();
    let b = run_experiment(&cfg, &scenario, Some(&models), &opts).unwrap();
    assert_eq!(without_timing(&a.trajectory), without_timing(&b.trajectory));
    assert_eq!(a.steps, b.steps);
    assert_eq!(a.metrics.overall_cost.to_bits(), b.metrics.overall_cost.to_bits());
}

#[test]
fn free_energy_costs_nothing() {
    let (mut cfg, _) = small();
    cfg.dr.clear();
    cfg.weather.price = hvac_mpc_core::synth::PriceProfile { night: 0.0, morning_peak: 0.0, midday: 0.0, evening_peak: 0.0 };
    let scenario = Scenario::from_config(&cfg).unwrap();
    let models = models_for(&cfg, &scenario).unwrap();
    let out = run_experiment(&cfg, &scenario, Some(&models), &RunOptions::nominal(ControllerKind::Mpc)).unwrap();
    assert_eq!(out.metrics.overall_cost, 0.0);
    assert_eq!(out.metrics.dr_reward, 0.0);
    assert!(out.metrics.worst_zone_violation < 0.05, "{}", out.metrics.worst_zone_violation);
}

#[test]
fn report_is_a_function_of_the_dump() {
    let (cfg, scenario) = small();
    let models = models_for(&cfg, &scenario).unwrap();
    let out = run_experiment(&cfg, &scenario, Some(&models), &RunOptions::nominal(ControllerKind::Mpc)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trajectory.csv");
    write_trajectory(&path, &out.trajectory).unwrap();
    assert_eq!(read_trajectory(&path).unwrap(), out.trajectory);
    let again = metrics_from_file(&path, &scenario.program).unwrap();
    assert_eq!(again, out.metrics);
    // Settlement recomputed offline agrees with the report.
    let s = hvac_mpc_core::dr::dr_settlement(&scenario.program, &out.trajectory.grid());
    assert_eq!(s.reward, out.metrics.dr_reward);
    assert_eq!(out.metrics.overall_cost, out.metrics.energy_cost - s.reward);
}

#[test]
fn identical_controllers_compare_equal() {
    let (cfg, scenario) = small();
    let opts = RunOptions::nominal(ControllerKind::Thermostat);
    let a = run_experiment(&cfg, &scenario, None, &opts).unwrap().metrics;
    let b = run_experiment(&cfg, &scenario, None, &opts).unwrap().metrics;
    let cmp = compare_reports(a, b);
    assert_eq!(cmp.cost_delta_percent, 0.0);
    assert_eq!(cmp.violation_delta, 0.0);
}

#[test]
fn monte_carlo_without_sources_repeats_the_nominal_run() {
    let (cfg, scenario) = small();
    let models = models_for(&cfg, &scenario).unwrap();
    let s = monte_carlo(&cfg, &scenario, &models, &[], 3, Some(12)).unwrap();
    let same = |a: &MetricsReport, b: &MetricsReport| a.overall_cost == b.overall_cost && a.zone_violation == b.zone_violation;
    assert!(s.runs.iter().all(|r| same(r, &s.nominal)));
    assert_eq!(s.cost_inflation_percent, 0.0);
    assert_eq!(s.violation_increase, 0.0);

    let one = monte_carlo(&cfg, &scenario, &models, &[UncertaintySource::Temp], 1, Some(12)).unwrap();
    assert_eq!(one.runs.len(), 1);
    assert_eq!(one.overall_cost.min, one.runs[0].overall_cost);
    assert_eq!(one.overall_cost.max, one.runs[0].overall_cost);
    assert!(monte_carlo(&cfg, &scenario, &models, &[], 0, Some(12)).is_err());
}

#[test]
fn thermostat_needs_no_model_but_mpc_does() {
    let (cfg, scenario) = small();
    let opts = RunOptions { steps: Some(3), ..RunOptions::nominal(ControllerKind::Mpc) };
    let err = run_experiment(&cfg, &scenario, None, &opts).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}
