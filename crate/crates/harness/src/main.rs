use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};

use hvac_mpc_core::config::{ControllerKind, ExperimentConfig, UncertaintySource};
use hvac_mpc_core::scenario::Scenario;
use hvac_mpc_core::Mode;
use hvac_mpc_harness::output::{metrics_from_file, write_boxplot, write_json, write_trajectory};
use hvac_mpc_harness::{compare_reports, models_for, monte_carlo, run_experiment, scenarios, HarnessError, RunOptions};

#[derive(Parser)]
#[command(name = "hvac-mpc", version, about = "Predictive HVAC/storage control experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Bundled scenario name instead of a config file.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Identified model (JSON) to use instead of identifying one.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Simulate only the first N steps.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identification campaign and save the fitted models.
    Identify(Common),
    /// One closed-loop run.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_controller)]
        controller: Option<ControllerKind>,
    },
    /// Predictive control against the thermostat on the same scenario, or
    /// two configurations against each other.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Second configuration; must describe the same scenario.
        #[arg(long)]
        against: Option<PathBuf>,
    },
    /// Repeated runs under forecast error.
    Montecarlo {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        realizations: usize,
        /// Comma-separated sources (temp, irr, gains); each one alone and
        /// then all combined.
        #[arg(long, value_delimiter = ',', default_value = "temp,irr,gains")]
        uncertainty: Vec<UncertaintySource>,
    },
    /// Recompute metrics from a trajectory dump.
    Metrics {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trajectory: PathBuf,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "heating" => Ok(Mode::Heating),
        "cooling" => Ok(Mode::Cooling),
        _ => Err(format!("expected heating or cooling, got `{s}`")),
    }
}

fn parse_controller(s: &str) -> Result<ControllerKind, String> {
    s.parse().map_err(|e: hvac_mpc_core::Error| e.to_string())
}

fn load(c: &Common) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match (&c.config, &c.scenario) {
        (Some(p), _) => ExperimentConfig::load(p).map_err(HarnessError::Config)?,
        (None, Some(name)) => scenarios::bundled(name).map_err(HarnessError::Config)?,
        (None, None) => ExperimentConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = c.mode {
        cfg.mode = mode;
    }
    if let Some(m) = &c.model {
        cfg.identification.model = Some(std::path::absolute(m).map_err(|e| HarnessError::io(m, e))?);
    }
    cfg.validate().map_err(HarnessError::Config)?;
    Ok(cfg)
}

/// Everything that defines the plant and its inputs must agree.
fn same_scenario(a: &ExperimentConfig, b: &ExperimentConfig) -> bool {
    let strip = |c: &ExperimentConfig| {
        let mut c = c.clone();
        c.controller = ControllerKind::Mpc;
        c.mpc = Default::default();
        c.thermostat = Default::default();
        c.identification = Default::default();
        c.uncertainty = Default::default();
        c.base_dir = PathBuf::new();
        c
    };
    strip(a) == strip(b) && a.mpc.horizon == b.mpc.horizon
}

fn run_one(cfg: &ExperimentConfig, scenario: &Scenario, opts: &RunOptions, out: &Path) -> Result<hvac_mpc_core::metrics::MetricsReport, HarnessError> {
    let models = match opts.controller {
        ControllerKind::Mpc => Some(models_for(cfg, scenario)?),
        ControllerKind::Thermostat => None,
    };
    let res = run_experiment(cfg, scenario, models.as_ref(), opts);
    if let Err(HarnessError::Solver { k, source }) = &res {
        if let Some(dump) = source.dump() {
            let path = out.join(format!("failed_step_{k}.lp"));
            if std::fs::create_dir_all(out).and_then(|_| std::fs::write(&path, dump)).is_ok() {
                error!("problem dump written to {}", path.display());
            }
        }
    }
    let res = res?;
    write_trajectory(&out.join("trajectory.csv"), &res.trajectory)?;
    write_json(&out.join("metrics.json"), &res.metrics)?;
    Ok(res.metrics)
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Identify(c) => {
            let cfg = load(&c)?;
            let scenario = Scenario::from_config(&cfg).map_err(HarnessError::Config)?;
            let models = hvac_mpc_core::identify::identify(&cfg, &scenario).map_err(HarnessError::Config)?;
            let path = c.out.join("model.json");
            std::fs::create_dir_all(&c.out).map_err(|e| HarnessError::io(&c.out, e))?;
            std::fs::write(&path, models.to_json()).map_err(|e| HarnessError::io(&path, e))?;
            if let Some(r) = &models.report {
                for (label, d) in &r.depths {
                    println!("FIT {label:>5}: zones mean {:.1} % (min {:.1} %), loop {:.1} %", d.zone_mean, d.zone_min, d.loop_fit);
                }
            }
            println!("model written to {}", path.display());
        }
        Command::Run { common, controller } => {
            let mut cfg = load(&common)?;
            if let Some(k) = controller {
                cfg.controller = k;
            }
            let scenario = Scenario::from_config(&cfg).map_err(HarnessError::Config)?;
            let opts = RunOptions { steps: common.steps, ..RunOptions::nominal(cfg.controller) };
            let m = run_one(&cfg, &scenario, &opts, &common.out)?;
            println!("{}", serde_json::to_string_pretty(&m).expect("metrics serialize"));
        }
        Command::Compare { common, against } => {
            let cfg_a = load(&common)?;
            let (cfg_a, cfg_b) = match against {
                Some(p) => {
                    let b = ExperimentConfig::load(&p).map_err(HarnessError::Config)?;
                    if !same_scenario(&cfg_a, &b) {
                        return Err(HarnessError::Mismatch("the two configurations describe different scenarios".into()));
                    }
                    (cfg_a, b)
                }
                None => {
                    let a = ExperimentConfig { controller: ControllerKind::Mpc, ..cfg_a.clone() };
                    let b = ExperimentConfig { controller: ControllerKind::Thermostat, ..cfg_a };
                    (a, b)
                }
            };
            let scenario = Scenario::from_config(&cfg_a).map_err(HarnessError::Config)?;
            let mut reports = Vec::new();
            for (cfg, dir) in [(&cfg_a, "a"), (&cfg_b, "b")] {
                let opts = RunOptions { steps: common.steps, ..RunOptions::nominal(cfg.controller) };
                reports.push(run_one(cfg, &scenario, &opts, &common.out.join(dir))?);
            }
            let b = reports.pop().expect("two runs");
            let a = reports.pop().expect("two runs");
            let cmp = compare_reports(a, b);
            write_json(&common.out.join("comparison.json"), &cmp)?;
            println!("{:<28}{:>14}{:>14}", "", format!("{:?}", cfg_a.controller), format!("{:?}", cfg_b.controller));
            println!("{:<28}{:>14.2}{:>14.2}", "energy cost without DR", cmp.a.energy_cost, cmp.b.energy_cost);
            println!("{:<28}{:>14}{:>14}", "DR requests fulfilled", cmp.a.dr_fulfilled, cmp.b.dr_fulfilled);
            println!("{:<28}{:>14.2}{:>14.2}", "overall cost", cmp.a.overall_cost, cmp.b.overall_cost);
            println!("{:<28}{:>14.3}{:>14.3}", "worst zone violation", cmp.a.worst_zone_violation, cmp.b.worst_zone_violation);
            println!("cost delta {:.2} %", cmp.cost_delta_percent);
        }
        Command::Montecarlo { common, realizations, uncertainty } => {
            let cfg = load(&common)?;
            let scenario = Scenario::from_config(&cfg).map_err(HarnessError::Config)?;
            let models = models_for(&cfg, &scenario)?;
            let mut groups: Vec<Vec<UncertaintySource>> = uncertainty.iter().map(|s| vec![*s]).collect();
            if uncertainty.len() > 1 {
                groups.push(uncertainty.clone());
            }
            let mut summaries = Vec::new();
            for g in &groups {
                info!("montecarlo: sources {g:?}, {realizations} realizations");
                let s = monte_carlo(&cfg, &scenario, &models, g, realizations, common.steps)?;
                println!(
                    "{:<20} worst cost {:.2} (nominal {:.2}, +{:.2} %), worst violation {:.3} °C (nominal {:.3})",
                    format!("{g:?}"),
                    s.overall_cost.max,
                    s.nominal.overall_cost,
                    s.cost_inflation_percent,
                    s.worst_zone_violation.max,
                    s.nominal.worst_zone_violation
                );
                summaries.push(s);
            }
            write_boxplot(&common.out.join("boxplot.csv"), &summaries)?;
            write_json(&common.out.join("montecarlo.json"), &summaries)?;
        }
        Command::Metrics { common, trajectory } => {
            let cfg = load(&common)?;
            let m = metrics_from_file(&trajectory, &cfg.dr_program().map_err(HarnessError::Config)?)?;
            write_json(&common.out.join("metrics.json"), &m)?;
            println!("{}", serde_json::to_string_pretty(&m).expect("metrics serialize"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
