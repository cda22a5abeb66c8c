//! Files written by the command line: `metrics.json`, `trajectory.csv`,
//! `comparison.json`, `boxplot.csv`.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;

use hvac_mpc_core::dr::DrProgram;
use hvac_mpc_core::metrics::{cost_delta_percent, MetricsReport, Trajectory};

use crate::montecarlo::McSummary;
use crate::HarnessError;

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub a: MetricsReport,
    pub b: MetricsReport,
    /// Overall-cost saving of `a` relative to `b`, percent.
    pub cost_delta_percent: f64,
    pub violation_delta: f64,
}

pub fn compare_reports(a: MetricsReport, b: MetricsReport) -> Comparison {
    Comparison {
        cost_delta_percent: cost_delta_percent(a.overall_cost, b.overall_cost),
        violation_delta: a.worst_zone_violation - b.worst_zone_violation,
        a,
        b,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| HarnessError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let w = create(path)?;
    serde_json::to_writer_pretty(w, value).map_err(|e| HarnessError::io(path, e))
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), HarnessError> {
    traj.write_csv(create(path)?).map_err(|e| HarnessError::io(path, e))
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory, HarnessError> {
    let f = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    Trajectory::read_csv(f).map_err(HarnessError::Config)
}

/// Metrics recomputed from a trajectory dump.
pub fn metrics_from_file(path: &Path, program: &DrProgram) -> Result<MetricsReport, HarnessError> {
    Ok(MetricsReport::from_trajectory(&read_trajectory(path)?, program))
}

/// One line per realization, nominal run first as realization 0.
pub fn write_boxplot(path: &Path, summaries: &[McSummary]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let err = |e: csv::Error| HarnessError::io(path, e);
    w.write_record(["sources", "realization", "overall_cost", "energy_cost", "dr_reward", "worst_zone_violation"])
        .map_err(err)?;
    for s in summaries {
        let label = s.sources.iter().map(|u| format!("{u:?}").to_lowercase()).collect::<Vec<_>>().join("+");
        for (r, m) in std::iter::once(&s.nominal).chain(&s.runs).enumerate() {
            w.write_record([
                label.clone(),
                r.to_string(),
                m.overall_cost.to_string(),
                m.energy_cost.to_string(),
                m.dr_reward.to_string(),
                m.worst_zone_violation.to_string(),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}
