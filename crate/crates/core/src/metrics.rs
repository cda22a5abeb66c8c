//! Closed-loop trajectories, their CSV form, and the metrics derived from
//! them.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::dr::{dr_settlement, DrProgram};
use crate::error::{Error, Result};

/// One control step: state at the start of the step, the decision applied
/// and the realized energy flows.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub k: usize,
    pub price: f64,
    pub ta: f64,
    pub irr: f64,
    pub pv_available: f64,
    pub t0: f64,
    pub hp: f64,
    pub ees_charge: f64,
    pub ees_discharge: f64,
    pub pv: f64,
    pub grid: f64,
    pub tes: f64,
    pub hp_heat: f64,
    pub cool_in: f64,
    pub hp_cool: f64,
    pub soc: f64,
    pub solve_ms: f64,
    pub zone: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub v: Vec<f64>,
    pub heat: Vec<f64>,
    pub gains: Vec<f64>,
}

const SCALAR_COLUMNS: [&str; 17] = [
    "k", "price", "TA", "I", "pv_available", "T0", "W_hp", "W_ees_plus", "W_ees_minus", "W_pv", "W", "T_tes",
    "T_hp_heat", "T_cool_in", "T_hp_cool", "E_ees", "solve_ms",
];
const ZONE_COLUMNS: [&str; 6] = ["T", "lo", "hi", "v", "h", "G"];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
}

impl Trajectory {
    pub fn zones(&self) -> usize {
        self.rows.first().map_or(0, |r| r.zone.len())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn grid(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.grid).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let m = self.zones();
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = SCALAR_COLUMNS.iter().map(|s| s.to_string()).collect();
        for name in ZONE_COLUMNS {
            header.extend((0..m).map(|i| format!("{name}_{i}")));
        }
        w.write_record(&header)?;
        for r in &self.rows {
            if [&r.zone, &r.lower, &r.upper, &r.v, &r.heat, &r.gains].iter().any(|c| c.len() != m) {
                return Err(Error::LengthMismatch { expected: m, found: r.zone.len() });
            }
            let mut rec = vec![r.k.to_string()];
            rec.extend(
                [
                    r.price, r.ta, r.irr, r.pv_available, r.t0, r.hp, r.ees_charge, r.ees_discharge, r.pv, r.grid,
                    r.tes, r.hp_heat, r.cool_in, r.hp_cool, r.soc, r.solve_ms,
                ]
                .iter()
                .map(|v| v.to_string()),
            );
            for col in [&r.zone, &r.lower, &r.upper, &r.v, &r.heat, &r.gains] {
                rec.extend(col.iter().map(|v| v.to_string()));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().from_reader(reader);
        let header = rdr.headers()?.clone();
        let n = header.len();
        let zone_cols = n.checked_sub(SCALAR_COLUMNS.len()).filter(|z| z % ZONE_COLUMNS.len() == 0);
        let Some(zone_cols) = zone_cols else {
            return Err(Error::Parse { line: 1, message: format!("unexpected column count {n}") });
        };
        let m = zone_cols / ZONE_COLUMNS.len();
        for (j, name) in SCALAR_COLUMNS.iter().enumerate() {
            if &header[j] != *name {
                return Err(Error::Parse { line: 1, message: format!("column {j} should be `{name}`") });
            }
        }
        for (b, name) in ZONE_COLUMNS.iter().enumerate() {
            for i in 0..m {
                let j = SCALAR_COLUMNS.len() + b * m + i;
                if header[j] != format!("{name}_{i}") {
                    return Err(Error::Parse { line: 1, message: format!("column {j} should be `{name}_{i}`") });
                }
            }
        }
        let mut rows = Vec::new();
        for (idx, rec) in rdr.records().enumerate() {
            let line = idx + 2;
            let rec = rec?;
            if rec.len() != n {
                return Err(Error::Parse { line, message: format!("expected {n} fields, got {}", rec.len()) });
            }
            let num = |j: usize| -> Result<f64> {
                rec[j]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse { line, message: format!("bad number `{}` in column {j}", &rec[j]) })
            };
            let k: usize = rec[0].parse().map_err(|_| Error::Parse { line, message: "bad step index".into() })?;
            let s: Vec<f64> = (1..SCALAR_COLUMNS.len()).map(num).collect::<Result<_>>()?;
            let block = |b: usize| -> Result<Vec<f64>> {
                (0..m).map(|i| num(SCALAR_COLUMNS.len() + b * m + i)).collect()
            };
            rows.push(TrajectoryRow {
                k,
                price: s[0],
                ta: s[1],
                irr: s[2],
                pv_available: s[3],
                t0: s[4],
                hp: s[5],
                ees_charge: s[6],
                ees_discharge: s[7],
                pv: s[8],
                grid: s[9],
                tes: s[10],
                hp_heat: s[11],
                cool_in: s[12],
                hp_cool: s[13],
                soc: s[14],
                solve_ms: s[15],
                zone: block(0)?,
                lower: block(1)?,
                upper: block(2)?,
                v: block(3)?,
                heat: block(4)?,
                gains: block(5)?,
            });
        }
        Ok(Self { rows })
    }
}

/// Mean bound violation of each zone over the trajectory, °C.
pub fn zone_violations(traj: &Trajectory) -> Vec<f64> {
    let m = traj.zones();
    let n = traj.len().max(1) as f64;
    (0..m)
        .map(|i| {
            traj.rows
                .iter()
                .map(|r| (r.lower[i] - r.zone[i]).max(r.zone[i] - r.upper[i]).max(0.0))
                .sum::<f64>()
                / n
        })
        .collect()
}

/// Largest per-zone mean violation.
pub fn worst_zone_violation(traj: &Trajectory) -> f64 {
    zone_violations(traj).into_iter().fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveStats {
    pub mean_ms: f64,
    pub median_ms: f64,
    pub max_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub steps: usize,
    /// Σ p(k)·W(k), the cost without demand response.
    pub energy_cost: f64,
    pub grid_energy: f64,
    pub dr_requests: usize,
    pub dr_fulfilled: usize,
    pub dr_reward: f64,
    /// Energy cost minus the demand-response reward.
    pub overall_cost: f64,
    pub zone_violation: Vec<f64>,
    pub worst_zone_violation: f64,
    pub solve: SolveStats,
}

impl MetricsReport {
    pub fn from_trajectory(traj: &Trajectory, program: &DrProgram) -> Self {
        let energy_cost: f64 = traj.rows.iter().map(|r| r.price * r.grid).sum();
        let settlement = dr_settlement(program, &traj.grid());
        let zone_violation = zone_violations(traj);
        let worst = zone_violation.iter().copied().fold(0.0, f64::max);
        let mut times: Vec<f64> = traj.rows.iter().map(|r| r.solve_ms).collect();
        times.sort_by(f64::total_cmp);
        let solve = if times.is_empty() {
            SolveStats::default()
        } else {
            SolveStats {
                mean_ms: times.iter().sum::<f64>() / times.len() as f64,
                median_ms: times[times.len() / 2],
                max_ms: times[times.len() - 1],
            }
        };
        Self {
            steps: traj.len(),
            energy_cost,
            grid_energy: traj.rows.iter().map(|r| r.grid).sum(),
            dr_requests: program.requests.len(),
            dr_fulfilled: settlement.fulfilled(),
            dr_reward: settlement.reward,
            overall_cost: energy_cost - settlement.reward,
            zone_violation,
            worst_zone_violation: worst,
            solve,
        }
    }
}

/// Relative saving of `a` with respect to `b`, percent. Measured against
/// |b| so a negative baseline (rewards above energy cost) keeps the sign;
/// equal costs give 0 even when both are 0.
pub fn cost_delta_percent(cost_a: f64, cost_b: f64) -> f64 {
    if cost_a == cost_b {
        return 0.0;
    }
    100.0 * (cost_b - cost_a) / cost_b.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(k: usize, temps: &[f64], lo: f64, hi: f64) -> TrajectoryRow {
        let m = temps.len();
        TrajectoryRow {
            k,
            price: 0.2,
            grid: 1.5,
            zone: temps.to_vec(),
            lower: vec![lo; m],
            upper: vec![hi; m],
            v: vec![0.0; m],
            heat: vec![0.0; m],
            gains: vec![0.0; m],
            ..Default::default()
        }
    }

    #[test]
    fn violation_examples() {
        let ok = Trajectory { rows: (0..10).map(|k| row(k, &[21.0, 22.0], 20.0, 24.0)).collect() };
        assert_eq!(worst_zone_violation(&ok), 0.0);
        let mut one = ok.clone();
        one.rows[3].zone[0] = 19.0;
        assert!((zone_violations(&one)[0] - 0.1).abs() < 1e-15);
        let mut two = ok.clone();
        two.rows[0].zone[0] = 19.5; // 0.05
        two.rows[1].zone[1] = 26.0; // 0.2
        assert!((worst_zone_violation(&two) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn delta_formula() {
        assert!((cost_delta_percent(136.64, 183.39) - 25.49).abs() < 5e-3);
        assert_eq!(cost_delta_percent(10.0, 10.0), 0.0);
        assert_eq!(cost_delta_percent(0.0, 0.0), 0.0);
        assert_eq!(cost_delta_percent(-2.0, -1.0), 100.0);
    }

    #[test]
    fn report_identity_and_reward() {
        let mut traj = Trajectory { rows: (0..432).map(|k| row(k, &[21.0], 20.0, 24.0)).collect() };
        for r in &mut traj.rows[325..328] {
            r.grid = 5.0;
        }
        let p = DrProgram::winter_reference();
        let rep = MetricsReport::from_trajectory(&traj, &p);
        assert_eq!(rep.dr_reward, 8.0);
        assert_eq!(rep.dr_fulfilled, 2);
        assert_eq!(rep.overall_cost, rep.energy_cost - 8.0);
    }

    #[test]
    fn rejects_malformed() {
        assert!(Trajectory::read_csv("k,price\n0,1\n".as_bytes()).is_err());
        let mut buf = Vec::new();
        Trajectory { rows: vec![row(0, &[21.0], 20.0, 24.0)] }.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replace("21", "x");
        assert!(Trajectory::read_csv(text.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn csv_roundtrip(temps in proptest::collection::vec(proptest::collection::vec(10.0f64..30.0, 3), 1..20)) {
            let traj = Trajectory { rows: temps.iter().enumerate().map(|(k, t)| row(k, t, 20.0, 24.0)).collect() };
            let mut buf = Vec::new();
            traj.write_csv(&mut buf).unwrap();
            let back = Trajectory::read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(&back, &traj);
            prop_assert_eq!(
                MetricsReport::from_trajectory(&back, &DrProgram::default()),
                MetricsReport::from_trajectory(&traj, &DrProgram::default())
            );
        }
    }
}
