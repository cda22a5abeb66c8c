//! Zone classes, operating modes and comfort schedules.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::TimeGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZoneClass {
    Commercial,
    Office,
    Residential,
}

impl ZoneClass {
    pub const ALL: [ZoneClass; 3] = [ZoneClass::Commercial, ZoneClass::Office, ZoneClass::Residential];

    pub fn as_str(self) -> &'static str {
        match self {
            ZoneClass::Commercial => "commercial",
            ZoneClass::Office => "office",
            ZoneClass::Residential => "residential",
        }
    }

    /// Whether the tight comfort band applies at `hour` (0..24).
    pub fn occupied(self, hour: f64) -> bool {
        match self {
            ZoneClass::Commercial | ZoneClass::Office => (8.0..18.0).contains(&hour),
            ZoneClass::Residential => {
                (7.0..9.0).contains(&hour) || hour >= 19.0 || hour < 1.0
            }
        }
    }
}

impl FromStr for ZoneClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "commercial" => Ok(ZoneClass::Commercial),
            "office" => Ok(ZoneClass::Office),
            "residential" => Ok(ZoneClass::Residential),
            _ => Err(Error::UnknownZoneClass(s.to_string())),
        }
    }
}

impl fmt::Display for ZoneClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Heating,
    Cooling,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "heating" => Ok(Mode::Heating),
            "cooling" => Ok(Mode::Cooling),
            other => Err(Error::param("mode", format!("`{other}` is not heating|cooling"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Heating => "heating",
            Mode::Cooling => "cooling",
        })
    }
}

/// Comfort band `(lower, upper)` in °C for a zone class at `hour` of day.
pub fn schedule_bounds(class: ZoneClass, hour: f64, mode: Mode) -> (f64, f64) {
    let occupied = class.occupied(hour.rem_euclid(24.0));
    match (mode, occupied) {
        (Mode::Heating, true) => (20.0, 24.0),
        (Mode::Heating, false) => (15.0, 24.0),
        (Mode::Cooling, true) => (22.0, 24.0),
        (Mode::Cooling, false) => (22.0, 28.0),
    }
}

/// Same as [`schedule_bounds`] for a class given by name.
pub fn schedule_bounds_named(class: &str, hour: f64, mode: Mode) -> Result<(f64, f64)> {
    Ok(schedule_bounds(class.parse()?, hour, mode))
}

/// Per-zone, per-step comfort bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ComfortSchedule {
    lower: Vec<Vec<f64>>,
    upper: Vec<Vec<f64>>,
}

impl ComfortSchedule {
    /// `lower[i][k]`, `upper[i][k]` for zone `i` at step `k`.
    pub fn new(lower: Vec<Vec<f64>>, upper: Vec<Vec<f64>>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::LengthMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.len() != hi.len() {
                return Err(Error::LengthMismatch {
                    expected: lo.len(),
                    found: hi.len(),
                });
            }
            if let Some(k) = lo.iter().zip(hi).position(|(l, h)| !(l <= h)) {
                return Err(Error::param(
                    format!("schedule[{i}][{k}]"),
                    "lower bound exceeds upper bound",
                ));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Sample the class schedules on `len` grid points starting at index 0.
    pub fn from_classes(grid: &TimeGrid, classes: &[ZoneClass], mode: Mode, len: usize) -> Self {
        let (lower, upper) = classes
            .iter()
            .map(|&c| {
                (0..len)
                    .map(|k| schedule_bounds(c, grid.hour_of_day(k), mode))
                    .unzip::<_, _, Vec<_>, Vec<_>>()
            })
            .unzip();
        Self { lower, upper }
    }

    pub fn zones(&self) -> usize {
        self.lower.len()
    }

    pub fn len(&self) -> usize {
        self.lower.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lower(&self, zone: usize, k: usize) -> f64 {
        self.lower[zone][k.min(self.len() - 1)]
    }

    pub fn upper(&self, zone: usize, k: usize) -> f64 {
        self.upper[zone][k.min(self.len() - 1)]
    }

    /// Schedule used by a thermostat that pre-conditions `lead` steps ahead:
    /// the comfort side of the band takes the tighter of now and `k + lead`.
    pub fn lead_shifted(&self, lead: usize, mode: Mode) -> Self {
        let n = self.len();
        let shift = |rows: &Vec<Vec<f64>>, pick: fn(f64, f64) -> f64| -> Vec<Vec<f64>> {
            rows.iter()
                .map(|r| (0..n).map(|k| pick(r[k], r[(k + lead).min(n - 1)])).collect())
                .collect()
        };
        match mode {
            Mode::Heating => Self {
                lower: shift(&self.lower, f64::max),
                upper: self.upper.clone(),
            },
            Mode::Cooling => Self {
                lower: self.lower.clone(),
                upper: shift(&self.upper, f64::min),
            },
        }
    }

    /// Tighten every band by `margin` on both sides (never crossing).
    pub fn tightened(&self, margin: f64) -> Self {
        let mut out = self.clone();
        for (lo, hi) in out.lower.iter_mut().zip(out.upper.iter_mut()) {
            for (l, h) in lo.iter_mut().zip(hi.iter_mut()) {
                let mid = 0.5 * (*l + *h);
                *l = (*l + margin).min(mid);
                *h = (*h - margin).max(mid);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn documented_schedule_examples() {
        assert_eq!(schedule_bounds(ZoneClass::Office, 10.0, Mode::Heating), (20.0, 24.0));
        assert_eq!(schedule_bounds(ZoneClass::Office, 3.0, Mode::Heating), (15.0, 24.0));
        assert_eq!(schedule_bounds(ZoneClass::Residential, 20.0, Mode::Cooling), (22.0, 24.0));
        assert_eq!(schedule_bounds(ZoneClass::Residential, 0.5, Mode::Heating), (20.0, 24.0));
        assert_eq!(schedule_bounds(ZoneClass::Residential, 1.0, Mode::Heating), (15.0, 24.0));
        assert_eq!(schedule_bounds(ZoneClass::Commercial, 18.0, Mode::Cooling), (22.0, 28.0));
        assert!(matches!(
            schedule_bounds_named("warehouse", 1.0, Mode::Heating),
            Err(Error::UnknownZoneClass(_))
        ));
    }

    #[test]
    fn bound_change_lands_on_first_grid_point_at_or_after() {
        // 25-minute grid: 8:00 is not a grid point; 8:20 (k=20) is the first at/after.
        let grid = TimeGrid::new(1500.0, 0, 100).unwrap();
        let s = ComfortSchedule::from_classes(&grid, &[ZoneClass::Office], Mode::Heating, 100);
        assert_eq!(s.lower(0, 19), 15.0);
        assert_eq!(s.lower(0, 20), 20.0);
    }

    #[test]
    fn lead_shift_preheats() {
        let grid = TimeGrid::default();
        let s = ComfortSchedule::from_classes(&grid, &[ZoneClass::Office], Mode::Heating, 200);
        let lead = s.lead_shifted(12, Mode::Heating);
        assert_eq!(lead.lower(0, 35), 15.0);
        assert_eq!(lead.lower(0, 36), 20.0); // 6:00 with 2 h lead
        assert_eq!(lead.lower(0, 108), 15.0); // falls at 18:00 as usual
    }

    #[test]
    fn rejects_crossed_bounds() {
        assert!(ComfortSchedule::new(vec![vec![25.0]], vec![vec![24.0]]).is_err());
    }

    proptest! {
        #[test]
        fn bounds_ordered_and_daily_periodic(hour in 0.0f64..24.0, c in 0usize..3, heat in any::<bool>()) {
            let mode = if heat { Mode::Heating } else { Mode::Cooling };
            let class = ZoneClass::ALL[c];
            let (lo, hi) = schedule_bounds(class, hour, mode);
            prop_assert!(lo <= hi);
            prop_assert_eq!(schedule_bounds(class, hour + 24.0, mode), (lo, hi));
        }
    }
}
