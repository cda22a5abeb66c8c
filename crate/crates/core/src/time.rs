//! Discrete time bookkeeping.
//!
//! Index `k` corresponds to wall-clock time `k * tau_s` seconds after
//! midnight of the first simulated day.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    /// Sampling period in seconds.
    pub tau_s: f64,
    /// First index of the experiment.
    pub start: usize,
    /// Number of steps simulated.
    pub steps: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            tau_s: 600.0,
            start: 0,
            steps: 432,
        }
    }
}

impl TimeGrid {
    pub fn new(tau_s: f64, start: usize, steps: usize) -> Result<Self> {
        let grid = Self { tau_s, start, steps };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_s.is_finite() && self.tau_s > 0.0) {
            return Err(Error::param("grid.tau_s", "must be positive"));
        }
        if self.steps == 0 {
            return Err(Error::param("grid.steps", "must be at least 1"));
        }
        Ok(())
    }

    /// Seconds elapsed since midnight at index `k`.
    pub fn seconds_of_day(&self, k: usize) -> f64 {
        (k as f64 * self.tau_s).rem_euclid(SECONDS_PER_DAY)
    }

    pub fn hour_of_day(&self, k: usize) -> f64 {
        self.seconds_of_day(k) / 3600.0
    }

    /// Number of whole steps covering `hours` (rounded to nearest).
    pub fn steps_for_hours(&self, hours: f64) -> usize {
        (hours * 3600.0 / self.tau_s).round() as usize
    }

    pub fn steps_per_day(&self) -> usize {
        self.steps_for_hours(24.0)
    }

    /// Step duration in hours, used to turn kW into kWh per step.
    pub fn step_hours(&self) -> f64 {
        self.tau_s / 3600.0
    }

    pub fn indices(&self) -> Range<usize> {
        self.start..self.start + self.steps
    }
}

/// The half-open index set `{k, ..., k + len - 1}`.
pub fn interval(k: usize, len: usize) -> Result<Range<usize>> {
    if len == 0 {
        return Err(Error::EmptyInterval);
    }
    Ok(k..k + len)
}

pub fn intervals_disjoint(a: &Range<usize>, b: &Range<usize>) -> bool {
    a.end <= b.start || b.end <= a.start
}

/// True when `inner` is a subset of `outer`.
pub fn interval_contains(outer: &Range<usize>, inner: &Range<usize>) -> bool {
    inner.start >= outer.start && inner.end <= outer.end
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn interval_examples() {
        assert_eq!(interval(0, 1).unwrap().collect::<Vec<_>>(), vec![0]);
        assert_eq!(
            interval(107, 5).unwrap().collect::<Vec<_>>(),
            vec![107, 108, 109, 110, 111]
        );
        assert_eq!(interval(5, 3).unwrap().collect::<Vec<_>>(), vec![5, 6, 7]);
        assert!(matches!(interval(3, 0), Err(Error::EmptyInterval)));
    }

    #[test]
    fn grid_clock() {
        let g = TimeGrid::default();
        assert_eq!(g.steps_per_day(), 144);
        assert_eq!(g.hour_of_day(60), 10.0);
        assert_eq!(g.hour_of_day(144 + 18), 3.0);
        assert!(TimeGrid::new(0.0, 0, 1).is_err());
        assert!(TimeGrid::new(600.0, 0, 0).is_err());
    }

    proptest! {
        #[test]
        fn interval_has_len_elements(k in 0usize..10_000, len in 1usize..500) {
            prop_assert_eq!(interval(k, len).unwrap().count(), len);
        }

        #[test]
        fn disjointness_matches_set_intersection(
            a in 0usize..60, la in 1usize..20, b in 0usize..60, lb in 1usize..20
        ) {
            let ia = interval(a, la).unwrap();
            let ib = interval(b, lb).unwrap();
            let sa: BTreeSet<_> = ia.clone().collect();
            let sb: BTreeSet<_> = ib.clone().collect();
            prop_assert_eq!(intervals_disjoint(&ia, &ib), sa.is_disjoint(&sb));
            prop_assert_eq!(interval_contains(&ia, &ib), sb.is_subset(&sa));
        }
    }
}
