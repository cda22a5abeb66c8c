//! Price-volume demand-response programs and their settlement.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::{interval, interval_contains, intervals_disjoint};

/// Keep grid consumption over `start .. start + len` at or below `cap`
/// kWh to earn `reward`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrRequest {
    pub start: usize,
    pub len: usize,
    pub cap: f64,
    pub reward: f64,
}

impl DrRequest {
    pub fn window(&self) -> Range<usize> {
        self.start..self.start + self.len
    }

    pub fn validate(&self) -> Result<()> {
        interval(self.start, self.len)?;
        if !(self.cap >= 0.0 && self.cap.is_finite()) {
            return Err(Error::param("dr.cap", "must be finite and nonnegative"));
        }
        if !(self.reward >= 0.0 && self.reward.is_finite()) {
            return Err(Error::param("dr.reward", "must be finite and nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DrProgram {
    pub requests: Vec<DrRequest>,
}

impl DrProgram {
    pub fn new(requests: Vec<DrRequest>) -> Result<Self> {
        let p = Self { requests };
        p.validate()?;
        Ok(p)
    }

    /// Three requests over a three-day winter horizon at 10-minute steps.
    pub fn winter_reference() -> Self {
        Self {
            requests: vec![
                DrRequest { start: 107, len: 5, cap: 37.0, reward: 3.6 },
                DrRequest { start: 178, len: 6, cap: 40.0, reward: 4.4 },
                DrRequest { start: 325, len: 3, cap: 6.0, reward: 2.8 },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (a, ra) in self.requests.iter().enumerate() {
            ra.validate()?;
            for (b, rb) in self.requests.iter().enumerate().skip(a + 1) {
                if !intervals_disjoint(&ra.window(), &rb.window()) {
                    return Err(Error::OverlappingRequests { first: a, second: b });
                }
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    /// Indices of requests whose window lies entirely in `k .. k + horizon`.
    pub fn contained(&self, k: usize, horizon: usize) -> Vec<usize> {
        let h = k..k + horizon;
        (0..self.requests.len())
            .filter(|&j| interval_contains(&h, &self.requests[j].window()))
            .collect()
    }

    /// Indices of requests that started before `k` and are still running.
    pub fn in_progress(&self, k: usize) -> Vec<usize> {
        (0..self.requests.len())
            .filter(|&j| {
                let w = self.requests[j].window();
                w.start < k && k < w.end
            })
            .collect()
    }

    pub fn total_reward(&self) -> f64 {
        self.requests.iter().map(|r| r.reward).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestStatus {
    Fulfilled,
    Missed,
    /// The realized record does not reach the end of the window.
    Pending,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settlement {
    pub status: Vec<RequestStatus>,
    /// Realized consumption over each window (partial when pending).
    pub consumption: Vec<f64>,
    pub reward: f64,
}

impl Settlement {
    pub fn fulfilled(&self) -> usize {
        self.status.iter().filter(|s| **s == RequestStatus::Fulfilled).count()
    }
}

/// Settle the program on realized grid consumption `grid[k]`.
pub fn dr_settlement(program: &DrProgram, grid: &[f64]) -> Settlement {
    let mut out = Settlement { status: Vec::new(), consumption: Vec::new(), reward: 0.0 };
    for r in &program.requests {
        let w = r.window();
        let used: f64 = grid[w.start.min(grid.len())..w.end.min(grid.len())].iter().sum();
        let status = if w.end > grid.len() {
            RequestStatus::Pending
        } else if used <= r.cap {
            out.reward += r.reward;
            RequestStatus::Fulfilled
        } else {
            RequestStatus::Missed
        };
        out.status.push(status);
        out.consumption.push(used);
    }
    out
}
