//! Forecasts of the exogenous inputs with synthetic, lead-time dependent
//! errors driven by second-order autoregressive noise.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::series::Exogenous;

/// `d(k) = a1·d(k-1) + a2·d(k-2) + σ·ε(k)` with standard normal `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar2Noise {
    pub a1: f64,
    pub a2: f64,
    pub sigma: f64,
}

impl Ar2Noise {
    pub const DEFAULT_A1: f64 = 1.4;
    pub const DEFAULT_A2: f64 = -0.45;

    pub fn new(a1: f64, a2: f64, sigma: f64) -> Result<Self> {
        // Stability triangle of z² - a1 z - a2.
        if !(a2.abs() < 1.0 && a1 + a2 < 1.0 && a2 - a1 < 1.0) {
            return Err(Error::UnstableNoise { a1, a2 });
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::param("noise.sigma", "must be finite and nonnegative"));
        }
        Ok(Self { a1, a2, sigma })
    }

    /// Default coefficients with σ scaled so the 90th percentile of
    /// `max |d|` over `len` steps equals `envelope`.
    pub fn calibrated(envelope: f64, len: usize) -> Self {
        let unit = Ar2Noise { a1: Self::DEFAULT_A1, a2: Self::DEFAULT_A2, sigma: 1.0 };
        let q = unit.max_abs_quantile(len, 0.9, 4000, 0x5eed);
        Self { sigma: envelope / q, ..unit }
    }

    /// Empirical quantile of `max |d|` over paths of `len` steps.
    pub fn max_abs_quantile(&self, len: usize, q: f64, paths: usize, seed: u64) -> f64 {
        let mut rng = substream(seed, "ar2-calibration", 0);
        let mut maxima: Vec<f64> = (0..paths)
            .map(|_| self.path(len, &mut rng).iter().fold(0.0, |m: f64, d| m.max(d.abs())))
            .collect();
        maxima.sort_by(f64::total_cmp);
        maxima[((q * paths as f64).ceil() as usize).clamp(1, paths) - 1]
    }

    /// A path of `n` values from zero initial state.
    pub fn path<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let (mut d1, mut d2) = (0.0, 0.0);
        (0..n)
            .map(|_| {
                let eps: f64 = StandardNormal.sample(rng);
                let d = self.a1 * d1 + self.a2 * d2 + self.sigma * eps;
                d2 = d1;
                d1 = d;
                d
            })
            .collect()
    }
}

/// Free function form of [`Ar2Noise::path`].
pub fn ar2_path<R: Rng + ?Sized>(noise: &Ar2Noise, n: usize, rng: &mut R) -> Vec<f64> {
    noise.path(n, rng)
}

fn ramp(j: usize, len: usize) -> f64 {
    j as f64 / len as f64
}

/// `T̂(k+j) = T(k+j) + d(j)·j/λ` over a horizon of `truth.len()` steps.
pub fn temperature_forecast(truth: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    check(truth.len(), d.len())?;
    let n = truth.len();
    Ok(truth.iter().zip(d).enumerate().map(|(j, (t, e))| t + e * ramp(j, n)).collect())
}

/// `Î(k+j) = I(k+j)·max(0, 1 + d(j)·j/λ)`.
pub fn irradiance_forecast(truth: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    check(truth.len(), d.len())?;
    let n = truth.len();
    Ok(truth.iter().zip(d).enumerate().map(|(j, (i, e))| i * (1.0 + e * ramp(j, n)).max(0.0)).collect())
}

/// `Ĝ(k+j) = max(0, G(k+j) + d(j)·j/λ)`.
pub fn gains_forecast(truth: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    check(truth.len(), d.len())?;
    let n = truth.len();
    Ok(truth.iter().zip(d).enumerate().map(|(j, (g, e))| (g + e * ramp(j, n)).max(0.0)).collect())
}

fn check(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { expected: a, found: b });
    }
    Ok(())
}

/// Which inputs are forecast with error, and the noise of each.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Uncertainty {
    pub temperature: Option<Ar2Noise>,
    pub irradiance: Option<Ar2Noise>,
    pub gains: Option<Ar2Noise>,
}

impl Uncertainty {
    pub fn is_nominal(&self) -> bool {
        [self.temperature, self.irradiance, self.gains]
            .iter()
            .all(|n| n.is_none_or(|n| n.sigma == 0.0))
    }
}

/// Forecast of the exogenous inputs over a horizon, `[j]` for step `k+j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastBundle {
    pub ta: Vec<f64>,
    pub irr: Vec<f64>,
    /// Per step, per zone.
    pub gains: Vec<Vec<f64>>,
}

impl ForecastBundle {
    /// Exact forecast.
    pub fn perfect(truth: &[Exogenous]) -> Self {
        Self {
            ta: truth.iter().map(|e| e.ta).collect(),
            irr: truth.iter().map(|e| e.irr).collect(),
            gains: truth.iter().map(|e| e.gains.clone()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ta.is_empty()
    }

    pub fn at(&self, j: usize) -> Exogenous {
        Exogenous { ta: self.ta[j], irr: self.irr[j], gains: self.gains[j].clone() }
    }

    /// Forecast with fresh error paths for each enabled source; the paths of
    /// different zones' gains are independent.
    pub fn perturbed<R: Rng + ?Sized>(truth: &[Exogenous], unc: &Uncertainty, rng: &mut R) -> Result<Self> {
        let mut f = Self::perfect(truth);
        let n = truth.len();
        if let Some(noise) = unc.temperature {
            f.ta = temperature_forecast(&f.ta, &noise.path(n, rng))?;
        }
        if let Some(noise) = unc.irradiance {
            f.irr = irradiance_forecast(&f.irr, &noise.path(n, rng))?;
        }
        if let Some(noise) = unc.gains {
            let zones = truth.first().map_or(0, |e| e.gains.len());
            for i in 0..zones {
                let col: Vec<f64> = f.gains.iter().map(|g| g[i]).collect();
                let hat = gains_forecast(&col, &noise.path(n, rng))?;
                for (row, g) in f.gains.iter_mut().zip(hat) {
                    row[i] = g;
                }
            }
        }
        Ok(f)
    }
}
