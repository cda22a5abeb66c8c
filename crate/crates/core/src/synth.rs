//! Synthetic weather, price and internal-gain profiles.
//!
//! Outdoor temperature is a diurnal sinusoid plus AR(1) noise; irradiance is
//! a clear-sky half-sine scaled by a per-day cloudiness factor; the price
//! has a morning and an evening peak over a cheap night.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::comfort::{Mode, ZoneClass};
use crate::rng::substream;
use crate::series::WeatherRecord;
use crate::time::TimeGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeatherProfile {
    pub ta_mean: f64,
    pub ta_amplitude: f64,
    /// Hour of the daily temperature maximum.
    pub ta_peak_hour: f64,
    pub ta_noise: f64,
    pub sunrise: f64,
    pub sunset: f64,
    /// Clear-sky irradiance at solar noon, W/m².
    pub irr_peak: f64,
    /// Lowest daily cloudiness factor; each day draws from `[min, 1]`.
    pub cloud_min: f64,
}

impl WeatherProfile {
    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Heating => Self {
                ta_mean: 3.0,
                ta_amplitude: 4.0,
                ta_peak_hour: 15.0,
                ta_noise: 0.3,
                sunrise: 7.5,
                sunset: 17.0,
                irr_peak: 450.0,
                cloud_min: 0.4,
            },
            Mode::Cooling => Self {
                ta_mean: 27.0,
                ta_amplitude: 5.5,
                ta_peak_hour: 15.0,
                ta_noise: 0.3,
                sunrise: 5.5,
                sunset: 20.5,
                irr_peak: 850.0,
                cloud_min: 0.6,
            },
        }
    }
}

impl Default for WeatherProfile {
    fn default() -> Self {
        Self::for_mode(Mode::Heating)
    }
}

/// Two-peak tariff, €/kWh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriceProfile {
    pub night: f64,
    pub morning_peak: f64,
    pub midday: f64,
    pub evening_peak: f64,
}

impl Default for PriceProfile {
    fn default() -> Self {
        Self { night: 0.045, morning_peak: 0.095, midday: 0.065, evening_peak: 0.11 }
    }
}

impl PriceProfile {
    pub fn at_hour(&self, h: f64) -> f64 {
        match h {
            h if !(6.0..23.0).contains(&h) => self.night,
            h if (7.0..11.0).contains(&h) => self.morning_peak,
            h if (17.0..21.0).contains(&h) => self.evening_peak,
            _ => self.midday,
        }
    }
}

pub fn weather(grid: &TimeGrid, profile: &WeatherProfile, prices: &PriceProfile, seed: u64) -> Vec<WeatherRecord> {
    let mut rng = substream(seed, "weather", 0);
    let noise = Normal::new(0.0, profile.ta_noise.max(0.0)).expect("finite noise");
    let days = grid.steps.div_ceil(grid.steps_per_day().max(1)) + 1;
    let clouds: Vec<f64> = (0..days).map(|_| rng.random_range(profile.cloud_min..=1.0)).collect();
    let mut ar = 0.0;
    (0..grid.steps)
        .map(|k| {
            let h = grid.hour_of_day(k);
            let day = (grid.start + k) * grid.tau_s as usize / 86_400;
            ar = 0.95 * ar + noise.sample(&mut rng);
            let phase = (h - profile.ta_peak_hour) / 24.0 * std::f64::consts::TAU;
            let ta = profile.ta_mean + profile.ta_amplitude * phase.cos() + ar;
            let irr = if h > profile.sunrise && h < profile.sunset {
                let x = (h - profile.sunrise) / (profile.sunset - profile.sunrise);
                profile.irr_peak * clouds[day.min(days - 1)] * (x * std::f64::consts::PI).sin()
            } else {
                0.0
            };
            WeatherRecord { k, ta, irr: irr.max(0.0), price: prices.at_hour(h) }
        })
        .collect()
}

/// Occupancy-driven internal gains, kW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GainProfile {
    pub occupied: f64,
    pub unoccupied: f64,
    /// Relative spread of the occupied level between steps.
    pub jitter: f64,
}

impl Default for GainProfile {
    fn default() -> Self {
        Self { occupied: 0.35, unoccupied: 0.05, jitter: 0.15 }
    }
}

/// Gains per step, per zone.
pub fn gains(grid: &TimeGrid, classes: &[ZoneClass], profile: &GainProfile, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = substream(seed, "gains", 0);
    (0..grid.steps)
        .map(|k| {
            let h = grid.hour_of_day(k);
            classes
                .iter()
                .map(|c| {
                    if c.occupied(h) {
                        let j = rng.random_range(-profile.jitter..=profile.jitter);
                        (profile.occupied * (1.0 + j)).max(0.0)
                    } else {
                        profile.unoccupied
                    }
                })
                .collect()
        })
        .collect()
}
