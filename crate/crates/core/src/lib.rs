//! Building, storage and forecast models for integrated HVAC/storage
//! predictive control under price-volume demand response.

pub mod baseline;
pub mod comfort;
pub mod config;
pub mod devices;
pub mod dr;
pub mod error;
pub mod forecast;
pub mod identify;
pub mod metrics;
pub mod params;
pub mod plant;
pub mod rng;
pub mod scenario;
pub mod series;
pub mod synth;
pub mod sysid;
pub mod time;

pub use comfort::{ComfortSchedule, Mode, ZoneClass};
pub use error::{Error, Result};
pub use params::{DeviceParams, ZoneParams};
pub use plant::{EnergyLedger, Measurements, Plant, PlantParams, PlantState, StepDecision};
pub use series::{Exogenous, PriceSeries};
pub use time::TimeGrid;
