//! Exogenous input series and the weather/price CSV format.
//!
//! The CSV has a fixed header `k,TA_degC,I_Wm2,price_eur_kwh` and one record
//! per step with consecutive indices starting at zero.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WEATHER_HEADER: [&str; 4] = ["k", "TA_degC", "I_Wm2", "price_eur_kwh"];

/// Exogenous conditions for one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exogenous {
    /// Outdoor air temperature, °C.
    pub ta: f64,
    /// Global irradiance, W/m².
    pub irr: f64,
    /// Internal gains per zone, kW.
    pub gains: Vec<f64>,
}

impl Exogenous {
    pub fn validate(&self) -> Result<()> {
        if !self.ta.is_finite() || !self.irr.is_finite() || self.gains.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("exogenous inputs"));
        }
        if self.irr < 0.0 {
            return Err(Error::param("exogenous.irr", "irradiance must be nonnegative"));
        }
        if self.gains.iter().any(|&g| g < 0.0) {
            return Err(Error::param("exogenous.gains", "internal gains must be nonnegative"));
        }
        Ok(())
    }
}

/// Energy price per step, currency per kWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries(Vec<f64>);

impl PriceSeries {
    pub fn new(prices: Vec<f64>) -> Result<Self> {
        if let Some(k) = prices.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::param(format!("price[{k}]"), "must be finite and nonnegative"));
        }
        Ok(Self(prices))
    }

    pub fn at(&self, k: usize) -> f64 {
        self.0[k.min(self.0.len() - 1)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherRecord {
    pub k: usize,
    pub ta: f64,
    pub irr: f64,
    pub price: f64,
}

/// Parse the weather/price CSV.
pub fn read_weather_csv<R: Read>(reader: R) -> Result<Vec<WeatherRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() != WEATHER_HEADER.len() || header.iter().zip(WEATHER_HEADER).any(|(a, b)| a != b) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", WEATHER_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let line = n + 2;
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::Parse { line, message: format!("expected 4 fields, got {}", rec.len()) });
        }
        let field = |i: usize| -> Result<f64> {
            let v: f64 = rec[i].parse().map_err(|_| Error::Parse {
                line,
                message: format!("`{}` is not a number", &rec[i]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { line, message: format!("non-finite {}", WEATHER_HEADER[i]) });
            }
            Ok(v)
        };
        let k: usize = rec[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("`{}` is not a step index", &rec[0]),
        })?;
        if k != out.len() {
            return Err(Error::Parse { line, message: format!("expected k = {}, found {k}", out.len()) });
        }
        let (ta, irr, price) = (field(1)?, field(2)?, field(3)?);
        if irr < 0.0 {
            return Err(Error::Parse { line, message: "negative irradiance".into() });
        }
        if price < 0.0 {
            return Err(Error::Parse { line, message: "negative price".into() });
        }
        out.push(WeatherRecord { k, ta, irr, price });
    }
    Ok(out)
}

pub fn write_weather_csv<W: Write>(writer: W, records: &[WeatherRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(WEATHER_HEADER)?;
    for r in records {
        w.write_record(&[r.k.to_string(), r.ta.to_string(), r.irr.to_string(), r.price.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_and_rejects() {
        let ok = "k,TA_degC,I_Wm2,price_eur_kwh\n0,1.5,0,0.1\n1,2.0,120.5,0.12\n";
        let recs = read_weather_csv(ok.as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].irr, 120.5);

        let bad_header = "k,T,I,p\n0,1,0,0\n";
        assert!(matches!(read_weather_csv(bad_header.as_bytes()), Err(Error::Parse { line: 1, .. })));
        let gap = "k,TA_degC,I_Wm2,price_eur_kwh\n0,1,0,0\n2,1,0,0\n";
        assert!(matches!(read_weather_csv(gap.as_bytes()), Err(Error::Parse { line: 3, .. })));
        let neg = "k,TA_degC,I_Wm2,price_eur_kwh\n0,1,-3,0\n";
        assert!(read_weather_csv(neg.as_bytes()).is_err());
        let nan = "k,TA_degC,I_Wm2,price_eur_kwh\n0,NaN,3,0\n";
        assert!(read_weather_csv(nan.as_bytes()).is_err());
    }

    #[test]
    fn price_series_rejects_negative() {
        assert!(PriceSeries::new(vec![0.1, -0.1]).is_err());
        assert_eq!(PriceSeries::new(vec![0.1, 0.2]).unwrap().at(7), 0.2);
    }

    proptest! {
        #[test]
        fn roundtrip(rows in proptest::collection::vec((-30.0f64..45.0, 0.0f64..1200.0, 0.0f64..1.0), 1..50)) {
            let recs: Vec<_> = rows.iter().enumerate()
                .map(|(k, &(ta, irr, price))| WeatherRecord { k, ta, irr, price })
                .collect();
            let mut buf = Vec::new();
            write_weather_csv(&mut buf, &recs).unwrap();
            prop_assert_eq!(read_weather_csv(buf.as_slice()).unwrap(), recs);
        }
    }
}
