//! Identification of the controller's regressive models and FIT scoring.
//!
//! A model of order `n` in some signal uses its values at lags `0..=n`
//! relative to the current step. Each zone row depends on its own
//! temperature, its neighbors' temperatures, its own fan-coil heat and the
//! exogenous vector `[T^A, I, I², I·T^A, G_i]`.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExoKind {
    Ta,
    Irr,
    Irr2,
    IrrTa,
    Gain,
}

impl ExoKind {
    pub const ALL: [ExoKind; 5] = [ExoKind::Ta, ExoKind::Irr, ExoKind::Irr2, ExoKind::IrrTa, ExoKind::Gain];

    pub fn value(self, ta: f64, irr: f64, gain: f64) -> f64 {
        match self {
            ExoKind::Ta => ta,
            ExoKind::Irr => irr,
            ExoKind::Irr2 => irr * irr,
            ExoKind::IrrTa => irr * ta,
            ExoKind::Gain => gain,
        }
    }
}

/// One regressor of a zone row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZoneTerm {
    Temp { zone: usize, lag: usize },
    Heat { lag: usize },
    Exo { exo: ExoKind, lag: usize },
}

impl ZoneTerm {
    pub fn lag(self) -> usize {
        match self {
            ZoneTerm::Temp { lag, .. } | ZoneTerm::Heat { lag } | ZoneTerm::Exo { lag, .. } => lag,
        }
    }

    pub fn name(self, row: usize) -> String {
        match self {
            ZoneTerm::Temp { zone, lag } => format!("T{zone}[k-{lag}]"),
            ZoneTerm::Heat { lag } => format!("h{row}[k-{lag}]"),
            ZoneTerm::Exo { exo: ExoKind::Gain, lag } => format!("G{row}[k-{lag}]"),
            ZoneTerm::Exo { exo, lag } => format!("{exo:?}[k-{lag}]"),
        }
    }
}

/// Regressor of a loop model (heating tank or chilled-water return).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LoopTerm {
    /// The modeled loop temperature itself.
    Loop { lag: usize },
    /// Heat pump outlet temperature.
    Outlet { lag: usize },
    /// Sum of fan-coil heat flows over all zones.
    TotalHeat { lag: usize },
}

impl LoopTerm {
    pub fn lag(self) -> usize {
        match self {
            LoopTerm::Loop { lag } | LoopTerm::Outlet { lag } | LoopTerm::TotalHeat { lag } => lag,
        }
    }

    pub fn name(self) -> String {
        match self {
            LoopTerm::Loop { lag } => format!("loop[k-{lag}]"),
            LoopTerm::Outlet { lag } => format!("outlet[k-{lag}]"),
            LoopTerm::TotalHeat { lag } => format!("sum_h[k-{lag}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegressorSpec {
    pub k_t: usize,
    pub k_h: usize,
    pub k_e: usize,
    pub k_loop: usize,
    pub k_outlet: usize,
    pub k_heat: usize,
    pub neighbors: Vec<Vec<usize>>,
}

impl RegressorSpec {
    /// Orders one everywhere.
    pub fn first_order(neighbors: Vec<Vec<usize>>) -> Self {
        Self { k_t: 1, k_h: 1, k_e: 1, k_loop: 1, k_outlet: 1, k_heat: 1, neighbors }
    }

    /// Controller default: first-order zone rows, static loop rows. The
    /// loop is a single well-mixed volume whose inlet already carries the
    /// pump delay, so further loop lags are collinear.
    pub fn controller_default(neighbors: Vec<Vec<usize>>) -> Self {
        Self { k_loop: 0, k_outlet: 0, k_heat: 0, ..Self::first_order(neighbors) }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.neighbors.len();
        for (i, ns) in self.neighbors.iter().enumerate() {
            for &j in ns {
                if j >= m || j == i || !self.neighbors[j].contains(&i) {
                    return Err(Error::param(format!("neighbors[{i}]"), format!("bad or asymmetric entry {j}")));
                }
            }
        }
        Ok(())
    }

    pub fn zone_terms(&self, i: usize) -> Vec<ZoneTerm> {
        let mut terms: Vec<_> = (0..=self.k_t).map(|lag| ZoneTerm::Temp { zone: i, lag }).collect();
        for &j in &self.neighbors[i] {
            terms.extend((0..=self.k_t).map(|lag| ZoneTerm::Temp { zone: j, lag }));
        }
        terms.extend((0..=self.k_h).map(|lag| ZoneTerm::Heat { lag }));
        for exo in ExoKind::ALL {
            terms.extend((0..=self.k_e).map(|lag| ZoneTerm::Exo { exo, lag }));
        }
        terms
    }

    pub fn loop_terms(&self) -> Vec<LoopTerm> {
        let mut terms: Vec<_> = (0..=self.k_loop).map(|lag| LoopTerm::Loop { lag }).collect();
        terms.extend((0..=self.k_outlet).map(|lag| LoopTerm::Outlet { lag }));
        terms.extend((0..=self.k_heat).map(|lag| LoopTerm::TotalHeat { lag }));
        terms
    }

    pub fn max_zone_lag(&self) -> usize {
        self.k_t.max(self.k_h).max(self.k_e)
    }

    pub fn max_loop_lag(&self) -> usize {
        self.k_loop.max(self.k_outlet).max(self.k_heat)
    }
}

/// Zone temperature records, indexed `[k][zone]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ZoneData {
    pub temp: Vec<Vec<f64>>,
    pub heat: Vec<Vec<f64>>,
    pub ta: Vec<f64>,
    pub irr: Vec<f64>,
    pub gains: Vec<Vec<f64>>,
}

impl ZoneData {
    pub fn len(&self) -> usize {
        self.temp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temp.is_empty()
    }

    fn check(&self, zones: usize) -> Result<()> {
        let n = self.temp.len();
        for len in [self.heat.len(), self.ta.len(), self.irr.len(), self.gains.len()] {
            if len != n {
                return Err(Error::LengthMismatch { expected: n, found: len });
            }
        }
        for row in self.temp.iter().chain(&self.heat).chain(&self.gains) {
            if row.len() != zones {
                return Err(Error::LengthMismatch { expected: zones, found: row.len() });
            }
        }
        Ok(())
    }

    /// Value of a regressor for row `i` at step `k`.
    pub fn regressor(&self, term: ZoneTerm, i: usize, k: usize) -> f64 {
        let t = k - term.lag();
        match term {
            ZoneTerm::Temp { zone, .. } => self.temp[t][zone],
            ZoneTerm::Heat { .. } => self.heat[t][i],
            ZoneTerm::Exo { exo, .. } => exo.value(self.ta[t], self.irr[t], self.gains[t][i]),
        }
    }
}

/// Loop temperature records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoopData {
    pub loop_t: Vec<f64>,
    pub outlet: Vec<f64>,
    pub total_heat: Vec<f64>,
}

impl LoopData {
    pub fn regressor(&self, term: LoopTerm, k: usize) -> f64 {
        let t = k - term.lag();
        match term {
            LoopTerm::Loop { .. } => self.loop_t[t],
            LoopTerm::Outlet { .. } => self.outlet[t],
            LoopTerm::TotalHeat { .. } => self.total_heat[t],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneArxModel {
    pub spec: RegressorSpec,
    /// Coefficients of each zone row, aligned with `spec.zone_terms(i)`.
    pub theta: Vec<Vec<f64>>,
}

impl ZoneArxModel {
    pub fn zones(&self) -> usize {
        self.theta.len()
    }

    pub fn terms(&self, i: usize) -> Vec<ZoneTerm> {
        self.spec.zone_terms(i)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.theta.len() != self.spec.neighbors.len() {
            return Err(Error::LengthMismatch { expected: self.spec.neighbors.len(), found: self.theta.len() });
        }
        for (i, row) in self.theta.iter().enumerate() {
            let width = self.spec.zone_terms(i).len();
            if row.len() != width {
                return Err(Error::LengthMismatch { expected: width, found: row.len() });
            }
            if row.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite("zone model coefficients"));
            }
        }
        Ok(())
    }

    /// One-step prediction of zone `i` at `k + 1`.
    pub fn predict_row(&self, data: &ZoneData, i: usize, k: usize) -> f64 {
        self.terms(i)
            .iter()
            .zip(&self.theta[i])
            .map(|(&t, c)| c * data.regressor(t, i, k))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopArxModel {
    pub terms: Vec<LoopTerm>,
    pub theta: Vec<f64>,
}

impl LoopArxModel {
    pub fn validate(&self) -> Result<()> {
        if self.terms.len() != self.theta.len() {
            return Err(Error::LengthMismatch { expected: self.terms.len(), found: self.theta.len() });
        }
        if self.theta.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("loop model coefficients"));
        }
        Ok(())
    }

    pub fn max_lag(&self) -> usize {
        self.terms.iter().map(|t| t.lag()).max().unwrap_or(0)
    }

    pub fn predict(&self, data: &LoopData, k: usize) -> f64 {
        self.terms.iter().zip(&self.theta).map(|(&t, c)| c * data.regressor(t, k)).sum()
    }
}

/// Least squares with column equilibration and pivoted QR.
///
/// Columns whose pivot falls below `1e-10` relative to the largest are
/// reported by name.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>, names: &[String]) -> Result<DVector<f64>> {
    let (rows, cols) = a.shape();
    if rows < cols {
        return Err(Error::InsufficientData(format!("{rows} samples for {cols} regressors")));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("regression data"));
    }
    let scale: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    let zero: Vec<String> = (0..cols).filter(|&j| scale[j] == 0.0).map(|j| names[j].clone()).collect();
    if !zero.is_empty() {
        return Err(Error::Identifiability { columns: zero });
    }
    let mut scaled = a.clone();
    for (j, s) in scale.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    let qr = scaled.col_piv_qr();
    let r = qr.r();
    let mut order = DMatrix::from_fn(1, cols, |_, j| j as f64);
    qr.p().permute_columns(&mut order);
    let order: Vec<usize> = order.iter().map(|&x| x as usize).collect();
    let r00 = r[(0, 0)].abs();
    let rank = (0..cols).take_while(|&j| r[(j, j)].abs() > 1e-10 * r00).count();
    if rank < cols {
        let mut bad: Vec<usize> = order[rank..].to_vec();
        bad.sort_unstable();
        return Err(Error::Identifiability { columns: bad.into_iter().map(|j| names[j].clone()).collect() });
    }
    let qtb = qr.q().transpose() * b;
    let y = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::Identifiability { columns: names.to_vec() })?;
    let mut x = DVector::zeros(cols);
    for (pos, &j) in order.iter().enumerate() {
        x[j] = y[pos] / scale[j];
    }
    Ok(x)
}

/// Fit every zone row on targets `T(k+1)` for `k` in `range`.
pub fn fit_zone_model(data: &ZoneData, spec: &RegressorSpec, range: Range<usize>) -> Result<ZoneArxModel> {
    spec.validate()?;
    let m = spec.neighbors.len();
    data.check(m)?;
    let start = range.start.max(spec.max_zone_lag());
    let end = range.end.min(data.len().saturating_sub(1));
    if end <= start {
        return Err(Error::InsufficientData("estimation range shorter than the model lag".into()));
    }
    let theta = (0..m)
        .map(|i| {
            let terms = spec.zone_terms(i);
            let names: Vec<String> = terms.iter().map(|t| t.name(i)).collect();
            let a = DMatrix::from_fn(end - start, terms.len(), |r, c| data.regressor(terms[c], i, start + r));
            let b = DVector::from_fn(end - start, |r, _| data.temp[start + r + 1][i]);
            least_squares(&a, &b, &names).map(|x| x.iter().copied().collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(ZoneArxModel { spec: spec.clone(), theta })
}

/// Fit a loop model on targets at `k+1` for `k` in `range`.
pub fn fit_loop_model(data: &LoopData, spec: &RegressorSpec, range: Range<usize>) -> Result<LoopArxModel> {
    let n = data.loop_t.len();
    if data.outlet.len() != n || data.total_heat.len() != n {
        return Err(Error::LengthMismatch { expected: n, found: data.outlet.len().min(data.total_heat.len()) });
    }
    let terms = spec.loop_terms();
    let start = range.start.max(spec.max_loop_lag());
    let end = range.end.min(n.saturating_sub(1));
    if end <= start {
        return Err(Error::InsufficientData("estimation range shorter than the model lag".into()));
    }
    let names: Vec<String> = terms.iter().map(|t| t.name()).collect();
    let a = DMatrix::from_fn(end - start, terms.len(), |r, c| data.regressor(terms[c], start + r));
    let b = DVector::from_fn(end - start, |r, _| data.loop_t[start + r + 1]);
    let theta = least_squares(&a, &b, &names)?.iter().copied().collect();
    Ok(LoopArxModel { terms, theta })
}

/// Fit PVUSA coefficients on `[I, I², I·T^A]`.
pub fn fit_pvusa(irr: &[f64], ta: &[f64], pv: &[f64]) -> Result<[f64; 3]> {
    let n = irr.len();
    if ta.len() != n || pv.len() != n {
        return Err(Error::LengthMismatch { expected: n, found: ta.len().min(pv.len()) });
    }
    if n < 3 {
        return Err(Error::InsufficientData("PVUSA fit needs at least three samples".into()));
    }
    let a = DMatrix::from_fn(n, 3, |r, c| match c {
        0 => irr[r],
        1 => irr[r] * irr[r],
        _ => irr[r] * ta[r],
    });
    let names = ["I".to_string(), "I2".to_string(), "ITA".to_string()];
    let x = least_squares(&a, &DVector::from_column_slice(pv), &names)?;
    Ok([x[0], x[1], x[2]])
}

/// Iterate the zone model `n` steps from `k0`, feeding back its own
/// temperatures while taking heat and exogenous inputs from `data`.
/// Returns predictions for steps `k0+1 ..= k0+n`, indexed `[step][zone]`.
pub fn simulate_zone(model: &ZoneArxModel, data: &ZoneData, k0: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    let lag = model.spec.max_zone_lag();
    if k0 < lag {
        return Err(Error::InsufficientData(format!("history needs {lag} steps before k0")));
    }
    let inputs = data.heat.len().min(data.ta.len()).min(data.irr.len()).min(data.gains.len());
    if k0 >= data.temp.len() || k0 + n > inputs {
        return Err(Error::InsufficientData("inputs do not cover the simulation".into()));
    }
    let m = model.zones();
    let mut work = ZoneData {
        temp: data.temp[k0 - lag..=k0].to_vec(),
        heat: data.heat[k0 - lag..k0 + n].to_vec(),
        ta: data.ta[k0 - lag..k0 + n].to_vec(),
        irr: data.irr[k0 - lag..k0 + n].to_vec(),
        gains: data.gains[k0 - lag..k0 + n].to_vec(),
    };
    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        let k = lag + s;
        let next: Vec<f64> = (0..m).map(|i| model.predict_row(&work, i, k)).collect();
        work.temp.push(next.clone());
        out.push(next);
    }
    Ok(out)
}

/// Same as [`simulate_zone`] for a loop model.
pub fn simulate_loop(model: &LoopArxModel, data: &LoopData, k0: usize, n: usize) -> Result<Vec<f64>> {
    let lag = model.max_lag();
    if k0 < lag || k0 + n > data.loop_t.len() {
        return Err(Error::InsufficientData("history or inputs do not cover the simulation".into()));
    }
    let mut work = LoopData {
        loop_t: data.loop_t[k0 - lag..=k0].to_vec(),
        outlet: data.outlet[k0 - lag..k0 + n].to_vec(),
        total_heat: data.total_heat[k0 - lag..k0 + n].to_vec(),
    };
    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        let next = model.predict(&work, lag + s);
        work.loop_t.push(next);
        out.push(next);
    }
    Ok(out)
}

/// Best-fit index in percent.
pub fn fit_index(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(Error::LengthMismatch { expected: y.len(), found: y_hat.len() });
    }
    if y.len() < 2 {
        return Err(Error::InsufficientData("FIT needs at least two samples".into()));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let dev: f64 = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>().sqrt();
    if dev == 0.0 {
        return Err(Error::ConstantSeries);
    }
    let res: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    Ok(100.0 * (1.0 - res / dev))
}

/// FIT of `depth`-step-ahead predictions started at every admissible `k0`
/// in `range`, one value per zone.
pub fn zone_fit_at_depth(model: &ZoneArxModel, data: &ZoneData, range: Range<usize>, depth: usize) -> Result<Vec<f64>> {
    let m = model.zones();
    let lag = model.spec.max_zone_lag();
    let starts: Vec<usize> = (range.start.max(lag)..range.end)
        .filter(|&k0| k0 + depth < data.len() && k0 + depth < range.end + 1)
        .collect();
    if starts.len() < 2 {
        return Err(Error::InsufficientData(format!("validation range too short for depth {depth}")));
    }
    let mut y = vec![Vec::with_capacity(starts.len()); m];
    let mut y_hat = vec![Vec::with_capacity(starts.len()); m];
    for &k0 in &starts {
        let pred = simulate_zone(model, data, k0, depth)?;
        for i in 0..m {
            y[i].push(data.temp[k0 + depth][i]);
            y_hat[i].push(pred[depth - 1][i]);
        }
    }
    (0..m).map(|i| fit_index(&y[i], &y_hat[i])).collect()
}

/// FIT of `depth`-step-ahead loop predictions over `range`.
pub fn loop_fit_at_depth(model: &LoopArxModel, data: &LoopData, range: Range<usize>, depth: usize) -> Result<f64> {
    let lag = model.max_lag();
    let (mut y, mut y_hat) = (Vec::new(), Vec::new());
    for k0 in range.start.max(lag)..range.end {
        if k0 + depth >= data.loop_t.len() || k0 + depth > range.end {
            break;
        }
        y.push(data.loop_t[k0 + depth]);
        y_hat.push(simulate_loop(model, data, k0, depth)?[depth - 1]);
    }
    fit_index(&y, &y_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn chain(m: usize) -> Vec<Vec<usize>> {
        (0..m)
            .map(|i| [i.checked_sub(1), (i + 1 < m).then_some(i + 1)].into_iter().flatten().collect())
            .collect()
    }

    /// Generate data from a known model with random inputs.
    fn generate(model: &ZoneArxModel, n: usize, sigma: f64, seed: u64) -> ZoneData {
        let m = model.zones();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma.max(1e-300)).unwrap();
        let mut d = ZoneData::default();
        for k in 0..n {
            d.ta.push(5.0 + 5.0 * (k as f64 / 30.0).sin() + rng.random_range(-1.0..1.0));
            d.irr.push((400.0 * (k as f64 / 20.0).sin()).max(0.0) * rng.random_range(0.5..1.0));
            d.gains.push((0..m).map(|_| rng.random_range(0.0..0.5)).collect());
            d.heat.push((0..m).map(|_| if rng.random_bool(0.5) { rng.random_range(0.0..3.0) } else { 0.0 }).collect());
        }
        d.temp.push(vec![18.0; m]);
        d.temp.push(vec![18.0; m]);
        for k in 1..n - 1 {
            let next: Vec<f64> = (0..m)
                .map(|i| model.predict_row(&d, i, k) + if sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 })
                .collect();
            d.temp.push(next);
        }
        d
    }

    fn truth(m: usize) -> ZoneArxModel {
        let spec = RegressorSpec::first_order(chain(m));
        let theta = (0..m)
            .map(|i| {
                spec.zone_terms(i)
                    .iter()
                    .map(|t| match *t {
                        ZoneTerm::Temp { zone, lag: 0 } if zone == i => 0.8,
                        ZoneTerm::Temp { zone, lag: 1 } if zone == i => 0.1,
                        ZoneTerm::Temp { lag: 0, .. } => 0.02,
                        ZoneTerm::Temp { .. } => 0.0,
                        ZoneTerm::Heat { lag: 0 } => 0.3,
                        ZoneTerm::Heat { .. } => 0.05,
                        ZoneTerm::Exo { exo: ExoKind::Ta, lag: 0 } => 0.06,
                        ZoneTerm::Exo { exo: ExoKind::Irr, lag: 0 } => 1e-3,
                        ZoneTerm::Exo { exo: ExoKind::Gain, lag: 0 } => 0.2,
                        ZoneTerm::Exo { .. } => 0.0,
                    })
                    .collect()
            })
            .collect();
        ZoneArxModel { spec, theta }
    }

    #[test]
    fn noiseless_recovery_is_exact() {
        let t = truth(3);
        let d = generate(&t, 600, 0.0, 1);
        let fit = fit_zone_model(&d, &t.spec, 0..500).unwrap();
        for (a, b) in fit.theta.iter().flatten().zip(t.theta.iter().flatten()) {
            assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
        }
        for depth in [1, 6, 36] {
            for f in zone_fit_at_depth(&fit, &d, 500..599, depth).unwrap() {
                assert!((f - 100.0).abs() < 1e-6);
            }
        }
        let sim = simulate_zone(&fit, &d, 520, 10).unwrap();
        for (s, row) in sim.iter().enumerate() {
            for i in 0..3 {
                assert!((row[i] - d.temp[521 + s][i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn constant_data_is_not_identifiable() {
        let spec = RegressorSpec::first_order(chain(2));
        let d = ZoneData {
            temp: vec![vec![20.0; 2]; 50],
            heat: vec![vec![0.0; 2]; 50],
            ta: vec![5.0; 50],
            irr: vec![0.0; 50],
            gains: vec![vec![0.0; 2]; 50],
        };
        match fit_zone_model(&d, &spec, 0..40) {
            Err(Error::Identifiability { columns }) => {
                assert!(columns.iter().any(|c| c.starts_with("h0")));
                assert!(columns.iter().any(|c| c.starts_with("Irr")));
            }
            other => panic!("expected identifiability error, got {other:?}"),
        }
    }

    #[test]
    fn validation_data_does_not_leak() {
        let t = truth(2);
        let mut d = generate(&t, 400, 0.05, 3);
        let a = fit_zone_model(&d, &t.spec, 0..300).unwrap();
        d.temp[320..].reverse();
        d.ta[320..].reverse();
        let b = fit_zone_model(&d, &t.spec, 0..300).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scalar_decay() {
        let spec = RegressorSpec { k_t: 0, k_h: 0, k_e: 0, k_loop: 0, k_outlet: 0, k_heat: 0, neighbors: vec![vec![]] };
        let mut theta = vec![0.0; spec.zone_terms(0).len()];
        theta[0] = 0.5;
        let model = ZoneArxModel { spec, theta: vec![theta] };
        let d = ZoneData {
            temp: vec![vec![8.0]],
            heat: vec![vec![0.0]; 3],
            ta: vec![0.0; 3],
            irr: vec![0.0; 3],
            gains: vec![vec![0.0]; 3],
        };
        let sim = simulate_zone(&model, &d, 0, 3).unwrap();
        assert_eq!(sim[2][0], 1.0);
        assert_eq!(sim[0][0], model.predict_row(&d, 0, 0));
    }

    #[test]
    fn fit_index_examples() {
        let y = [1.0, 3.0, 2.0, 5.0];
        assert_eq!(fit_index(&y, &y).unwrap(), 100.0);
        assert_eq!(fit_index(&y, &[2.75; 4]).unwrap(), 0.0);
        assert!((fit_index(&[0.0, 2.0], &[1.0, 1.0]).unwrap()).abs() < 1e-12);
        assert!(matches!(fit_index(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::ConstantSeries)));
    }

    #[test]
    fn pvusa_fit() {
        let theta = [1.8e-3, -1e-7, -2e-6];
        let irr: Vec<f64> = (0..40).map(|k| 25.0 * k as f64).collect();
        let ta: Vec<f64> = (0..40).map(|k| 10.0 + (k as f64 * 0.7).sin() * 8.0).collect();
        let pv: Vec<f64> = irr.iter().zip(&ta).map(|(&i, &t)| crate::devices::pv_raw(i, t, &theta)).collect();
        let fit = fit_pvusa(&irr, &ta, &pv).unwrap();
        for j in 0..3 {
            assert!((fit[j] - theta[j]).abs() <= 1e-9 * theta[j].abs().max(1e-6));
        }
        assert!(matches!(fit_pvusa(&[0.0; 10], &ta[..10], &[0.0; 10]), Err(Error::Identifiability { .. })));
        assert!(fit_pvusa(&irr[..2], &ta[..2], &pv[..2]).is_err());
    }

    #[test]
    fn pvusa_noisy_residual() {
        let theta = [1.8e-3, -1e-7, -2e-6];
        let sigma = 0.02;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = Normal::new(0.0, sigma).unwrap();
        let irr: Vec<f64> = (0..500).map(|_| rng.random_range(0.0..1000.0)).collect();
        let ta: Vec<f64> = (0..500).map(|_| rng.random_range(-5.0..30.0)).collect();
        let pv: Vec<f64> =
            irr.iter().zip(&ta).map(|(&i, &t)| crate::devices::pv_raw(i, t, &theta) + n.sample(&mut rng)).collect();
        let fit = fit_pvusa(&irr, &ta, &pv).unwrap();
        let rms = (irr
            .iter()
            .zip(&ta)
            .zip(&pv)
            .map(|((&i, &t), &p)| (p - crate::devices::pv_raw(i, t, &fit)).powi(2))
            .sum::<f64>()
            / 500.0)
            .sqrt();
        assert!(rms < 1.1 * sigma);
    }

    #[test]
    fn loop_model_recovery() {
        let truth = [0.9, 0.0, 0.1, 0.0, -0.05, 0.0];
        let spec = RegressorSpec::first_order(vec![vec![]]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut d = LoopData::default();
        for _ in 0..300 {
            d.outlet.push(rng.random_range(35.0..55.0));
            d.total_heat.push(rng.random_range(0.0..20.0));
        }
        d.loop_t = vec![40.0, 40.0];
        let model = LoopArxModel { terms: spec.loop_terms(), theta: truth.to_vec() };
        for k in 1..299 {
            let next = model.predict(&d, k);
            d.loop_t.push(next);
        }
        let fit = fit_loop_model(&d, &spec, 0..250).unwrap();
        for (a, b) in fit.theta.iter().zip(truth) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!((loop_fit_at_depth(&fit, &d, 250..299, 6).unwrap() - 100.0).abs() < 1e-6);
    }
}
