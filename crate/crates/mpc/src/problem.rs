//! Assembly of the feasibility LP and the operation MILP over one horizon.
//!
//! Decision variables are the fan-coil heat flows rather than fan speeds,
//! which keeps every constraint linear. Horizon indices `l` are relative to
//! the current step `k`.

use hvac_mpc_core::devices::pv_available;
use hvac_mpc_core::dr::DrProgram;
use hvac_mpc_core::forecast::ForecastBundle;
use hvac_mpc_core::identify::ModelBundle;
use hvac_mpc_core::sysid::{LoopTerm, ZoneTerm};
use hvac_mpc_core::{DeviceParams, Exogenous, Measurements, Mode};
use hvac_mpc_optim::{LinearProgram, MilpSpec, RowSense};

use crate::MpcError;

const INF: f64 = f64::INFINITY;

/// Past signals the regressors reach back to. The last entry of each
/// vector is the most recent step before `k`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub temp: Vec<Vec<f64>>,
    pub heat: Vec<Vec<f64>>,
    pub exo: Vec<Exogenous>,
    pub loop_t: Vec<f64>,
    pub outlet: Vec<f64>,
    pub total_heat: Vec<f64>,
}

impl History {
    /// Append one completed step and keep at most `depth` entries.
    pub fn push(&mut self, meas_temp: Vec<f64>, loop_t: f64, outlet: f64, heat: Vec<f64>, exo: Exogenous, depth: usize) {
        self.total_heat.push(heat.iter().sum());
        self.temp.push(meas_temp);
        self.heat.push(heat);
        self.exo.push(exo);
        self.loop_t.push(loop_t);
        self.outlet.push(outlet);
        let d = depth.max(1);
        fn trim<T>(v: &mut Vec<T>, d: usize) {
            if v.len() > d {
                v.drain(..v.len() - d);
            }
        }
        trim(&mut self.temp, d);
        trim(&mut self.heat, d);
        trim(&mut self.exo, d);
        trim(&mut self.loop_t, d);
        trim(&mut self.outlet, d);
        trim(&mut self.total_heat, d);
    }

    /// Entry `back` steps before `k` (`back >= 1`); the oldest entry is
    /// repeated when the record is shorter.
    fn at<T>(v: &[T], back: usize) -> Option<&T> {
        if v.is_empty() {
            None
        } else {
            Some(&v[v.len().saturating_sub(back)])
        }
    }
}

/// Everything shared by both problems of one step.
#[derive(Debug, Clone, Copy)]
pub struct HorizonInput<'a> {
    pub k: usize,
    pub horizon: usize,
    pub mode: Mode,
    pub models: &'a ModelBundle,
    pub devices: &'a DeviceParams,
    pub meas: &'a Measurements,
    pub history: &'a History,
    /// At least `horizon` entries, `[j]` for step `k + j`.
    pub forecast: &'a ForecastBundle,
    /// Comfort bounds `[l][i]` for the temperature at `k + l + 1`.
    pub lower: &'a [Vec<f64>],
    pub upper: &'a [Vec<f64>],
}

/// Data only the operation problem needs.
#[derive(Debug, Clone, Copy)]
pub struct OperationInput<'a> {
    /// Price for steps `k .. k + horizon`.
    pub price: &'a [f64],
    pub program: &'a DrProgram,
    /// Realized grid energy of steps before `k`, indexed by absolute step.
    pub realized_grid: &'a [f64],
    pub battery_regularizer: f64,
    pub max_binaries: usize,
}

/// Optimal slacks of the feasibility problem, used as widened bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Relaxation {
    /// `[l][i]`, for the temperature at `k + l + 1`.
    pub lower: Vec<Vec<f64>>,
    pub upper: Vec<Vec<f64>>,
    /// Fan-coil capacity rows, `[l][i]`.
    pub fan: Vec<Vec<f64>>,
    /// Heat pump setpoint limit, `[l]`.
    pub setpoint: Vec<f64>,
}

impl Relaxation {
    pub fn zeros(zones: usize, horizon: usize) -> Self {
        Self {
            lower: vec![vec![0.0; zones]; horizon],
            upper: vec![vec![0.0; zones]; horizon],
            fan: vec![vec![0.0; zones]; horizon],
            setpoint: vec![0.0; horizon],
        }
    }

    /// 1-norm of the comfort slacks.
    pub fn comfort_total(&self) -> f64 {
        self.lower.iter().chain(&self.upper).flatten().sum()
    }

    pub fn technical_total(&self) -> f64 {
        self.fan.iter().flatten().sum::<f64>() + self.setpoint.iter().sum::<f64>()
    }

    /// Every slack enlarged by `pad`. The feasibility optimum sits exactly on
    /// the widened bounds, so without room the operation problem can be
    /// declared infeasible by solver round-off.
    fn padded(&self, pad: f64) -> Self {
        let grow = |v: &Vec<Vec<f64>>| v.iter().map(|r| r.iter().map(|x| x + pad).collect()).collect();
        Self {
            lower: grow(&self.lower),
            upper: grow(&self.upper),
            fan: grow(&self.fan),
            setpoint: self.setpoint.iter().map(|x| x + pad).collect(),
        }
    }

    fn shape_ok(&self, zones: usize, horizon: usize) -> bool {
        let ok = |v: &Vec<Vec<f64>>| v.len() == horizon && v.iter().all(|r| r.len() == zones);
        ok(&self.lower) && ok(&self.upper) && ok(&self.fan) && self.setpoint.len() == horizon
    }
}

/// Column indices of one horizon problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub zones: usize,
    pub horizon: usize,
    temp: usize,
    heat: usize,
    loop_t: usize,
    outlet: usize,
    setpoint: usize,
    hp: usize,
    fan_slack: usize,
    setpoint_slack: usize,
    /// Feasibility problem only.
    comfort: Option<usize>,
    /// Operation problem only.
    storage: Option<usize>,
    /// Columns of the request indicators with their request index.
    pub binaries: Vec<(usize, usize)>,
}

impl Layout {
    /// Zone temperature at `k + l`, `l = 0..=horizon`.
    pub fn temp(&self, l: usize, i: usize) -> usize {
        self.temp + l * self.zones + i
    }
    pub fn heat(&self, l: usize, i: usize) -> usize {
        self.heat + l * self.zones + i
    }
    /// Tank (heating) or chilled-water return (cooling), `l = 0..=horizon`.
    pub fn loop_t(&self, l: usize) -> usize {
        self.loop_t + l
    }
    /// Heat pump outlet, `l = 0..=horizon`.
    pub fn outlet(&self, l: usize) -> usize {
        self.outlet + l
    }
    pub fn setpoint(&self, l: usize) -> usize {
        self.setpoint + l
    }
    pub fn hp(&self, l: usize) -> usize {
        self.hp + l
    }
    pub fn fan_slack(&self, l: usize, i: usize) -> usize {
        self.fan_slack + l * self.zones + i
    }
    pub fn setpoint_slack(&self, l: usize) -> usize {
        self.setpoint_slack + l
    }
    /// Lower and upper comfort slacks of the temperature at `k + l + 1`.
    pub fn comfort_slack(&self, l: usize, i: usize) -> Option<(usize, usize)> {
        let base = self.comfort? + 2 * (l * self.zones + i);
        Some((base, base + 1))
    }
    fn storage_col(&self, field: usize, l: usize) -> usize {
        let n = self.horizon;
        // Charge, discharge, PV, grid have `n` entries; state of charge `n + 1`.
        self.storage.expect("operation layout") + field * n + l
    }
    pub fn charge(&self, l: usize) -> usize {
        self.storage_col(0, l)
    }
    pub fn discharge(&self, l: usize) -> usize {
        self.storage_col(1, l)
    }
    pub fn pv(&self, l: usize) -> usize {
        self.storage_col(2, l)
    }
    pub fn grid(&self, l: usize) -> usize {
        self.storage_col(3, l)
    }
    /// Battery charge at `k + l`, `l = 0..=horizon`.
    pub fn soc(&self, l: usize) -> usize {
        self.storage_col(4, l)
    }
}

/// Horizon trajectories of an optimal solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    /// `[l][i]`, `l = 0..=horizon`.
    pub temp: Vec<Vec<f64>>,
    pub heat: Vec<Vec<f64>>,
    pub loop_t: Vec<f64>,
    pub outlet: Vec<f64>,
    pub setpoint: Vec<f64>,
    pub hp: Vec<f64>,
    pub charge: Vec<f64>,
    pub discharge: Vec<f64>,
    pub soc: Vec<f64>,
    pub pv: Vec<f64>,
    pub grid: Vec<f64>,
}

impl Plan {
    pub fn extract(layout: &Layout, x: &[f64]) -> Self {
        let n = layout.horizon;
        let m = layout.zones;
        let col = |f: &dyn Fn(usize) -> usize, len: usize| (0..len).map(|l| x[f(l)]).collect::<Vec<_>>();
        let has_storage = layout.storage.is_some();
        let storage = |f: fn(&Layout, usize) -> usize, len: usize| {
            if has_storage {
                (0..len).map(|l| x[f(layout, l)]).collect()
            } else {
                Vec::new()
            }
        };
        Self {
            temp: (0..=n).map(|l| (0..m).map(|i| x[layout.temp(l, i)]).collect()).collect(),
            heat: (0..n).map(|l| (0..m).map(|i| x[layout.heat(l, i)]).collect()).collect(),
            loop_t: col(&|l| layout.loop_t(l), n + 1),
            outlet: col(&|l| layout.outlet(l), n + 1),
            setpoint: col(&|l| layout.setpoint(l), n),
            hp: col(&|l| layout.hp(l), n),
            charge: storage(Layout::charge, n),
            discharge: storage(Layout::discharge, n),
            soc: storage(Layout::soc, n + 1),
            pv: storage(Layout::pv, n),
            grid: storage(Layout::grid, n),
        }
    }
}

/// A request as it enters one horizon: residual cap over the remaining
/// window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveRequest {
    pub index: usize,
    /// Relative steps covered inside the horizon.
    pub first: usize,
    pub len: usize,
    pub cap: f64,
    pub reward: f64,
}

/// Requests that bind in the horizon starting at `k`: those whose window
/// lies inside it, plus a running request whose cap is not yet exceeded.
pub fn active_requests(program: &DrProgram, k: usize, horizon: usize, realized_grid: &[f64]) -> Vec<ActiveRequest> {
    let mut out = Vec::new();
    for j in program.contained(k, horizon) {
        let r = &program.requests[j];
        out.push(ActiveRequest { index: j, first: r.start - k, len: r.len, cap: r.cap, reward: r.reward });
    }
    for j in program.in_progress(k) {
        let r = &program.requests[j];
        let end = r.start + r.len;
        if end > k + horizon {
            continue;
        }
        let used: f64 = (r.start..k).map(|t| realized_grid.get(t).copied().unwrap_or(0.0)).sum();
        if used <= r.cap {
            out.push(ActiveRequest { index: j, first: 0, len: end - k, cap: r.cap - used, reward: r.reward });
        }
    }
    out.sort_by_key(|a| a.index);
    out
}

fn validate(inp: &HorizonInput) -> Result<(), MpcError> {
    let m = inp.models.zones();
    let n = inp.horizon;
    if n == 0 {
        return Err(MpcError::Input("horizon must be at least one step".into()));
    }
    if inp.models.mode != inp.mode {
        return Err(MpcError::Input(format!("model identified for {:?}, controller runs {:?}", inp.models.mode, inp.mode)));
    }
    if inp.devices.zones() != m {
        return Err(MpcError::Input(format!("model has {m} zones, devices {}", inp.devices.zones())));
    }
    let meas = inp.meas;
    if meas.zone.len() != m {
        return Err(MpcError::Input(format!("{} zone measurements for {m} zones", meas.zone.len())));
    }
    let needed = match inp.mode {
        Mode::Heating => [meas.tes, meas.hp_heat, meas.soc],
        Mode::Cooling => [meas.cool_in, meas.hp_cool, meas.soc],
    };
    if meas.zone.iter().chain(&needed).any(|v| !v.is_finite()) {
        return Err(MpcError::Input("missing or non-finite measurement".into()));
    }
    if inp.forecast.len() < n || inp.forecast.gains.iter().take(n).any(|g| g.len() != m) {
        return Err(MpcError::Input(format!("forecast shorter than the horizon of {n} steps")));
    }
    if inp.lower.len() < n || inp.upper.len() < n || inp.lower.iter().chain(inp.upper).take(n).any(|r| r.len() != m) {
        return Err(MpcError::Input("comfort bounds do not cover the horizon".into()));
    }
    Ok(())
}

fn loop_measurement(meas: &Measurements, mode: Mode) -> (f64, f64) {
    match mode {
        Mode::Heating => (meas.tes, meas.hp_heat),
        Mode::Cooling => (meas.cool_in, meas.hp_cool),
    }
}

/// Accumulates a row: variables go to the left, constants to the right.
struct RowBuf {
    coeffs: Vec<(usize, f64)>,
    constant: f64,
}

impl RowBuf {
    fn new() -> Self {
        Self { coeffs: Vec::with_capacity(16), constant: 0.0 }
    }
    fn var(&mut self, col: usize, c: f64) {
        self.coeffs.push((col, c));
    }
    fn add(&mut self, lp: &mut LinearProgram, sense: RowSense, rhs: f64) -> usize {
        lp.add_row(&self.coeffs, sense, rhs - self.constant)
    }
}

/// Treatment of the slacks on setpoint limits and fan-coil capacity.
#[derive(Clone, Copy)]
enum Technical<'a> {
    /// Priced slacks, with limits optionally moved by a relaxation first.
    Penalized { weight: f64, shift: Option<&'a Relaxation> },
    /// Free slacks capped at what the feasibility step needed.
    Bounded(&'a Relaxation),
}

/// Columns and rows common to both problems: zone and loop dynamics,
/// heat pump, fan-coil capacity and the measurement anchors.
fn build_common(inp: &HorizonInput, lp: &mut LinearProgram, tech: Technical) -> Layout {
    let m = inp.models.zones();
    let n = inp.horizon;
    let d = inp.devices;
    let mode = inp.mode;
    let alpha = d.alpha(mode);
    let sign = match mode {
        Mode::Heating => 1.0,
        Mode::Cooling => -1.0,
    };

    let block = |lp: &mut LinearProgram, count: usize, cost: f64, lo: f64, hi: f64| {
        let first = lp.num_cols();
        for _ in 0..count {
            lp.add_var(cost, lo, hi);
        }
        first
    };
    let temp = block(lp, (n + 1) * m, 0.0, -INF, INF);
    let (h_lo, h_hi) = if sign > 0.0 { (0.0, INF) } else { (-INF, 0.0) };
    let heat = block(lp, n * m, 0.0, h_lo, h_hi);
    let loop_t = block(lp, n + 1, 0.0, -INF, INF);
    let outlet = block(lp, n + 1, 0.0, -INF, INF);
    let setpoint = block(lp, n, 0.0, -INF, INF);
    let hp = block(lp, n, 0.0, 0.0, d.hp_energy_max(mode));
    let (slack_cost, shift) = match tech {
        Technical::Penalized { weight, shift } => (weight, shift),
        Technical::Bounded(_) => (0.0, None),
    };
    let fan_slack = block(lp, n * m, slack_cost, 0.0, INF);
    let setpoint_slack = block(lp, n, slack_cost, 0.0, INF);
    let layout = Layout {
        zones: m,
        horizon: n,
        temp,
        heat,
        loop_t,
        outlet,
        setpoint,
        hp,
        fan_slack,
        setpoint_slack,
        comfort: None,
        storage: None,
        binaries: Vec::new(),
    };
    // In the operation problem the technological slacks may use exactly
    // what the feasibility step needed, at no cost.
    if let Technical::Bounded(r) = tech {
        for l in 0..n {
            for i in 0..m {
                lp.set_bounds(layout.fan_slack(l, i), 0.0, r.fan[l][i]);
            }
            lp.set_bounds(layout.setpoint_slack(l), 0.0, r.setpoint[l]);
        }
    }

    // Measurement anchors.
    let meas = inp.meas;
    for i in 0..m {
        lp.add_row(&[(layout.temp(0, i), 1.0)], RowSense::Eq, meas.zone[i]);
    }
    let (loop0, outlet0) = loop_measurement(meas, mode);
    lp.add_row(&[(layout.loop_t(0), 1.0)], RowSense::Eq, loop0);
    lp.add_row(&[(layout.outlet(0), 1.0)], RowSense::Eq, outlet0);

    let hist = inp.history;
    let fc = inp.forecast;
    let zone_model = &inp.models.zone;
    let terms: Vec<Vec<ZoneTerm>> = (0..m).map(|i| zone_model.terms(i)).collect();
    for l in 0..n {
        // Zone dynamics.
        for i in 0..m {
            let mut row = RowBuf::new();
            row.var(layout.temp(l + 1, i), 1.0);
            for (&term, &c) in terms[i].iter().zip(&zone_model.theta[i]) {
                let lag = term.lag();
                match term {
                    ZoneTerm::Temp { zone, .. } if lag <= l => row.var(layout.temp(l - lag, zone), -c),
                    ZoneTerm::Temp { zone, .. } => {
                        let v = History::at(&hist.temp, lag - l).map_or(meas.zone[zone], |t| t[zone]);
                        row.constant -= c * v;
                    }
                    ZoneTerm::Heat { .. } if lag <= l => row.var(layout.heat(l - lag, i), -c),
                    ZoneTerm::Heat { .. } => {
                        row.constant -= c * History::at(&hist.heat, lag - l).map_or(0.0, |h| h[i]);
                    }
                    ZoneTerm::Exo { exo, .. } => {
                        let v = if lag <= l {
                            exo.value(fc.ta[l - lag], fc.irr[l - lag], fc.gains[l - lag][i])
                        } else {
                            History::at(&hist.exo, lag - l)
                                .map_or_else(|| exo.value(fc.ta[0], fc.irr[0], fc.gains[0][i]), |e| exo.value(e.ta, e.irr, e.gains[i]))
                        };
                        row.constant -= c * v;
                    }
                }
            }
            row.add(lp, RowSense::Eq, 0.0);
        }

        // Loop dynamics.
        let mut row = RowBuf::new();
        row.var(layout.loop_t(l + 1), 1.0);
        for (&term, &c) in inp.models.loop_model.terms.iter().zip(&inp.models.loop_model.theta) {
            let lag = term.lag();
            match term {
                LoopTerm::Loop { .. } if lag <= l => row.var(layout.loop_t(l - lag), -c),
                LoopTerm::Loop { .. } => row.constant -= c * History::at(&hist.loop_t, lag - l).copied().unwrap_or(loop0),
                LoopTerm::Outlet { .. } if lag <= l => row.var(layout.outlet(l - lag), -c),
                LoopTerm::Outlet { .. } => {
                    row.constant -= c * History::at(&hist.outlet, lag - l).copied().unwrap_or(outlet0)
                }
                LoopTerm::TotalHeat { .. } if lag <= l => {
                    for i in 0..m {
                        row.var(layout.heat(l - lag, i), -c);
                    }
                }
                LoopTerm::TotalHeat { .. } => {
                    row.constant -= c * History::at(&hist.total_heat, lag - l).copied().unwrap_or(0.0)
                }
            }
        }
        row.add(lp, RowSense::Eq, 0.0);

        // Heat pump: one-step delay, energy proportional to the lift, and
        // the setpoint on the working side of the inlet.
        lp.add_row(&[(layout.outlet(l + 1), 1.0), (layout.setpoint(l), -1.0)], RowSense::Eq, 0.0);
        lp.add_row(
            &[(layout.hp(l), 1.0), (layout.setpoint(l), -sign * alpha), (layout.loop_t(l), sign * alpha)],
            RowSense::Eq,
            0.0,
        );
        lp.add_row(&[(layout.setpoint(l), sign), (layout.loop_t(l), -sign)], RowSense::Ge, 0.0);
        let limit = match mode {
            Mode::Heating => d.t0_max_heat,
            Mode::Cooling => d.t0_min_cool,
        };
        lp.add_row(
            &[(layout.setpoint(l), sign), (layout.setpoint_slack(l), -1.0)],
            RowSense::Le,
            sign * limit + shift.map_or(0.0, |w| w.setpoint[l]),
        );

        // Fan-coil capacity: |h| ≤ γ v̄ |T_snd − T| on the working side.
        let supply = match mode {
            Mode::Heating => layout.loop_t(l),
            Mode::Cooling => layout.outlet(l),
        };
        for (i, z) in d.zones.iter().enumerate() {
            let g = z.gamma * z.v_max;
            lp.add_row(
                &[
                    (layout.heat(l, i), sign),
                    (supply, -sign * g),
                    (layout.temp(l, i), sign * g),
                    (layout.fan_slack(l, i), -1.0),
                ],
                RowSense::Le,
                shift.map_or(0.0, |w| w.fan[l][i]),
            );
        }
    }
    layout
}

/// Clamp widened comfort bounds that crossed by rounding.
fn band(lo: f64, hi: f64) -> (f64, f64) {
    if lo <= hi {
        (lo, hi)
    } else {
        let mid = 0.5 * (lo + hi);
        (mid, mid)
    }
}

/// Minimum 1-norm comfort relaxation (plus weighted technological slacks).
///
/// With `widen`, comfort bounds and technological limits are first moved
/// by the given relaxation; the optimum is then zero when `widen` came
/// from the same inputs.
pub fn build_feasibility_lp(
    inp: &HorizonInput,
    tech_weight: f64,
    widen: Option<&Relaxation>,
) -> Result<(LinearProgram, Layout), MpcError> {
    validate(inp)?;
    let m = inp.models.zones();
    let n = inp.horizon;
    if let Some(w) = widen {
        if !w.shape_ok(m, n) {
            return Err(MpcError::Input("relaxation shape does not match the horizon".into()));
        }
    }
    let mut lp = LinearProgram::new();
    let mut layout = build_common(inp, &mut lp, Technical::Penalized { weight: tech_weight, shift: widen });
    layout.comfort = Some(lp.num_cols());
    for _ in 0..2 * n * m {
        lp.add_var(1.0, 0.0, INF);
    }
    for l in 0..n {
        for i in 0..m {
            let (dlo, dhi) = layout.comfort_slack(l, i).expect("feasibility layout");
            let (wl, wu) = widen.map_or((0.0, 0.0), |w| (w.lower[l][i], w.upper[l][i]));
            let t = layout.temp(l + 1, i);
            lp.add_row(&[(t, 1.0), (dlo, 1.0)], RowSense::Ge, inp.lower[l][i] - wl);
            lp.add_row(&[(t, 1.0), (dhi, -1.0)], RowSense::Le, inp.upper[l][i] + wu);
        }
    }
    Ok((lp, layout))
}

/// Slacks of an optimal feasibility solution.
pub fn relaxation_from(layout: &Layout, x: &[f64]) -> Relaxation {
    let (m, n) = (layout.zones, layout.horizon);
    let mut r = Relaxation::zeros(m, n);
    for l in 0..n {
        for i in 0..m {
            let (dlo, dhi) = layout.comfort_slack(l, i).expect("feasibility layout");
            r.lower[l][i] = x[dlo].max(0.0);
            r.upper[l][i] = x[dhi].max(0.0);
            r.fan[l][i] = x[layout.fan_slack(l, i)].max(0.0);
        }
        r.setpoint[l] = x[layout.setpoint_slack(l)].max(0.0);
    }
    r
}

/// Room added to each feasibility slack, °C or flow units.
pub const RELAX_PAD: f64 = 1e-6;

/// Operation problem with comfort bounds widened by `relax`.
pub fn build_operation_milp(
    inp: &HorizonInput,
    op: &OperationInput,
    relax: &Relaxation,
) -> Result<(MilpSpec, Layout, Vec<ActiveRequest>), MpcError> {
    validate(inp)?;
    let m = inp.models.zones();
    let n = inp.horizon;
    if !relax.shape_ok(m, n) {
        return Err(MpcError::Input("relaxation shape does not match the horizon".into()));
    }
    if op.price.len() < n {
        return Err(MpcError::Input(format!("price covers {} of {n} steps", op.price.len())));
    }
    let d = inp.devices;
    let relax = &relax.padded(RELAX_PAD);
    let mut lp = LinearProgram::new();
    let mut layout = build_common(inp, &mut lp, Technical::Bounded(relax));

    for l in 0..n {
        for i in 0..m {
            let lo = inp.lower[l][i] - relax.lower[l][i];
            let hi = inp.upper[l][i] + relax.upper[l][i];
            let (lo, hi) = band(lo, hi);
            lp.set_bounds(layout.temp(l + 1, i), lo, hi);
        }
    }

    // Battery, PV and grid blocks, in the order `Layout::storage_col` expects.
    let reg = op.battery_regularizer;
    let first = lp.num_cols();
    layout.storage = Some(first);
    for _ in 0..n {
        lp.add_var(reg, 0.0, d.ees_charge_max);
    }
    for _ in 0..n {
        lp.add_var(reg, 0.0, d.ees_discharge_max);
    }
    let theta = inp.models.pv_theta;
    for l in 0..n {
        lp.add_var(0.0, 0.0, pv_available(inp.forecast.irr[l], inp.forecast.ta[l], &theta));
    }
    for l in 0..n {
        lp.add_var(op.price[l], 0.0, INF);
    }
    for _ in 0..=n {
        lp.add_var(0.0, 0.0, d.ees_capacity);
    }
    lp.add_row(&[(layout.soc(0), 1.0)], RowSense::Eq, inp.meas.soc.clamp(0.0, d.ees_capacity));
    for l in 0..n {
        lp.add_row(
            &[(layout.soc(l + 1), 1.0), (layout.soc(l), -1.0), (layout.charge(l), -d.eta), (layout.discharge(l), 1.0 / d.eta)],
            RowSense::Eq,
            0.0,
        );
        lp.add_row(
            &[(layout.grid(l), 1.0), (layout.hp(l), -1.0), (layout.charge(l), -1.0), (layout.discharge(l), 1.0), (layout.pv(l), 1.0)],
            RowSense::Eq,
            0.0,
        );
    }

    // Demand response: W(window) ≤ ε S + (1 − ε) M μ.
    let big_m = d.big_m(inp.mode);
    let requests = active_requests(op.program, inp.k, n, op.realized_grid);
    if requests.len() > op.max_binaries {
        return Err(MpcError::Solver {
            stage: "operation",
            source: hvac_mpc_optim::OptimError::TooManyBinaries { count: requests.len(), cap: op.max_binaries },
            dump: String::new(),
        });
    }
    for req in &requests {
        let e = lp.add_named_var(format!("eps{}", req.index), -req.reward, 0.0, 1.0);
        let mm = big_m * req.len as f64;
        let mut row: Vec<(usize, f64)> = (req.first..req.first + req.len).map(|l| (layout.grid(l), 1.0)).collect();
        row.push((e, mm - req.cap));
        lp.add_named_row(format!("dr{}", req.index), &row, RowSense::Le, mm);
        layout.binaries.push((e, req.index));
    }
    let mut spec = MilpSpec::new(lp, layout.binaries.iter().map(|b| b.0).collect());
    spec.cap = op.max_binaries;
    Ok((spec, layout, requests))
}

/// Planned energy cost `Σ p W` of a solution (reward excluded).
pub fn energy_cost(layout: &Layout, price: &[f64], x: &[f64]) -> f64 {
    (0..layout.horizon).map(|l| price[l] * x[layout.grid(l)]).sum()
}
