use log::warn;

/// Supply-to-zone temperature difference below which the fan-coil has no
/// authority, °C.
pub const SUPPLY_TOL: f64 = 0.1;
/// Heat flows below this are treated as zero, kWh.
pub const HEAT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct FanCommands {
    pub v: Vec<f64>,
    /// Zones whose command was clamped to the maximum.
    pub saturated: Vec<usize>,
}

/// Invert `h = γ (T_snd − T) v` for the fan commands, clamped to `[0, v̄]`.
pub fn recover_fan_commands(h: &[f64], t_snd: f64, t: &[f64], gamma: &[f64], v_max: &[f64]) -> FanCommands {
    let mut out = FanCommands { v: vec![0.0; h.len()], saturated: Vec::new() };
    for i in 0..h.len() {
        if h[i].abs() <= HEAT_TOL {
            continue;
        }
        let diff = t_snd - t[i];
        if diff.abs() < SUPPLY_TOL {
            warn!("zone {i}: supply {t_snd:.2} too close to zone {:.2} for {:.3e} kWh, fan at maximum", t[i], h[i]);
            out.v[i] = v_max[i];
            out.saturated.push(i);
            continue;
        }
        let v = h[i] / (gamma[i] * diff);
        if v > v_max[i] {
            if v > v_max[i] * (1.0 + 1e-6) + 1e-9 {
                warn!("zone {i}: fan command {v:.6} above {:.6}, clamped", v_max[i]);
            }
            out.v[i] = v_max[i];
            out.saturated.push(i);
        } else {
            out.v[i] = v.max(0.0);
        }
    }
    out
}
