use std::fmt;

use crate::OptimError;

/// Row sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for RowSense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        })
    }
}

/// Minimization LP in sparse form.
///
/// Coefficients are stored as `(row, col, value)` triplets in the order
/// they were added. Duplicate entries are summed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub senses: Vec<RowSense>,
    pub rhs: Vec<f64>,
    pub triplets: Vec<(usize, usize, f64)>,
    /// Constant added to the reported objective.
    pub offset: f64,
    /// Optional column and row names, used by the text dump.
    pub col_names: Vec<String>,
    pub row_names: Vec<String>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_cols(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.cost.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.cost.len() - 1
    }

    pub fn add_named_var(&mut self, name: impl Into<String>, cost: f64, lower: f64, upper: f64) -> usize {
        let j = self.add_var(cost, lower, upper);
        self.col_names.resize(j, String::new());
        self.col_names.push(name.into());
        j
    }

    pub fn add_row(&mut self, coeffs: &[(usize, f64)], sense: RowSense, rhs: f64) -> usize {
        let r = self.rhs.len();
        self.senses.push(sense);
        self.rhs.push(rhs);
        self.triplets.extend(coeffs.iter().filter(|(_, v)| *v != 0.0).map(|&(c, v)| (r, c, v)));
        r
    }

    pub fn add_named_row(&mut self, name: impl Into<String>, coeffs: &[(usize, f64)], sense: RowSense, rhs: f64) -> usize {
        let r = self.add_row(coeffs, sense, rhs);
        self.row_names.resize(r, String::new());
        self.row_names.push(name.into());
        r
    }

    pub fn set_bounds(&mut self, col: usize, lower: f64, upper: f64) {
        self.lower[col] = lower;
        self.upper[col] = upper;
    }

    pub fn col_name(&self, j: usize) -> String {
        match self.col_names.get(j) {
            Some(n) if !n.is_empty() => n.clone(),
            _ => format!("x{j}"),
        }
    }

    pub fn row_name(&self, r: usize) -> String {
        match self.row_names.get(r) {
            Some(n) if !n.is_empty() => n.clone(),
            _ => format!("r{r}"),
        }
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        let n = self.num_cols();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(OptimError::Invalid("bound vectors do not match the column count".into()));
        }
        if self.senses.len() != self.rhs.len() {
            return Err(OptimError::Invalid("row senses do not match the row count".into()));
        }
        for j in 0..n {
            if !self.cost[j].is_finite() {
                return Err(OptimError::Invalid(format!("cost of {} is not finite", self.col_name(j))));
            }
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(OptimError::Invalid(format!("bounds of {} are [{l}, {u}]", self.col_name(j))));
            }
        }
        if let Some(r) = self.rhs.iter().position(|b| !b.is_finite()) {
            return Err(OptimError::Invalid(format!("rhs of {} is not finite", self.row_name(r))));
        }
        for &(r, c, v) in &self.triplets {
            if r >= self.num_rows() || c >= n {
                return Err(OptimError::Invalid(format!("entry ({r}, {c}) is out of range")));
            }
            if !v.is_finite() {
                return Err(OptimError::Invalid(format!("coefficient ({r}, {c}) is not finite")));
            }
        }
        if !self.offset.is_finite() {
            return Err(OptimError::Invalid("objective offset is not finite".into()));
        }
        Ok(())
    }

    /// Row-wise copy of the coefficients.
    pub fn rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.num_rows()];
        for &(r, c, v) in &self.triplets {
            rows[r].push((c, v));
        }
        rows
    }

    /// Objective value of `x`, offset included.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.offset + self.cost.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Largest scaled violation of rows and bounds at `x`.
    ///
    /// Each row violation is divided by `max(1, |rhs|, max_j |a_j x_j|)`
    /// and each bound violation by `max(1, |bound|)`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let m = self.num_rows();
        let mut act = vec![0.0; m];
        let mut scale: Vec<f64> = self.rhs.iter().map(|b| b.abs().max(1.0)).collect();
        for &(r, c, v) in &self.triplets {
            let t = v * x[c];
            act[r] += t;
            scale[r] = scale[r].max(t.abs());
        }
        let mut worst = 0.0f64;
        for r in 0..m {
            let d = act[r] - self.rhs[r];
            let viol = match self.senses[r] {
                RowSense::Le => d.max(0.0),
                RowSense::Ge => (-d).max(0.0),
                RowSense::Eq => d.abs(),
            };
            worst = worst.max(viol / scale[r]);
        }
        for (j, &v) in x.iter().enumerate() {
            let lo = (self.lower[j] - v).max(0.0) / self.lower[j].abs().max(1.0);
            let hi = (v - self.upper[j]).max(0.0) / self.upper[j].abs().max(1.0);
            worst = worst.max(lo).max(hi);
        }
        worst
    }
}
