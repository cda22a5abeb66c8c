use std::time::Instant;

use highs::{Col, HighsModelStatus, Model, RowProblem, Sense, SolvedModel};

use crate::lp::{LinearProgram, RowSense};
use crate::OptimError;

/// Scaled primal feasibility required of every reported optimum.
pub const FEASIBILITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    /// Primal values; empty unless optimal.
    pub x: Vec<f64>,
    /// Objective including the offset; `NaN` unless optimal.
    pub objective: f64,
    pub iterations: u64,
    pub wall_ms: f64,
    /// Values of the binaries of a MILP, in the order of `MilpSpec::binaries`.
    pub assignment: Vec<bool>,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    fn without_solution(status: Status, iterations: u64, wall_ms: f64) -> Self {
        Self { status, x: Vec::new(), objective: f64::NAN, iterations, wall_ms, assignment: Vec::new() }
    }
}

/// A loaded problem that can be re-solved after bound changes, reusing the
/// previous basis.
pub struct LpSession {
    lp: LinearProgram,
    cols: Vec<Col>,
    model: Option<Model>,
}

fn configure(model: &mut Model, presolve: bool) {
    model.make_quiet();
    model.set_option("solver", "simplex");
    model.set_option("threads", 1);
    model.set_option("random_seed", 0);
    model.set_option("primal_feasibility_tolerance", 1e-8);
    model.set_option("dual_feasibility_tolerance", 1e-9);
    model.set_option("presolve", if presolve { "on" } else { "off" });
}

fn build(lp: &LinearProgram, presolve: bool) -> Result<(Model, Vec<Col>), OptimError> {
    let mut pb = RowProblem::new();
    let cols: Vec<Col> = (0..lp.num_cols()).map(|j| pb.add_column(lp.cost[j], lp.lower[j]..=lp.upper[j])).collect();
    for (r, row) in lp.rows().into_iter().enumerate() {
        let b = lp.rhs[r];
        let factors: Vec<(Col, f64)> = row.into_iter().map(|(c, v)| (cols[c], v)).collect();
        let (lo, hi) = row_bounds(lp.senses[r], b);
        pb.add_row(lo..=hi, factors);
    }
    let mut model = Model::try_new(pb).map_err(|e| OptimError::Numerical(format!("HiGHS rejected the model: {e:?}")))?;
    model.set_sense(Sense::Minimise);
    configure(&mut model, presolve);
    Ok((model, cols))
}

fn row_bounds(sense: RowSense, rhs: f64) -> (f64, f64) {
    match sense {
        RowSense::Le => (f64::NEG_INFINITY, rhs),
        RowSense::Ge => (rhs, f64::INFINITY),
        RowSense::Eq => (rhs, rhs),
    }
}

impl LpSession {
    pub fn new(lp: LinearProgram) -> Result<Self, OptimError> {
        lp.validate()?;
        let (model, cols) = if lp.num_cols() > 0 { build(&lp, true).map(|(m, c)| (Some(m), c))? } else { (None, vec![]) };
        Ok(Self { lp, cols, model })
    }

    pub fn lp(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn set_bounds(&mut self, col: usize, lower: f64, upper: f64) {
        self.lp.set_bounds(col, lower, upper);
        if let Some(m) = self.model.as_mut() {
            m.change_column_bounds(self.cols[col], lower..=upper);
        }
    }

    /// Replace the problem. When the dimensions and the sparsity pattern
    /// match the loaded one, only changed costs, bounds, right-hand sides
    /// and coefficients are passed to the solver and the next solve starts
    /// from the current basis; otherwise the model is rebuilt. Returns
    /// whether the basis was kept.
    pub fn update(&mut self, lp: LinearProgram) -> Result<bool, OptimError> {
        lp.validate()?;
        let same_shape = lp.num_cols() == self.lp.num_cols()
            && lp.num_rows() == self.lp.num_rows()
            && lp.triplets.len() == self.lp.triplets.len()
            && lp.triplets.iter().zip(&self.lp.triplets).all(|(a, b)| a.0 == b.0 && a.1 == b.1);
        let Some(model) = self.model.as_mut().filter(|_| same_shape) else {
            let (model, cols) = if lp.num_cols() > 0 { build(&lp, true).map(|(m, c)| (Some(m), c))? } else { (None, vec![]) };
            *self = Self { lp, cols, model };
            return Ok(false);
        };
        let old = &self.lp;
        for j in 0..lp.num_cols() {
            if lp.cost[j] != old.cost[j] {
                model.change_column_cost(self.cols[j], lp.cost[j]);
            }
            if lp.lower[j] != old.lower[j] || lp.upper[j] != old.upper[j] {
                model.change_column_bounds(self.cols[j], lp.lower[j]..=lp.upper[j]);
            }
        }
        // After right-hand side changes the old basis is usually close to
        // optimal; primal simplex repairs it faster than dual here.
        model.set_option("simplex_strategy", 4);
        let ptr = model.as_mut_ptr();
        let check = |status: highs_sys::HighsInt, what: &str| {
            if status == highs_sys::STATUS_ERROR {
                Err(OptimError::Numerical(format!("HiGHS rejected {what}")))
            } else {
                Ok(())
            }
        };
        for r in 0..lp.num_rows() {
            if lp.rhs[r] != old.rhs[r] || lp.senses[r] != old.senses[r] {
                let (lo, hi) = row_bounds(lp.senses[r], lp.rhs[r]);
                // SAFETY: `ptr` is the live HiGHS instance owned by `model`
                // and `r` is below its row count.
                check(unsafe { highs_sys::Highs_changeRowBounds(ptr, r as _, lo, hi) }, "a row bound change")?;
            }
        }
        if lp.triplets.iter().zip(&old.triplets).any(|(a, b)| a.2 != b.2) {
            // Entries may repeat a position; pass the summed value.
            let mut summed = std::collections::HashMap::new();
            for &(r, c, v) in &lp.triplets {
                *summed.entry((r, c)).or_insert(0.0) += v;
            }
            let mut changed: Vec<(usize, usize)> = lp
                .triplets
                .iter()
                .zip(&old.triplets)
                .filter(|(a, b)| a.2 != b.2)
                .map(|(a, _)| (a.0, a.1))
                .collect();
            changed.sort_unstable();
            changed.dedup();
            for (r, c) in changed {
                // SAFETY: as above; `c` is below the column count.
                check(unsafe { highs_sys::Highs_changeCoeff(ptr, r as _, c as _, summed[&(r, c)]) }, "a coefficient change")?;
            }
        }
        self.lp = lp;
        Ok(true)
    }

    /// Final statuses, with optima only when they pass the residual check.
    fn accept(&self, solved: &SolvedModel, status: HighsModelStatus) -> bool {
        match status {
            HighsModelStatus::Optimal => self.lp.max_violation(solved.get_solution().columns()) <= FEASIBILITY_TOL,
            s => is_terminal(s),
        }
    }

    pub fn solve(&mut self) -> Result<SolveResult, OptimError> {
        let start = Instant::now();
        let ms = |s: Instant| s.elapsed().as_secs_f64() * 1e3;
        let model = match self.model.take() {
            Some(m) => m,
            None if self.lp.num_cols() > 0 => build(&self.lp, true)?.0,
            None => {
                // No columns: feasible iff every row holds at zero activity.
                if self.lp.max_violation(&[]) > FEASIBILITY_TOL {
                    return Ok(SolveResult::without_solution(Status::Infeasible, 0, ms(start)));
                }
                let objective = self.lp.offset;
                return Ok(SolveResult { status: Status::Optimal, x: vec![], objective, iterations: 0, wall_ms: ms(start), assignment: vec![] });
            }
        };
        let mut solved = run(model)?;
        let mut iterations = solved.simplex_iteration_count().max(0) as u64;
        let mut status = solved.status();
        // A solve can stall on a degenerate basis, end with a residual dual
        // infeasibility after postsolve, or return a point that fails the
        // independent residual check; cold restarts with other settings
        // usually get through.
        let mut retries = RETRIES.iter();
        while !self.accept(&solved, status) {
            let Some(&(presolve, strategy)) = retries.next() else { break };
            let (mut fresh, _) = build(&self.lp, presolve)?;
            fresh.set_option("simplex_strategy", strategy);
            solved = run(fresh)?;
            iterations += solved.simplex_iteration_count().max(0) as u64;
            status = solved.status();
        }
        if matches!(status, HighsModelStatus::UnboundedOrInfeasible) {
            // Presolve may stop without telling the two apart.
            let (fresh, _) = build(&self.lp, false)?;
            solved = run(fresh)?;
            iterations += solved.simplex_iteration_count().max(0) as u64;
            status = solved.status();
        }
        let out = match status {
            HighsModelStatus::Optimal => {
                let x = solved.get_solution().columns().to_vec();
                let viol = self.lp.max_violation(&x);
                if viol > FEASIBILITY_TOL {
                    return Err(OptimError::Numerical(format!("reported optimum violates constraints by {viol:.3e}")));
                }
                let objective = self.lp.objective(&x);
                SolveResult { status: Status::Optimal, x, objective, iterations, wall_ms: ms(start), assignment: vec![] }
            }
            HighsModelStatus::Infeasible => SolveResult::without_solution(Status::Infeasible, iterations, ms(start)),
            HighsModelStatus::Unbounded => SolveResult::without_solution(Status::Unbounded, iterations, ms(start)),
            HighsModelStatus::UnboundedOrInfeasible => {
                return Err(OptimError::Numerical("could not tell infeasible from unbounded".into()))
            }
            other => return Err(OptimError::Numerical(format!("solver stopped with status {other:?}"))),
        };
        self.model = Some(Model::from(solved));
        Ok(out)
    }
}

/// Cold restart settings tried in order: (presolve, simplex strategy).
const RETRIES: [(bool, i32); 4] = [(true, 1), (false, 1), (false, 4), (true, 4)];

fn is_terminal(status: HighsModelStatus) -> bool {
    matches!(
        status,
        HighsModelStatus::Optimal
            | HighsModelStatus::Infeasible
            | HighsModelStatus::Unbounded
            | HighsModelStatus::UnboundedOrInfeasible
    )
}

fn run(model: Model) -> Result<SolvedModel, OptimError> {
    model.try_solve().map_err(|e| OptimError::Numerical(format!("HiGHS failed: {e:?}")))
}

/// Solve a linear program from scratch.
pub fn solve_lp(lp: &LinearProgram) -> Result<SolveResult, OptimError> {
    LpSession::new(lp.clone())?.solve()
}
