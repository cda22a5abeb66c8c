use std::cmp::Ordering;

use rayon::prelude::*;

use crate::lp::LinearProgram;
use crate::solve::{LpSession, SolveResult, Status};
use crate::OptimError;

pub const DEFAULT_BINARY_CAP: usize = 12;

/// Objectives closer than this (relative) count as tied.
const TIE_TOL: f64 = 1e-9;

/// An LP in which some columns are restricted to {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpSpec {
    pub lp: LinearProgram,
    pub binaries: Vec<usize>,
    pub cap: usize,
}

impl MilpSpec {
    pub fn new(lp: LinearProgram, binaries: Vec<usize>) -> Self {
        Self { lp, binaries, cap: DEFAULT_BINARY_CAP }
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        self.lp.validate()?;
        if self.binaries.len() > self.cap {
            return Err(OptimError::TooManyBinaries { count: self.binaries.len(), cap: self.cap });
        }
        for (a, &j) in self.binaries.iter().enumerate() {
            if j >= self.lp.num_cols() {
                return Err(OptimError::Invalid(format!("binary index {j} is out of range")));
            }
            if self.binaries[..a].contains(&j) {
                return Err(OptimError::Invalid(format!("binary index {j} is listed twice")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EnumOptions {
    /// Solve the assignments on the rayon pool instead of re-solving one
    /// model with warm starts.
    pub parallel: bool,
}

fn assignment(mask: usize, n: usize) -> Vec<bool> {
    (0..n).map(|j| mask >> j & 1 == 1).collect()
}

/// Ordering used to pick the winner: lower objective, then more ones, then
/// the lexicographically smaller assignment.
fn rank(a: &SolveResult, b: &SolveResult) -> Ordering {
    let tol = TIE_TOL * (1.0 + a.objective.abs().max(b.objective.abs()));
    if a.objective < b.objective - tol {
        return Ordering::Less;
    }
    if b.objective < a.objective - tol {
        return Ordering::Greater;
    }
    let ones = |r: &SolveResult| r.assignment.iter().filter(|&&e| e).count();
    ones(b).cmp(&ones(a)).then_with(|| a.assignment.cmp(&b.assignment))
}

fn solve_assignment(session: &mut LpSession, binaries: &[usize], mask: usize) -> Result<SolveResult, OptimError> {
    let a = assignment(mask, binaries.len());
    for (&j, &on) in binaries.iter().zip(&a) {
        let v = if on { 1.0 } else { 0.0 };
        session.set_bounds(j, v, v);
    }
    let mut r = session.solve()?;
    r.assignment = a;
    Ok(r)
}

/// Every assignment with its LP result, in mask order.
pub fn enumerate_assignments(spec: &MilpSpec, opts: EnumOptions) -> Result<Vec<SolveResult>, OptimError> {
    spec.validate()?;
    let nb = spec.binaries.len();
    if opts.parallel && nb > 0 {
        (0..1usize << nb)
            .into_par_iter()
            .map(|mask| solve_assignment(&mut LpSession::new(spec.lp.clone())?, &spec.binaries, mask))
            .collect()
    } else {
        let mut session = LpSession::new(spec.lp.clone())?;
        (0..1usize << nb).map(|mask| solve_assignment(&mut session, &spec.binaries, mask)).collect()
    }
}

/// Best of the enumerated results.
fn pick(all: Vec<SolveResult>) -> SolveResult {
    let iterations = all.iter().map(|r| r.iterations).sum();
    let wall_ms = all.iter().map(|r| r.wall_ms).sum();
    if let Some(r) = all.iter().find(|r| r.status == Status::Unbounded) {
        return SolveResult { iterations, wall_ms, ..r.clone() };
    }
    let best = all.iter().filter(|r| r.is_optimal()).min_by(|a, b| rank(a, b));
    match best {
        Some(r) => SolveResult { iterations, wall_ms, ..r.clone() },
        None => SolveResult {
            status: Status::Infeasible,
            x: vec![],
            objective: f64::NAN,
            iterations,
            wall_ms,
            assignment: vec![],
        },
    }
}

/// Exhaustive enumeration of the binaries, one LP per assignment.
pub fn solve_binary_milp(spec: &MilpSpec, opts: EnumOptions) -> Result<SolveResult, OptimError> {
    Ok(pick(enumerate_assignments(spec, opts)?))
}

/// Sequential enumeration on a model kept between calls, so that a
/// sequence of problems with a common structure (a receding horizon)
/// starts each solve from the last basis.
#[derive(Default)]
pub struct MilpSession {
    session: Option<LpSession>,
}

impl MilpSession {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solve(&mut self, spec: &MilpSpec) -> Result<SolveResult, OptimError> {
        spec.validate()?;
        let session = match self.session.as_mut() {
            Some(s) => {
                s.update(spec.lp.clone())?;
                s
            }
            None => self.session.insert(LpSession::new(spec.lp.clone())?),
        };
        let all = (0..1usize << spec.binaries.len())
            .map(|mask| solve_assignment(session, &spec.binaries, mask))
            .collect::<Result<Vec<_>, _>>();
        if all.is_err() {
            // Start the next call from a clean model.
            self.session = None;
        }
        Ok(pick(all?))
    }
}
