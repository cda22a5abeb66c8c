//! Linear programs and small binary programs for the predictive controller.
//!
//! LPs are solved with the HiGHS simplex. Binary programs are solved by
//! enumerating every assignment, which is exact and cheap for the handful
//! of demand-response indicators a horizon can hold.

mod dump;
mod lp;
mod milp;
mod solve;

pub use dump::to_lp_format;
pub use lp::{LinearProgram, RowSense};
pub use milp::{enumerate_assignments, solve_binary_milp, EnumOptions, MilpSession, MilpSpec, DEFAULT_BINARY_CAP};
pub use solve::{solve_lp, LpSession, SolveResult, Status, FEASIBILITY_TOL};

#[derive(Debug, thiserror::Error)]
pub enum OptimError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("{count} binaries exceed the enumeration cap of {cap}")]
    TooManyBinaries { count: usize, cap: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
}
