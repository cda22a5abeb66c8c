//! Predictive controller for fan-coil HVAC with thermal and electrical
//! storage, PV and price-volume demand response.
//!
//! Each step solves a comfort-feasibility LP, widens the comfort bounds by
//! its optimal slacks, then solves the cost-minimizing operation problem
//! with one binary per demand-response request in the horizon.

mod controller;
mod fan;
pub mod problem;

pub use controller::{MpcController, StepInput, StepReport};
pub use fan::{recover_fan_commands, FanCommands, SUPPLY_TOL, HEAT_TOL};
pub use hvac_mpc_core::dr::{dr_settlement, DrProgram, DrRequest, RequestStatus, Settlement};
pub use problem::{
    active_requests, build_feasibility_lp, build_operation_milp, energy_cost, relaxation_from, ActiveRequest, History,
    HorizonInput, Layout, OperationInput, Plan, Relaxation,
};

#[derive(Debug, thiserror::Error)]
pub enum MpcError {
    #[error("bad controller input: {0}")]
    Input(String),
    #[error("{stage} problem: {source}")]
    Solver {
        stage: &'static str,
        #[source]
        source: hvac_mpc_optim::OptimError,
        /// LP text of the failing problem.
        dump: String,
    },
    #[error("{stage} problem reported {status:?}")]
    Status {
        stage: &'static str,
        status: hvac_mpc_optim::Status,
        dump: String,
    },
}

impl MpcError {
    /// LP text attached to a solver failure, if any.
    pub fn dump(&self) -> Option<&str> {
        match self {
            MpcError::Solver { dump, .. } | MpcError::Status { dump, .. } => Some(dump),
            MpcError::Input(_) => None,
        }
    }
}
