//! Retrospective-cost extremum seeking and a classic ESC baseline.
//!
//! The building blocks are the plants (`plant`), the sampled-data loop
//! (`sampled`), the classic ESC (`esc`), the RCAC controller (`rcac`), the
//! Kalman gradient estimator (`gradkf`) and their assembly (`rcesc`).
//! `scenario`, `report` and `batch` drive whole simulations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod error;
pub mod esc;
pub mod gradkf;
pub mod plant;
pub mod rcac;
pub mod rcesc;
pub mod report;
pub mod sampled;
pub mod scenario;

pub use error::{Block, Error, Result};
pub use report::{run_compare, run_controller, run_scenario, RunResult, SummaryReport};
pub use scenario::{builtin, load_scenario, ControllerKind, Scenario, BUILTINS};
