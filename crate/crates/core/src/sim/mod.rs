//! Discrete-time execution harness.
//!
//! Ground segments are walked one full canter step at a time, either under
//! the MPC or along a precomputed open-loop step plan, with seeded noise on
//! every sub-step. Aerial segments are flown exactly at constant speed.

mod calibrate;
mod disturbance;
mod log;
mod polyline;
mod report;
mod run;

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::GridError;
use crate::kinematics::KinematicsError;
use crate::mpc::MpcError;
use crate::planner::PlanError;

pub use calibrate::{calibrate_noise, mean_open_loop_rmse, Calibration};
pub use disturbance::DisturbanceModel;
pub use log::{
    read_joint_csv, read_trace_csv, write_joint_csv, write_trace_csv, Granularity, JointRow,
    LogRecord, MpcTraceRow, TrajectoryLog,
};
pub use polyline::{Polyline, Projection};
pub use report::{compute_errors, compute_errors_in, improvement_pct, ErrorReport, Improvement};
pub use run::{
    execute_path, run_closed_loop, run_mission, run_open_loop, Harness, MissionRun, RunOutput,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("log has no records at the requested granularity")]
    EmptyLog,
    #[error("time index {next} does not follow {previous}")]
    TimeOrder { previous: u64, next: u64 },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Mpc(#[from] MpcError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// A segment is finished once the body is this close to its end, meters.
    pub tolerance: f64,
    /// Step budget as a multiple of the segment's nominal step count.
    pub step_budget_factor: f64,
    /// Arc-length offset of the point used to choose the stepping axis,
    /// meters. Lateral errors below roughly this size are left alone.
    pub selection_lookahead: f64,
    /// Distance flown per tick on aerial segments, meters.
    pub air_step: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { tolerance: 0.01, step_budget_factor: 4.0, selection_lookahead: 0.005, air_step: 0.1 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(SimError::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("tolerance", self.tolerance)?;
        positive("step_budget_factor", self.step_budget_factor)?;
        positive("selection_lookahead", self.selection_lookahead)?;
        positive("air_step", self.air_step)
    }
}
