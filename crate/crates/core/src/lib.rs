//! Planning and path following for a limbed robot that can both walk and fly.
//!
//! * [`grid`]: 3D occupancy world and its text format.
//! * [`planner`]: ground-first A* with an aerial fallback that lands as
//!   early as possible.
//! * [`kinematics`]: two-link limb IK, canter-gait foot trajectory and the
//!   zigzag body motion model.
//! * [`mpc`]: receding-horizon step-length controller.
//! * [`sim`]: kinematic execution harness, seeded disturbances and
//!   tracking-error metrics.

pub mod grid;
pub mod planner;
pub mod kinematics;
pub mod mpc;
pub mod sim;

pub use grid::{GridIndex, OccupancyGrid, WorldPoint};
