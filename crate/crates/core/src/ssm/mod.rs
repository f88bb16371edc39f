//! Speed and separation monitoring core: directed robot velocity, protective
//! separation distance, speed scaling and its jerk-limited application.

mod config;
mod controller;
mod scaling;
mod velocity;

pub use config::{RobotTerm, SsmConfig};
pub use controller::{controller_step, controller_tick, Fault, SsmOutput};
pub use scaling::{
    jerk_limited_scale, jerk_limited_step, safety_distance, speed_scaling, JerkLimits, ScalingState,
};
pub use velocity::{
    directed_robot_velocity, directed_rotation, DirectedSample, DirectedVelocity, MIN_SEPARATION,
};

use crate::kinematics::KinematicsError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SsmError {
    #[error("joint state is {skew_ns} ns away from the scene (tolerance {tolerance_s} s)")]
    Sync { skew_ns: i64, tolerance_s: f64 },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("invalid SSM config: {0}")]
    Config(String),
}
