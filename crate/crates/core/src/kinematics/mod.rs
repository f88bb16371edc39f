//! Serial-chain robot kinematics: DH model, forward kinematics, geometric
//! Jacobians and twists.

mod robot;
mod transform;
mod twist;

pub use robot::{
    forward_kinematics, geometric_jacobian, geometric_jacobian_from_fk, DhJoint,
    ForwardKinematics, JointKind, JointState, RobotModel, UR10_JSON,
};
pub use transform::{RigidTransform, ORTHONORMAL_TOL};
pub use twist::{Twist, WORLD};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KinematicsError {
    #[error("{what}: expected {expected} values, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("link index {link} out of range (chain has {links} frames)")]
    InvalidLink { link: usize, links: usize },
    #[error("not a rigid transform: {0}")]
    NotRigid(String),
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("invalid robot model: {0}")]
    InvalidModel(String),
    #[error("robot parameter file: {0}")]
    Parse(String),
}
