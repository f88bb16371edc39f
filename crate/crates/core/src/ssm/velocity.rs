use nalgebra::Matrix3;

use super::SsmError;
use crate::geometry::ClosestPair;
use crate::kinematics::{geometric_jacobian, JointState, RigidTransform, RobotModel, Twist};
use crate::{TimestampNs, Vec3};

/// Separations shorter than this have no usable direction (m).
pub const MIN_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DirectedSample {
    /// Speed of the robot's closest point along the separation, positive when
    /// approaching the human (m/s).
    pub v_robot: f64,
    /// Directed frame at the human point: z along `S`, columns `[r u f]`.
    pub human_frame: RigidTransform,
    /// Closest-point twist in world axes.
    pub twist: Twist,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DirectedVelocity {
    Valid(DirectedSample),
    /// The separation vector has no direction (zero length or non-finite).
    Invalid,
}

impl DirectedVelocity {
    pub fn value(&self) -> Option<f64> {
        match self {
            DirectedVelocity::Valid(s) => Some(s.v_robot),
            DirectedVelocity::Invalid => None,
        }
    }
}

/// Rotation whose z axis is `f`, x axis `normalize(ẑ × f)` (or `x̂ × f` when
/// `f` is vertical) and y axis `f × r`.
pub fn directed_rotation(f: &Vec3) -> Matrix3<f64> {
    let mut r = Vec3::z().cross(f);
    if r.norm() < 1e-9 {
        r = Vec3::x().cross(f);
    }
    let r = r.normalize();
    let u = f.cross(&r);
    Matrix3::from_columns(&[r, u, *f])
}

/// Signed speed of the robot's closest point toward the human.
///
/// The joint state must be within `max_skew_s` of `pair_timestamp_ns`, the
/// time of the configuration the closest pair was computed for.
pub fn directed_robot_velocity(
    pair: &ClosestPair,
    pair_timestamp_ns: TimestampNs,
    state: &JointState,
    model: &RobotModel,
    max_skew_s: f64,
) -> Result<DirectedVelocity, SsmError> {
    let skew_ns = (state.timestamp_ns as i128 - pair_timestamp_ns as i128).unsigned_abs();
    if skew_ns as f64 > max_skew_s * 1e9 {
        return Err(SsmError::Sync {
            skew_ns: skew_ns.min(i64::MAX as u128) as i64,
            tolerance_s: max_skew_s,
        });
    }
    let s = pair.separation();
    let len = s.norm();
    if !(len.is_finite() && len >= MIN_SEPARATION) || !pair.robot_point.iter().all(|v| v.is_finite()) {
        return Ok(DirectedVelocity::Invalid);
    }
    let f = s / len;
    let rotation = directed_rotation(&f);
    let human_frame = RigidTransform::new(rotation, pair.robot_point + f * len)?;

    let jac = geometric_jacobian(model, &state.q, pair.robot_link, &pair.robot_point)?;
    let twist = Twist::from_jacobian(&jac, &state.qd)?;
    let local = twist.reexpress(&human_frame, "human")?;
    let v_z = local.linear.z;
    Ok(DirectedVelocity::Valid(DirectedSample {
        v_robot: v_z,
        human_frame,
        twist,
    }))
}
