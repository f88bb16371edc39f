use std::path::Path;

use nalgebra::{Matrix3, Matrix6xX};
use serde::{Deserialize, Serialize};

use super::{KinematicsError, RigidTransform};
use crate::{TimestampNs, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    #[default]
    Revolute,
    Prismatic,
}

/// One row of a standard Denavit–Hartenberg table.
///
/// The transform from frame `i-1` to frame `i` is
/// `Rz(theta_offset + q) · Tz(d) · Tx(a) · Rx(alpha)` for a revolute joint and
/// `Rz(theta_offset) · Tz(d + q) · Tx(a) · Rx(alpha)` for a prismatic one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DhJoint {
    pub a: f64,
    pub d: f64,
    pub alpha: f64,
    #[serde(default)]
    pub theta_offset: f64,
    #[serde(default)]
    pub kind: JointKind,
    /// `[lo, hi]` in rad (or m for prismatic joints).
    pub limits: [f64; 2],
}

impl DhJoint {
    fn local_transform(&self, q: f64) -> RigidTransform {
        let (theta, d) = match self.kind {
            JointKind::Revolute => (self.theta_offset + q, self.d),
            JointKind::Prismatic => (self.theta_offset, self.d + q),
        };
        let (st, ct) = theta.sin_cos();
        let (sa, ca) = self.alpha.sin_cos();
        let rotation = Matrix3::new(
            ct,
            -st * ca,
            st * sa,
            st,
            ct * ca,
            -ct * sa,
            0.0,
            sa,
            ca,
        );
        RigidTransform::from_parts_unchecked(rotation, Vec3::new(self.a * ct, self.a * st, d))
    }
}

/// Serial kinematic chain loaded from a parameter file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RobotModelRepr", into = "RobotModelRepr")]
pub struct RobotModel {
    name: String,
    joints: Vec<DhJoint>,
    base_pose: RigidTransform,
    velocity_limits: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RobotModelRepr {
    #[serde(default)]
    name: String,
    joints: Vec<DhJoint>,
    #[serde(default)]
    base_pose: RigidTransform,
    velocity_limits: Vec<f64>,
}

impl TryFrom<RobotModelRepr> for RobotModel {
    type Error = KinematicsError;

    fn try_from(r: RobotModelRepr) -> Result<Self, Self::Error> {
        RobotModel::new(r.name, r.joints, r.base_pose, r.velocity_limits)
    }
}

impl From<RobotModel> for RobotModelRepr {
    fn from(m: RobotModel) -> Self {
        RobotModelRepr {
            name: m.name,
            joints: m.joints,
            base_pose: m.base_pose,
            velocity_limits: m.velocity_limits,
        }
    }
}

/// Parameter file of the UR10 shipped with the crate.
pub const UR10_JSON: &str = include_str!("../../config/ur10.json");

impl RobotModel {
    pub fn new(
        name: impl Into<String>,
        joints: Vec<DhJoint>,
        base_pose: RigidTransform,
        velocity_limits: Vec<f64>,
    ) -> Result<Self, KinematicsError> {
        if joints.is_empty() {
            return Err(KinematicsError::InvalidModel("robot has no joints".into()));
        }
        if velocity_limits.len() != joints.len() {
            return Err(KinematicsError::InvalidModel(format!(
                "{} velocity limits for {} joints",
                velocity_limits.len(),
                joints.len()
            )));
        }
        for (i, j) in joints.iter().enumerate() {
            let finite = [j.a, j.d, j.alpha, j.theta_offset]
                .iter()
                .all(|v| v.is_finite());
            if !finite {
                return Err(KinematicsError::InvalidModel(format!(
                    "joint {i} has non-finite DH parameters"
                )));
            }
            if !(j.limits[0] < j.limits[1]) {
                return Err(KinematicsError::InvalidModel(format!(
                    "joint {i} limits are not ordered: {:?}",
                    j.limits
                )));
            }
        }
        if let Some(i) = velocity_limits.iter().position(|v| !(*v > 0.0)) {
            return Err(KinematicsError::InvalidModel(format!(
                "joint {i} velocity limit must be positive"
            )));
        }
        Ok(Self {
            name: name.into(),
            joints,
            base_pose,
            velocity_limits,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, KinematicsError> {
        serde_json::from_str(text).map_err(|e| KinematicsError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, KinematicsError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| KinematicsError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
            .map_err(|e| KinematicsError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn ur10() -> Self {
        Self::from_json(UR10_JSON).expect("bundled UR10 parameters are valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[DhJoint] {
        &self.joints
    }

    pub fn base_pose(&self) -> &RigidTransform {
        &self.base_pose
    }

    pub fn velocity_limits(&self) -> &[f64] {
        &self.velocity_limits
    }

    /// Same chain with a different base pose in the world.
    pub fn with_base_pose(mut self, base_pose: RigidTransform) -> Self {
        self.base_pose = base_pose;
        self
    }

    fn check_dims(&self, what: &'static str, len: usize) -> Result<(), KinematicsError> {
        if len != self.dof() {
            return Err(KinematicsError::DimensionMismatch {
                what,
                expected: self.dof(),
                got: len,
            });
        }
        Ok(())
    }
}

/// World-frame poses of every frame of the chain for one configuration.
///
/// `frames[0]` is the base frame, `frames[i]` is the frame carried by joint
/// `i` (1-based), and the last entry is the tool flange.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardKinematics {
    pub frames: Vec<RigidTransform>,
}

impl ForwardKinematics {
    pub fn flange(&self) -> &RigidTransform {
        self.frames.last().expect("at least the base frame")
    }
}

pub fn forward_kinematics(model: &RobotModel, q: &[f64]) -> Result<ForwardKinematics, KinematicsError> {
    model.check_dims("joint positions", q.len())?;
    if q.iter().any(|v| !v.is_finite()) {
        return Err(KinematicsError::NonFinite("joint positions"));
    }
    let mut frames = Vec::with_capacity(model.dof() + 1);
    let mut current = model.base_pose;
    frames.push(current);
    for (joint, &qi) in model.joints.iter().zip(q) {
        current = current.compose(&joint.local_transform(qi));
        frames.push(current);
    }
    Ok(ForwardKinematics { frames })
}

/// World-frame geometric Jacobian (linear rows on top) of a point rigidly
/// attached to frame `link` of the chain (`0` = base, `dof()` = flange).
///
/// `[v; ω] = J · q̇` gives the linear velocity of `point` and the angular
/// velocity of the link, both in world coordinates.
pub fn geometric_jacobian(
    model: &RobotModel,
    q: &[f64],
    link: usize,
    point: &Vec3,
) -> Result<Matrix6xX<f64>, KinematicsError> {
    let fk = forward_kinematics(model, q)?;
    geometric_jacobian_from_fk(model, &fk, link, point)
}

/// As [`geometric_jacobian`], reusing an already evaluated FK.
pub fn geometric_jacobian_from_fk(
    model: &RobotModel,
    fk: &ForwardKinematics,
    link: usize,
    point: &Vec3,
) -> Result<Matrix6xX<f64>, KinematicsError> {
    if link > model.dof() {
        return Err(KinematicsError::InvalidLink {
            link,
            links: model.dof() + 1,
        });
    }
    if !point.iter().all(|v| v.is_finite()) {
        return Err(KinematicsError::NonFinite("attach point"));
    }
    let mut jac = Matrix6xX::zeros(model.dof());
    for (j, joint) in model.joints.iter().enumerate().take(link) {
        let parent = &fk.frames[j];
        let axis = parent.rotation().column(2).into_owned();
        let (lin, ang) = match joint.kind {
            JointKind::Revolute => (axis.cross(&(point - parent.translation())), axis),
            JointKind::Prismatic => (axis, Vec3::zeros()),
        };
        jac.fixed_view_mut::<3, 1>(0, j).copy_from(&lin);
        jac.fixed_view_mut::<3, 1>(3, j).copy_from(&ang);
    }
    Ok(jac)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
    pub timestamp_ns: TimestampNs,
}

impl JointState {
    pub fn new(q: Vec<f64>, qd: Vec<f64>, timestamp_ns: TimestampNs) -> Self {
        Self {
            q,
            qd,
            timestamp_ns,
        }
    }

    pub fn validate(&self, model: &RobotModel) -> Result<(), KinematicsError> {
        model.check_dims("joint positions", self.q.len())?;
        model.check_dims("joint velocities", self.qd.len())?;
        if self.q.iter().chain(&self.qd).any(|v| !v.is_finite()) {
            return Err(KinematicsError::NonFinite("joint state"));
        }
        Ok(())
    }

    /// Indices of joints outside their position or velocity limits. Limits are
    /// soft: violations are logged, not rejected.
    pub fn limit_violations(&self, model: &RobotModel) -> Vec<usize> {
        let violations: Vec<usize> = model
            .joints
            .iter()
            .zip(&model.velocity_limits)
            .enumerate()
            .filter(|(i, (joint, vmax))| {
                let q = self.q.get(*i).copied().unwrap_or(0.0);
                let qd = self.qd.get(*i).copied().unwrap_or(0.0);
                q < joint.limits[0] || q > joint.limits[1] || qd.abs() > **vmax
            })
            .map(|(i, _)| i)
            .collect();
        if !violations.is_empty() {
            tracing::warn!(joints = ?violations, "joint state outside soft limits");
        }
        violations
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn one_link(length: f64) -> RobotModel {
        RobotModel::new(
            "planar",
            vec![DhJoint {
                a: length,
                d: 0.0,
                alpha: 0.0,
                theta_offset: 0.0,
                kind: JointKind::Revolute,
                limits: [-3.0, 3.0],
            }],
            RigidTransform::identity(),
            vec![1.0],
        )
        .unwrap()
    }

    #[test]
    fn home_pose_of_single_link() {
        let fk = forward_kinematics(&one_link(0.7), &[0.0]).unwrap();
        assert_eq!(fk.frames.len(), 2);
        assert!((fk.flange().translation() - Vec3::new(0.7, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn quarter_turn_of_single_link() {
        let fk = forward_kinematics(&one_link(0.7), &[FRAC_PI_2]).unwrap();
        let end = fk.flange();
        assert!((end.translation() - Vec3::new(0.0, 0.7, 0.0)).norm() < 1e-15);
        assert!((end.transform_vector(&Vec3::x()) - Vec3::y()).norm() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let err = forward_kinematics(&RobotModel::ur10(), &[0.0; 5]).unwrap_err();
        assert!(matches!(err, KinematicsError::DimensionMismatch { expected: 6, got: 5, .. }));
    }

    #[test]
    fn jacobian_rejects_bad_link() {
        let m = one_link(1.0);
        assert!(matches!(
            geometric_jacobian(&m, &[0.0], 2, &Vec3::zeros()),
            Err(KinematicsError::InvalidLink { link: 2, .. })
        ));
    }

    #[test]
    fn point_speed_on_revolute_joint_is_radius_times_rate() {
        let m = one_link(1.0);
        let r = 0.35;
        let p = Vec3::new(r * 0.6, r * 0.8, 0.0);
        let jac = geometric_jacobian(&m, &[0.3], 1, &p).unwrap();
        let twist = jac * nalgebra::DVector::from_vec(vec![-2.5]);
        let v = Vec3::new(twist[0], twist[1], twist[2]);
        assert!((v.norm() - r * 2.5).abs() < 1e-14);
        assert!(v.dot(&p).abs() < 1e-14);
    }

    #[test]
    fn prismatic_joint_moves_along_axis() {
        let m = RobotModel::new(
            "slider",
            vec![DhJoint {
                a: 0.0,
                d: 0.1,
                alpha: 0.0,
                theta_offset: 0.0,
                kind: JointKind::Prismatic,
                limits: [0.0, 1.0],
            }],
            RigidTransform::identity(),
            vec![0.5],
        )
        .unwrap();
        let fk = forward_kinematics(&m, &[0.4]).unwrap();
        assert!((fk.flange().translation().z - 0.5).abs() < 1e-15);
        let jac = geometric_jacobian(&m, &[0.4], 1, &Vec3::new(1.0, 0.0, 0.5)).unwrap();
        assert_eq!(jac.column(0).into_owned(), nalgebra::Vector6::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn model_validation() {
        let bad = RobotModel::new("x", vec![], RigidTransform::identity(), vec![]);
        assert!(bad.is_err());
        let mut joint = one_link(1.0).joints()[0].clone();
        joint.limits = [1.0, -1.0];
        assert!(RobotModel::new("x", vec![joint], RigidTransform::identity(), vec![1.0]).is_err());
    }

    #[test]
    fn soft_limits_are_reported_not_rejected() {
        let m = one_link(1.0);
        let js = JointState::new(vec![4.0], vec![0.0], 0);
        assert!(js.validate(&m).is_ok());
        assert_eq!(js.limit_violations(&m), vec![0]);
    }
}
