use nalgebra::{DVector, Matrix6xX};

use super::{transform::check_rotation, KinematicsError, RigidTransform};
use crate::Vec3;

/// Frame tag used for world-frame twists.
pub const WORLD: &str = "world";

/// Linear (m/s) and angular (rad/s) velocity, tagged with the frame whose
/// axes the components are expressed in.
#[derive(Debug, Clone, PartialEq)]
pub struct Twist {
    pub linear: Vec3,
    pub angular: Vec3,
    pub frame: String,
}

impl Twist {
    pub fn new(linear: Vec3, angular: Vec3, frame: impl Into<String>) -> Self {
        Self {
            linear,
            angular,
            frame: frame.into(),
        }
    }

    /// `J · q̇` for a world-frame Jacobian.
    pub fn from_jacobian(jac: &Matrix6xX<f64>, qd: &[f64]) -> Result<Self, KinematicsError> {
        if jac.ncols() != qd.len() {
            return Err(KinematicsError::DimensionMismatch {
                what: "joint velocities",
                expected: jac.ncols(),
                got: qd.len(),
            });
        }
        let v = jac * DVector::from_column_slice(qd);
        Ok(Self::new(
            Vec3::new(v[0], v[1], v[2]),
            Vec3::new(v[3], v[4], v[5]),
            WORLD,
        ))
    }

    /// Re-express this twist in the axes of `target` (a pose given in the
    /// twist's current frame).
    ///
    /// The linear part is the velocity of a specific point, i.e. a free
    /// vector, so only the rotation of `target` acts on it: both components
    /// become `Rᵀ·v`. The translation of `target` only locates the new frame.
    pub fn reexpress(
        &self,
        target: &RigidTransform,
        frame: impl Into<String>,
    ) -> Result<Twist, KinematicsError> {
        check_rotation(target.rotation())?;
        let rt = target.rotation().transpose();
        Ok(Twist::new(rt * self.linear, rt * self.angular, frame))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn identity_leaves_twist_unchanged() {
        let t = Twist::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.5, 0.0), WORLD);
        let r = t.reexpress(&RigidTransform::identity(), "h").unwrap();
        assert_eq!(r.linear, t.linear);
        assert_eq!(r.angular, t.angular);
        assert_eq!(r.frame, "h");
    }

    #[test]
    fn quarter_turn_about_z() {
        let t = Twist::new(Vec3::x(), Vec3::zeros(), WORLD);
        let frame = RigidTransform::from_axis_angle(&Vec3::z(), FRAC_PI_2);
        let r = t.reexpress(&frame, "local").unwrap();
        assert!((r.linear - Vec3::new(0.0, -1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn round_trip_through_inverse() {
        let t = Twist::new(Vec3::new(0.3, -0.2, 0.9), Vec3::new(1.0, 2.0, -0.5), WORLD);
        let frame = RigidTransform::from_axis_angle(&Vec3::new(0.2, 1.0, -0.4), 1.1)
            * RigidTransform::from_translation(Vec3::new(1.0, 2.0, 3.0));
        let back = t
            .reexpress(&frame, "a")
            .and_then(|a| a.reexpress(&frame.inverse(), WORLD))
            .unwrap();
        assert!((back.linear - t.linear).norm() < 1e-12);
        assert!((back.angular - t.angular).norm() < 1e-12);
    }

    #[test]
    fn jacobian_width_must_match() {
        let jac = Matrix6xX::zeros(3);
        assert!(Twist::from_jacobian(&jac, &[0.0; 2]).is_err());
    }
}
