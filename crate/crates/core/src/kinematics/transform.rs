use nalgebra::{Matrix3, Matrix4, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use super::KinematicsError;
use crate::Vec3;

/// Orthonormality tolerance on `RᵀR − I`.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// Proper rigid transform (rotation + translation in metres).
///
/// Construction through [`RigidTransform::new`] checks that the rotation is
/// orthonormal with determinant +1, so every value of this type is a valid
/// element of SE(3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TransformRepr", into = "TransformRepr")]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vec3,
}

impl RigidTransform {
    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Result<Self, KinematicsError> {
        check_rotation(&rotation)?;
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(KinematicsError::NonFinite("translation"));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    /// Rotation of `angle` radians about the unit `axis`, no translation.
    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Self {
        let rot = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(*axis), angle);
        Self {
            rotation: *rot.matrix(),
            translation: Vec3::zeros(),
        }
    }

    pub fn from_homogeneous(m: &Matrix4<f64>) -> Result<Self, KinematicsError> {
        let bottom = m.fixed_view::<1, 4>(3, 0);
        if (bottom[(0, 0)].abs() + bottom[(0, 1)].abs() + bottom[(0, 2)].abs()) > ORTHONORMAL_TOL
            || (bottom[(0, 3)] - 1.0).abs() > ORTHONORMAL_TOL
        {
            return Err(KinematicsError::NotRigid("bottom row is not [0 0 0 1]".into()));
        }
        Self::new(
            m.fixed_view::<3, 3>(0, 0).into_owned(),
            m.fixed_view::<3, 1>(0, 3).into_owned(),
        )
    }

    /// Used internally where the rotation is orthonormal by construction.
    pub(crate) fn from_parts_unchecked(rotation: Matrix3<f64>, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`: first apply `other`, then `self`.
    pub fn compose(&self, other: &RigidTransform) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// Re-validates the rotation; useful after deserialising or arithmetic.
    pub fn validate(&self) -> Result<(), KinematicsError> {
        check_rotation(&self.rotation)
    }
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl std::ops::Mul for RigidTransform {
    type Output = RigidTransform;

    fn mul(self, rhs: RigidTransform) -> RigidTransform {
        self.compose(&rhs)
    }
}

pub(crate) fn check_rotation(r: &Matrix3<f64>) -> Result<(), KinematicsError> {
    if !r.iter().all(|v| v.is_finite()) {
        return Err(KinematicsError::NonFinite("rotation"));
    }
    let err = (r.transpose() * r - Matrix3::identity()).abs().max();
    if err > ORTHONORMAL_TOL {
        return Err(KinematicsError::NotRigid(format!(
            "rotation is not orthonormal (max |RᵀR − I| = {err:e})"
        )));
    }
    let det = r.determinant();
    if det < 0.0 {
        return Err(KinematicsError::NotRigid(format!(
            "rotation is improper (det = {det})"
        )));
    }
    Ok(())
}

/// Serialized form: `{"rotation": [[r00,r01,r02],...], "translation": [x,y,z]}`.
/// `rpy` (roll, pitch, yaw in radians, applied as Rz·Ry·Rx) may replace
/// `rotation`.
#[derive(Serialize, Deserialize)]
struct TransformRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rotation: Option<[[f64; 3]; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rpy: Option<[f64; 3]>,
    #[serde(default)]
    translation: [f64; 3],
}

impl TryFrom<TransformRepr> for RigidTransform {
    type Error = KinematicsError;

    fn try_from(repr: TransformRepr) -> Result<Self, Self::Error> {
        let rotation = match (repr.rotation, repr.rpy) {
            (Some(_), Some(_)) => {
                return Err(KinematicsError::NotRigid(
                    "give either `rotation` or `rpy`, not both".into(),
                ))
            }
            (Some(rows), None) => Matrix3::from_fn(|i, j| rows[i][j]),
            (None, Some([roll, pitch, yaw])) => {
                *Rotation3::from_euler_angles(roll, pitch, yaw).matrix()
            }
            (None, None) => Matrix3::identity(),
        };
        RigidTransform::new(rotation, Vector3::from(repr.translation))
    }
}

impl From<RigidTransform> for TransformRepr {
    fn from(t: RigidTransform) -> Self {
        let r = t.rotation;
        TransformRepr {
            rotation: Some([
                [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
                [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
                [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
            ]),
            rpy: None,
            translation: [t.translation.x, t.translation.y, t.translation.z],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_scaled_rotation() {
        let err = RigidTransform::new(Matrix3::identity() * 2.0, Vec3::zeros()).unwrap_err();
        assert!(matches!(err, KinematicsError::NotRigid(_)));
    }

    #[test]
    fn rejects_reflection() {
        let m = Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        assert!(RigidTransform::new(m, Vec3::zeros()).is_err());
    }

    #[test]
    fn inverse_composes_to_identity() {
        let t = RigidTransform::from_axis_angle(&Vec3::new(1.0, 2.0, 3.0), 0.7)
            * RigidTransform::from_translation(Vec3::new(0.3, -1.0, 2.0));
        let id = t.compose(&t.inverse());
        assert!((id.to_homogeneous() - Matrix4::identity()).abs().max() < 1e-12);
    }

    #[test]
    fn serde_accepts_rpy() {
        let t: RigidTransform =
            serde_json::from_str(r#"{"rpy": [0, 0, 1.5707963267948966], "translation": [1, 2, 3]}"#)
                .unwrap();
        let x = t.transform_vector(&Vec3::x());
        assert!((x - Vec3::y()).norm() < 1e-12);
        assert_eq!(t.translation(), &Vec3::new(1.0, 2.0, 3.0));
        let back: RigidTransform =
            serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }
}
