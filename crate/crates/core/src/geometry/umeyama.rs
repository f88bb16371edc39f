use nalgebra::{Matrix3, SVD};

use super::GeometryError;
use crate::kinematics::RigidTransform;
use crate::Vec3;

/// Rigid transform mapping source points onto destination points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub transform: RigidTransform,
    /// Root-mean-square of `‖T·src_i − dst_i‖`.
    pub rms_residual: f64,
}

/// Least-squares rigid alignment (rotation + translation, no scale) of
/// corresponding point sets, after Umeyama.
///
/// The rotation comes from the SVD of the cross-covariance `Σ (d_i − d̄)(s_i − s̄)ᵀ`;
/// when `det(U)·det(V) < 0` the last singular direction is flipped so the
/// result is a proper rotation even for reflected data.
pub fn umeyama_align(src: &[Vec3], dst: &[Vec3]) -> Result<Alignment, GeometryError> {
    if src.len() != dst.len() {
        return Err(GeometryError::LengthMismatch {
            src: src.len(),
            dst: dst.len(),
        });
    }
    if src.len() < 3 {
        return Err(GeometryError::TooFewPoints {
            needed: 3,
            got: src.len(),
        });
    }
    if !src.iter().chain(dst).all(|p| p.iter().all(|c| c.is_finite())) {
        return Err(GeometryError::NonFinite("alignment points"));
    }

    let n = src.len() as f64;
    let src_mean = src.iter().sum::<Vec3>() / n;
    let dst_mean = dst.iter().sum::<Vec3>() / n;

    let mut cov = Matrix3::zeros();
    for (s, d) in src.iter().zip(dst) {
        cov += (d - dst_mean) * (s - src_mean).transpose();
    }
    cov /= n;

    let svd = SVD::new(cov, true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    let sv = svd.singular_values;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let (largest, middle) = (sv[order[0]], sv[order[1]]);
    // Rank ≥ 2 is needed for a unique rotation (collinear data is rank 1).
    if !(largest > 0.0) || middle <= 1e-12 * largest {
        return Err(GeometryError::Degenerate(
            "cross-covariance has rank < 2 (points are coincident or collinear)".into(),
        ));
    }

    let mut correction = Matrix3::identity();
    if u.determinant() * v_t.determinant() < 0.0 {
        // Flip the direction of the smallest singular value.
        correction[(order[2], order[2])] = -1.0;
    }
    let rotation = u * correction * v_t;
    let translation = dst_mean - rotation * src_mean;
    let transform = RigidTransform::new(rotation, translation)
        .map_err(|e| GeometryError::Degenerate(e.to_string()))?;

    let sq: f64 = src
        .iter()
        .zip(dst)
        .map(|(s, d)| (transform.transform_point(s) - d).norm_squared())
        .sum();
    Ok(Alignment {
        transform,
        rms_residual: (sq / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> Vec<Vec3> {
        vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 2.0, 0.0),
            Vec3::new(0.0, 0.0, 3.0),
            Vec3::new(0.5, 0.5, 0.5),
        ]
    }

    #[test]
    fn identity_on_equal_sets() {
        let pts = tetra();
        let a = umeyama_align(&pts, &pts).unwrap();
        assert!((a.transform.to_homogeneous() - nalgebra::Matrix4::identity()).abs().max() < 1e-12);
        assert!(a.rms_residual < 1e-12);
    }

    #[test]
    fn mirrored_data_still_gives_proper_rotation() {
        let src = tetra();
        let dst: Vec<Vec3> = src.iter().map(|p| Vec3::new(-p.x, p.y, p.z)).collect();
        let a = umeyama_align(&src, &dst).unwrap();
        assert!((a.transform.rotation().determinant() - 1.0).abs() < 1e-12);
        assert!(a.rms_residual > 0.0);
    }

    #[test]
    fn planar_points_are_enough() {
        let src = vec![Vec3::zeros(), Vec3::x(), Vec3::y()];
        let t = RigidTransform::from_axis_angle(&Vec3::new(1.0, 1.0, 0.0), 0.8)
            * RigidTransform::from_translation(Vec3::new(0.1, 0.2, 0.3));
        let dst: Vec<Vec3> = src.iter().map(|p| t.transform_point(p)).collect();
        let a = umeyama_align(&src, &dst).unwrap();
        assert!((a.transform.rotation() - t.rotation()).abs().max() < 1e-12);
    }

    #[test]
    fn error_paths() {
        let two = vec![Vec3::zeros(), Vec3::x()];
        assert!(matches!(
            umeyama_align(&two, &two),
            Err(GeometryError::TooFewPoints { .. })
        ));
        let line: Vec<Vec3> = (0..5).map(|i| Vec3::x() * i as f64).collect();
        assert!(matches!(umeyama_align(&line, &line), Err(GeometryError::Degenerate(_))));
        assert!(matches!(
            umeyama_align(&tetra(), &tetra()[..4]),
            Err(GeometryError::LengthMismatch { .. })
        ));
    }
}
