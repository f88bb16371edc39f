//! Gilbert–Johnson–Keerthi minimum distance between convex shapes.
//!
//! The iteration runs on the Minkowski difference of the two shape cores.
//! The sub-simplex closest to the origin is found by enumerating every face
//! of the current simplex (at most 15 for a tetrahedron) and keeping the
//! lowest-norm affine projection whose barycentric coordinates are all
//! non-negative. That is Johnson's distance sub-algorithm without the
//! recursive determinant bookkeeping; faces whose vertices are affinely
//! dependent are skipped, which is the degeneracy guard.

use nalgebra::{Matrix3, Vector3};

use super::shape::Core;
use super::{ConvexShape, GeometryError};
use crate::Vec3;

/// Stop once the distance upper and lower bounds are this close (m).
pub const GJK_TOLERANCE: f64 = 1e-9;
pub const GJK_MAX_ITERATIONS: usize = 128;

/// Closest points between two shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separation {
    pub distance: f64,
    /// Witness on the first shape.
    pub point_a: Vec3,
    /// Witness on the second shape.
    pub point_b: Vec3,
    pub iterations: usize,
}

#[derive(Clone, Copy)]
struct Vertex {
    w: Vec3,
    a: Vec3,
    b: Vec3,
}

struct Closest {
    point: Vec3,
    /// (index into simplex, barycentric weight), weights > 0.
    weights: [(usize, f64); 4],
    len: usize,
}

pub fn gjk_distance(a: &ConvexShape, b: &ConvexShape) -> Result<Separation, GeometryError> {
    a.validate()?;
    b.validate()?;
    let core_a = Core::of(a);
    let core_b = Core::of(b);

    let (core_distance, pa, pb, iterations) = core_distance(&core_a, &core_b)?;
    let (ra, rb) = (a.radius(), b.radius());

    if core_distance > ra + rb {
        let n = (pb - pa) / core_distance;
        let point_a = pa + n * ra;
        let point_b = pb - n * rb;
        Ok(Separation {
            distance: (point_b - point_a).norm(),
            point_a,
            point_b,
            iterations,
        })
    } else {
        // Overlap: report a single contact point inside both shapes.
        let contact = if core_distance > 0.0 && ra + rb > 0.0 {
            pa + (pb - pa) * (ra / (ra + rb))
        } else {
            pa
        };
        Ok(Separation {
            distance: 0.0,
            point_a: contact,
            point_b: contact,
            iterations,
        })
    }
}

fn core_distance(a: &Core, b: &Core) -> Result<(f64, Vec3, Vec3, usize), GeometryError> {
    let initial_dir = a.vertices[0] - b.vertices[0];
    let dir = if initial_dir.norm_squared() > 0.0 {
        initial_dir
    } else {
        Vec3::x()
    };
    let first = support(a, b, &(-dir));
    let mut simplex: Vec<Vertex> = vec![first];
    let mut closest = Closest {
        point: first.w,
        weights: [(0, 1.0), (0, 0.0), (0, 0.0), (0, 0.0)],
        len: 1,
    };

    for iteration in 1..=GJK_MAX_ITERATIONS {
        let v = closest.point;
        let v_norm = v.norm();
        if v_norm <= f64::EPSILON {
            let (pa, pb) = witnesses(&simplex, &closest);
            return Ok((0.0, pa, pb, iteration));
        }

        let w = support(a, b, &(-v));
        let lower_bound = v.dot(&w.w) / v_norm;
        let converged = v_norm - lower_bound <= GJK_TOLERANCE;
        let repeated = simplex.iter().any(|s| s.w == w.w);
        if converged || repeated {
            let (pa, pb) = witnesses(&simplex, &closest);
            return Ok((v_norm, pa, pb, iteration));
        }

        simplex.push(w);
        let next = closest_on_simplex(&simplex);
        if next.point.norm_squared() >= v.norm_squared() {
            // Numerical stall: the new vertex did not improve the estimate.
            let (pa, pb) = witnesses(&simplex[..simplex.len() - 1], &closest);
            return Ok((v_norm, pa, pb, iteration));
        }

        let reduced: Vec<Vertex> = next.weights[..next.len]
            .iter()
            .map(|(i, _)| simplex[*i])
            .collect();
        let mut compact = Closest {
            point: next.point,
            weights: [(0, 0.0); 4],
            len: next.len,
        };
        for (k, (_, wt)) in next.weights[..next.len].iter().enumerate() {
            compact.weights[k] = (k, *wt);
        }
        simplex = reduced;
        closest = compact;

        if simplex.len() == 4 {
            // Full-dimensional simplex with positive weights contains the origin.
            let (pa, pb) = witnesses(&simplex, &closest);
            return Ok((0.0, pa, pb, iteration));
        }
    }

    let (pa, pb) = witnesses(&simplex, &closest);
    Err(GeometryError::IterationCap {
        iterations: GJK_MAX_ITERATIONS,
        best_distance: (pa - pb).norm(),
    })
}

fn support(a: &Core, b: &Core, dir: &Vec3) -> Vertex {
    let pa = a.support(dir);
    let pb = b.support(&(-dir));
    Vertex {
        w: pa - pb,
        a: pa,
        b: pb,
    }
}

fn witnesses(simplex: &[Vertex], closest: &Closest) -> (Vec3, Vec3) {
    let mut pa = Vec3::zeros();
    let mut pb = Vec3::zeros();
    for &(i, wt) in &closest.weights[..closest.len] {
        pa += simplex[i].a * wt;
        pb += simplex[i].b * wt;
    }
    (pa, pb)
}

/// Point of `conv(simplex)` nearest the origin, with the face that carries it.
fn closest_on_simplex(simplex: &[Vertex]) -> Closest {
    let n = simplex.len();
    let mut best: Option<Closest> = None;
    let mut best_norm = f64::INFINITY;

    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let Some(lambda) = affine_projection(simplex, &idx) else {
            continue;
        };
        if lambda.iter().any(|&l| l < 0.0) {
            continue;
        }
        let point: Vec3 = idx
            .iter()
            .zip(&lambda)
            .map(|(&i, &l)| simplex[i].w * l)
            .sum();
        let norm = point.norm_squared();
        // Prefer smaller faces on ties so the simplex stays minimal.
        let better = match &best {
            None => true,
            Some(b) => norm < best_norm || (norm == best_norm && idx.len() < b.len),
        };
        if better {
            let mut weights = [(0, 0.0); 4];
            let mut len = 0;
            for (&i, &l) in idx.iter().zip(&lambda) {
                if l > 0.0 {
                    weights[len] = (i, l);
                    len += 1;
                }
            }
            if len == 0 {
                continue;
            }
            best_norm = norm;
            best = Some(Closest {
                point,
                weights,
                len,
            });
        }
    }
    best.expect("singleton faces always yield a projection")
}

/// Barycentric coordinates of the origin's projection onto the affine hull
/// of `simplex[idx]`, or `None` when those vertices are affinely dependent.
fn affine_projection(simplex: &[Vertex], idx: &[usize]) -> Option<Vec<f64>> {
    let p0 = simplex[idx[0]].w;
    let m = idx.len() - 1;
    if m == 0 {
        return Some(vec![1.0]);
    }
    let edges: Vec<Vec3> = idx[1..].iter().map(|&i| simplex[i].w - p0).collect();
    let scale = edges.iter().map(|e| e.norm_squared()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let mut gram = Matrix3::identity();
    let mut rhs = Vector3::zeros();
    for i in 0..m {
        for j in 0..m {
            gram[(i, j)] = edges[i].dot(&edges[j]);
        }
        rhs[i] = -edges[i].dot(&p0);
    }
    let gram = gram.view((0, 0), (m, m)).into_owned();
    let det = gram.determinant();
    // Relative singularity test: det scales with scale^m.
    if det.abs() <= 1e-12 * scale.powi(m as i32) {
        return None;
    }
    let mu = gram.lu().solve(&rhs.rows(0, m).into_owned())?;
    let mut lambda = Vec::with_capacity(m + 1);
    lambda.push(1.0 - mu.iter().sum::<f64>());
    lambda.extend(mu.iter().copied());
    Some(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::RigidTransform;

    #[test]
    fn spheres_three_apart() {
        let a = ConvexShape::sphere(Vec3::zeros(), 1.0);
        let b = ConvexShape::sphere(Vec3::new(3.0, 0.0, 0.0), 1.0);
        let s = gjk_distance(&a, &b).unwrap();
        assert!((s.distance - 1.0).abs() < 1e-12);
        assert!((s.point_a - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        assert!((s.point_b - Vec3::new(2.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn identical_point_sets_overlap() {
        let pts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        let s = gjk_distance(&ConvexShape::point_set(pts.clone()), &ConvexShape::point_set(pts))
            .unwrap();
        assert_eq!(s.distance, 0.0);
        assert_eq!(s.point_a, s.point_b);
    }

    #[test]
    fn point_to_capsule_side_and_cap() {
        let cap = ConvexShape::capsule(Vec3::zeros(), Vec3::new(0.0, 0.0, 1.0), 0.1);
        let side = ConvexShape::point_set(vec![Vec3::new(0.5, 0.0, 0.4)]);
        let s = gjk_distance(&side, &cap).unwrap();
        assert!((s.distance - 0.4).abs() < 1e-12);
        let above = ConvexShape::point_set(vec![Vec3::new(0.0, 0.3, 1.4)]);
        let s = gjk_distance(&above, &cap).unwrap();
        assert!((s.distance - 0.4).abs() < 1e-12);
    }

    #[test]
    fn overlapping_capsules_share_contact_point() {
        let a = ConvexShape::capsule(Vec3::zeros(), Vec3::x(), 0.3);
        let b = ConvexShape::capsule(Vec3::new(0.5, 0.5, 0.0), Vec3::new(0.5, 0.5, 1.0), 0.3);
        let s = gjk_distance(&a, &b).unwrap();
        assert_eq!(s.distance, 0.0);
        assert_eq!(s.point_a, s.point_b);
        // Inside both shapes.
        assert!((s.point_a - Vec3::new(s.point_a.x.clamp(0.0, 1.0), 0.0, 0.0)).norm() <= 0.3 + 1e-12);
    }

    #[test]
    fn crossing_segments() {
        // Skew segments with closest points in both interiors.
        let a = ConvexShape::capsule(Vec3::new(-1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), 0.0);
        let b = ConvexShape::capsule(Vec3::new(0.2, -1.0, 0.7), Vec3::new(0.2, 1.0, 0.7), 0.0);
        let s = gjk_distance(&a, &b).unwrap();
        assert!((s.distance - 0.7).abs() < 1e-12);
        assert!((s.point_a - Vec3::new(0.2, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn pose_is_applied() {
        let a = ConvexShape::sphere(Vec3::zeros(), 0.5);
        let b = ConvexShape::capsule(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), 0.5)
            .with_pose(RigidTransform::from_translation(Vec3::new(0.0, 0.0, 3.0)));
        let s = gjk_distance(&a, &b).unwrap();
        assert!((s.distance - 2.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_shapes_are_rejected() {
        let good = ConvexShape::sphere(Vec3::zeros(), 1.0);
        assert!(gjk_distance(&good, &ConvexShape::point_set(vec![])).is_err());
        assert!(gjk_distance(&good, &ConvexShape::point_set(vec![Vec3::new(f64::NAN, 0.0, 0.0)]))
            .is_err());
        assert!(gjk_distance(&good, &ConvexShape::sphere(Vec3::zeros(), -1.0)).is_err());
    }
}
