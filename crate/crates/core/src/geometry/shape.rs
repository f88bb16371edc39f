use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::kinematics::RigidTransform;
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    /// Ball of `radius` centred at the local origin.
    Sphere { radius: f64 },
    /// Segment `p0`–`p1` (local coordinates) swept by a ball of `radius`.
    Capsule { p0: Vec3, p1: Vec3, radius: f64 },
    /// Convex hull of the listed points, used through its support function.
    ConvexPointSet { points: Vec<Vec3> },
}

/// Convex shape with a pose in the world.
///
/// Each shape is a "core" (point, segment or point set) inflated by a radius.
/// GJK runs on the cores and the radii are applied afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexShape {
    pub kind: ShapeKind,
    #[serde(default)]
    pub pose: RigidTransform,
}

impl ConvexShape {
    pub fn sphere(center: Vec3, radius: f64) -> Self {
        Self {
            kind: ShapeKind::Sphere { radius },
            pose: RigidTransform::from_translation(center),
        }
    }

    pub fn capsule(p0: Vec3, p1: Vec3, radius: f64) -> Self {
        Self {
            kind: ShapeKind::Capsule { p0, p1, radius },
            pose: RigidTransform::identity(),
        }
    }

    pub fn point_set(points: Vec<Vec3>) -> Self {
        Self {
            kind: ShapeKind::ConvexPointSet { points },
            pose: RigidTransform::identity(),
        }
    }

    pub fn with_pose(mut self, pose: RigidTransform) -> Self {
        self.pose = pose;
        self
    }

    pub fn radius(&self) -> f64 {
        match &self.kind {
            ShapeKind::Sphere { radius } | ShapeKind::Capsule { radius, .. } => *radius,
            ShapeKind::ConvexPointSet { .. } => 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let finite = |v: &Vec3| v.iter().all(|c| c.is_finite());
        match &self.kind {
            ShapeKind::Sphere { radius } => check_radius(*radius)?,
            ShapeKind::Capsule { p0, p1, radius } => {
                check_radius(*radius)?;
                if !finite(p0) || !finite(p1) {
                    return Err(GeometryError::NonFinite("capsule endpoint"));
                }
            }
            ShapeKind::ConvexPointSet { points } => {
                if points.is_empty() {
                    return Err(GeometryError::InvalidShape("empty point set".into()));
                }
                if !points.iter().all(finite) {
                    return Err(GeometryError::NonFinite("point set"));
                }
            }
        }
        Ok(())
    }

    /// World-frame vertices of the core.
    pub(crate) fn core_vertices(&self) -> Vec<Vec3> {
        match &self.kind {
            ShapeKind::Sphere { .. } => vec![*self.pose.translation()],
            ShapeKind::Capsule { p0, p1, .. } => vec![
                self.pose.transform_point(p0),
                self.pose.transform_point(p1),
            ],
            ShapeKind::ConvexPointSet { points } => {
                points.iter().map(|p| self.pose.transform_point(p)).collect()
            }
        }
    }

    /// Support function `h(d) = max_{x ∈ shape} d·x` of the full (inflated)
    /// shape, in world coordinates.
    pub fn support_value(&self, dir: &Vec3) -> f64 {
        let core = self
            .core_vertices()
            .iter()
            .map(|p| p.dot(dir))
            .fold(f64::NEG_INFINITY, f64::max);
        core + self.radius() * dir.norm()
    }
}

fn check_radius(r: f64) -> Result<(), GeometryError> {
    if !r.is_finite() || r < 0.0 {
        return Err(GeometryError::InvalidShape(format!(
            "radius must be finite and non-negative, got {r}"
        )));
    }
    Ok(())
}

/// Core vertices in world coordinates, ready for repeated support queries.
pub(crate) struct Core {
    pub vertices: Vec<Vec3>,
}

impl Core {
    pub fn of(shape: &ConvexShape) -> Self {
        Self {
            vertices: shape.core_vertices(),
        }
    }

    /// Vertex maximising `dir · x`; ties resolve to the lowest index.
    pub fn support(&self, dir: &Vec3) -> Vec3 {
        let mut best = self.vertices[0];
        let mut best_dot = best.dot(dir);
        for v in &self.vertices[1..] {
            let d = v.dot(dir);
            if d > best_dot {
                best = *v;
                best_dot = d;
            }
        }
        best
    }
}
