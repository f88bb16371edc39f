use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{gjk_distance, ConvexShape, GeometryError, Separation};
use crate::kinematics::{forward_kinematics, ForwardKinematics, RobotModel};
use crate::{TimestampNs, Vec3};

/// Default capsule radius for UR10-class links (m).
pub const DEFAULT_LINK_RADIUS: f64 = 0.06;

/// Capsule rigidly attached to frame `link_index` of the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkCapsule {
    pub link_index: usize,
    pub p0_local: Vec3,
    pub p1_local: Vec3,
    pub radius: f64,
}

/// Collision geometry for every link of a robot, as stored in the
/// link-geometry JSON file (an array of [`LinkCapsule`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkGeometry {
    pub capsules: Vec<LinkCapsule>,
}

impl LinkGeometry {
    /// One capsule per link, spanning the origin of the previous frame to the
    /// origin of the link's own frame. With standard DH parameters the previous
    /// origin is fixed in the link frame, so the segment is rigid.
    pub fn from_frame_origins(model: &RobotModel, radius: f64) -> Self {
        let zero = vec![0.0; model.dof()];
        let fk = forward_kinematics(model, &zero).expect("zero configuration is valid");
        let capsules = (1..=model.dof())
            .map(|i| {
                let prev_origin = *fk.frames[i - 1].translation();
                LinkCapsule {
                    link_index: i,
                    p0_local: fk.frames[i].inverse().transform_point(&prev_origin),
                    p1_local: Vec3::zeros(),
                    radius,
                }
            })
            .collect();
        Self { capsules }
    }

    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        serde_json::from_str(text).map_err(|e| GeometryError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, GeometryError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GeometryError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| GeometryError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self, model: &RobotModel) -> Result<(), GeometryError> {
        if self.capsules.is_empty() {
            return Err(GeometryError::InvalidShape("link geometry is empty".into()));
        }
        for c in &self.capsules {
            if c.link_index > model.dof() {
                return Err(GeometryError::InvalidShape(format!(
                    "capsule attached to link {} but the chain has {} links",
                    c.link_index,
                    model.dof()
                )));
            }
            ConvexShape::capsule(c.p0_local, c.p1_local, c.radius).validate()?;
        }
        Ok(())
    }
}

/// Robot link shape posed in the world for the current tick.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkShape {
    pub link_index: usize,
    pub shape: ConvexShape,
}

/// Snapshot of everything the distance query needs for one controller tick.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneGraph {
    pub links: Vec<LinkShape>,
    pub human: Option<ConvexShape>,
    /// Time of the robot configuration the link poses were computed from.
    pub timestamp_ns: TimestampNs,
}

impl SceneGraph {
    pub fn new(
        fk: &ForwardKinematics,
        geometry: &LinkGeometry,
        human: Option<ConvexShape>,
        timestamp_ns: TimestampNs,
    ) -> Self {
        let links = geometry
            .capsules
            .iter()
            .filter_map(|c| {
                let pose = fk.frames.get(c.link_index)?;
                Some(LinkShape {
                    link_index: c.link_index,
                    shape: ConvexShape::capsule(c.p0_local, c.p1_local, c.radius)
                        .with_pose(*pose),
                })
            })
            .collect();
        Self {
            links,
            human,
            timestamp_ns,
        }
    }

    /// Human represented by the convex hull of its points. An empty set means
    /// no human.
    pub fn human_from_points(points: Vec<Vec3>) -> Option<ConvexShape> {
        (!points.is_empty()).then(|| ConvexShape::point_set(points))
    }
}

/// Closest points between the human and the robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPair {
    pub human_point: Vec3,
    pub robot_point: Vec3,
    pub distance: f64,
    /// Frame index of the robot link carrying `robot_point`.
    pub robot_link: usize,
}

impl ClosestPair {
    /// `S = P_human − P_robot`.
    pub fn separation(&self) -> Vec3 {
        self.human_point - self.robot_point
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Proximity {
    Pair(ClosestPair),
    NoHuman,
}

/// Minimum over all (link, human) GJK queries; ties go to the lower link index.
pub fn closest_pair_query(scene: &SceneGraph) -> Result<Proximity, GeometryError> {
    let Some(human) = &scene.human else {
        return Ok(Proximity::NoHuman);
    };
    if scene.links.is_empty() {
        return Err(GeometryError::InvalidShape("scene has no robot links".into()));
    }
    let mut best: Option<(usize, Separation)> = None;
    for link in &scene.links {
        let sep = gjk_distance(human, &link.shape)?;
        let replace = match &best {
            None => true,
            Some((idx, b)) => {
                sep.distance < b.distance || (sep.distance == b.distance && link.link_index < *idx)
            }
        };
        if replace {
            best = Some((link.link_index, sep));
        }
    }
    let (robot_link, sep) = best.expect("at least one link");
    Ok(Proximity::Pair(ClosestPair {
        human_point: sep.point_a,
        robot_point: sep.point_b,
        distance: sep.distance,
        robot_link,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_capsule_scene(human: Vec<Vec3>) -> SceneGraph {
        SceneGraph {
            links: vec![LinkShape {
                link_index: 1,
                shape: ConvexShape::capsule(Vec3::zeros(), Vec3::new(0.0, 0.0, 1.0), 0.1),
            }],
            human: SceneGraph::human_from_points(human),
            timestamp_ns: 0,
        }
    }

    #[test]
    fn point_beside_capsule() {
        // Point at (0.6, 0.8, 0.5): radial offset 1.0 from the axis.
        let scene = single_capsule_scene(vec![Vec3::new(0.6, 0.8, 0.5)]);
        let Proximity::Pair(pair) = closest_pair_query(&scene).unwrap() else {
            panic!("expected a pair");
        };
        assert!((pair.distance - 0.9).abs() < 1e-12);
        assert!((pair.robot_point - Vec3::new(0.06, 0.08, 0.5)).norm() < 1e-12);
        assert!((pair.separation().norm() - pair.distance).abs() < 1e-9);
    }

    #[test]
    fn point_on_surface_is_zero() {
        let scene = single_capsule_scene(vec![Vec3::new(0.1, 0.0, 0.3)]);
        let Proximity::Pair(pair) = closest_pair_query(&scene).unwrap() else {
            panic!("expected a pair");
        };
        assert!(pair.distance.abs() < 1e-12);
    }

    #[test]
    fn missing_human() {
        let scene = single_capsule_scene(vec![]);
        assert_eq!(closest_pair_query(&scene).unwrap(), Proximity::NoHuman);
    }

    #[test]
    fn scene_minimum_is_min_over_links() {
        let model = RobotModel::ur10();
        let geometry = LinkGeometry::from_frame_origins(&model, DEFAULT_LINK_RADIUS);
        let q = [0.3, -1.2, 1.0, -0.4, 0.9, 0.1];
        let fk = forward_kinematics(&model, &q).unwrap();
        let human = ConvexShape::point_set(vec![
            Vec3::new(0.9, 0.4, 0.2),
            Vec3::new(1.0, 0.5, 1.4),
            Vec3::new(1.1, 0.2, 0.8),
        ]);
        let scene = SceneGraph::new(&fk, &geometry, Some(human.clone()), 0);
        assert_eq!(scene.links.len(), 6);
        let Proximity::Pair(pair) = closest_pair_query(&scene).unwrap() else {
            panic!("expected a pair");
        };
        let per_link: Vec<f64> = scene
            .links
            .iter()
            .map(|l| gjk_distance(&human, &l.shape).unwrap().distance)
            .collect();
        let min = per_link.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(pair.distance, min);
        assert!(per_link.iter().all(|d| pair.distance <= *d));
    }

    #[test]
    fn default_geometry_follows_frame_origins() {
        let model = RobotModel::ur10();
        let geometry = LinkGeometry::from_frame_origins(&model, 0.05);
        let q = [0.5, -0.7, 0.4, 1.0, -0.2, 0.8];
        let fk = forward_kinematics(&model, &q).unwrap();
        for c in &geometry.capsules {
            let world_p0 = fk.frames[c.link_index].transform_point(&c.p0_local);
            assert!((world_p0 - fk.frames[c.link_index - 1].translation()).norm() < 1e-12);
        }
        geometry.validate(&model).unwrap();
        let json = serde_json::to_string(&geometry).unwrap();
        assert!(json.starts_with("[{\"link_index\":1,"));
        let back = LinkGeometry::from_json(&json).unwrap();
        for (a, b) in back.capsules.iter().zip(&geometry.capsules) {
            assert_eq!((a.link_index, a.radius), (b.link_index, b.radius));
            assert!((a.p0_local - b.p0_local).norm() < 1e-15);
        }
    }
}
