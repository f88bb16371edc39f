//! Minimum-distance machinery: convex shapes, GJK, the robot/human scene graph
//! and rigid point-set calibration.

mod gjk;
mod scene;
mod shape;
mod umeyama;

pub use gjk::{gjk_distance, Separation, GJK_MAX_ITERATIONS, GJK_TOLERANCE};
pub use scene::{
    closest_pair_query, ClosestPair, LinkCapsule, LinkGeometry, LinkShape, Proximity, SceneGraph,
    DEFAULT_LINK_RADIUS,
};
pub use shape::{ConvexShape, ShapeKind};
pub use umeyama::{umeyama_align, Alignment};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("GJK did not converge in {iterations} iterations (best distance {best_distance} m)")]
    IterationCap {
        iterations: usize,
        best_distance: f64,
    },
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("source has {src} points but destination has {dst}")]
    LengthMismatch { src: usize, dst: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("link geometry file: {0}")]
    Parse(String),
}
