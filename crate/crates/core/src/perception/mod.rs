//! Human point-set extraction: a detection box is projected onto the frame's
//! point cloud, then background, outliers and the floor are stripped and the
//! densest remaining cluster is kept.

mod background;
mod coco;
mod dbscan;
mod extract;
mod outliers;
mod plane;

pub use background::{build_background, remove_background, BackgroundModel};
pub use coco::{load_annotations, parse_annotations, Annotations};
pub use dbscan::{dbscan, NOISE};
pub use extract::{
    extract_human, project_box_to_cloud, AnnotationReplay, BoundingBox, DetectionProvider,
    Extraction, HumanPointSet, NotFoundStage, PerceptionConfig, SyntheticOracle,
};
pub use outliers::reject_outliers;
pub use plane::{segment_plane, PlaneFit};

use crate::lidar_frames::LidarError;

#[derive(Debug, thiserror::Error)]
pub enum PerceptionError {
    #[error("background model needs at least one frame")]
    NoFrames,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{path}: {msg}")]
    Parse { path: String, msg: String },
    #[error(transparent)]
    Lidar(#[from] LidarError),
}
