//! Deterministic scenario simulation: synthetic human and robot motion at the
//! native stream rates, stream synchronisation, the perception → SSM loop,
//! metrics and exported logs.

mod export;
mod metrics;
mod render;
mod scenario;
mod simulate;
mod sync;

use std::path::Path;

pub use export::{
    export, join_on_time, plot_svg, read_column, read_ticks_csv, summarize, write_ticks_csv, write_truth_csv,
    Summary, TickRow, INVALID_VELOCITY, TICKS_HEADER, TRUTH_HEADER,
};
pub use metrics::{capsule_distance, inject_noise, rmse, segment_closest_points};
pub use render::{
    phantom_points, ray_capsule, ray_floor, render_frame, synthetic_shift_table, CapsulePhantom, HitLabel,
    RenderedFrame, SyntheticScene,
};
pub use scenario::{stream_times, LidarSetup, PerceptionMode, PhantomShape, Rates, Scenario};
pub use simulate::{
    analytic_distance, phantom_at, scenario_sensor, simulate, simulate_with_model, TimeSeriesLog,
};
pub use sync::{synchronize, SyncResult, SyncedTick};

use crate::geometry::GeometryError;
use crate::kinematics::KinematicsError;
use crate::lidar_frames::LidarError;
use crate::perception::PerceptionError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("{0} stream is empty")]
    EmptyStream(&'static str),
    #[error("series is empty")]
    EmptySeries,
    #[error("measured series has {measured} samples but truth has {truth}")]
    LengthMismatch { measured: usize, truth: usize },
    #[error("{0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lidar(#[from] LidarError),
    #[error(transparent)]
    Perception(#[from] PerceptionError),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
