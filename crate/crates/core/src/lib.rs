//! Lidar-driven speed and separation monitoring (SSM) for collaborative robots.
//!
//! The crate is organised along the data path of a single controller tick:
//!
//! * [`lidar_frames`] models the four 2D channel images of a spinning lidar and
//!   the preprocessing chain applied to them (destagger, bit-depth reduction,
//!   bilinear resize, auto-exposure, histogram equalisation, stacking, SSIM).
//! * [`perception`] turns a detection bounding box into the human's 3D point set
//!   (background removal, outlier rejection, plane segmentation, DBSCAN).
//! * [`kinematics`] is the serial-chain robot model: forward kinematics and
//!   geometric Jacobians of arbitrary points on a link.
//! * [`geometry`] answers closest-pair queries between the robot's link capsules
//!   and the human point set with GJK, and calibrates frames with Umeyama.
//! * [`ssm`] computes the directed robot velocity, the protective separation
//!   distance and the jerk-limited speed-scaling factor.
//! * [`harness`] runs deterministic scenarios at the native sensor rates and
//!   produces logs, metrics and plots.

pub mod geometry;
pub mod harness;
pub mod kinematics;
pub mod lidar_frames;
pub mod perception;
pub mod ssm;

/// 3D vector in metres (or metres per second, depending on context).
pub type Vec3 = nalgebra::Vector3<f64>;

/// Nanosecond timestamps shared by every stream.
pub type TimestampNs = i64;
