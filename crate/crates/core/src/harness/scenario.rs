use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::geometry::DEFAULT_LINK_RADIUS;
use crate::kinematics::RigidTransform;
use crate::perception::PerceptionConfig;
use crate::ssm::SsmConfig;
use crate::{TimestampNs, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Rates {
    pub lidar: f64,
    pub robot: f64,
    pub mocap: f64,
}

impl Default for Rates {
    fn default() -> Self {
        Self {
            lidar: 20.0,
            robot: 125.0,
            mocap: 120.0,
        }
    }
}

/// How the human point set reaching the controller is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerceptionMode {
    /// The analytic phantom capsule itself (no sampling).
    Exact,
    /// Phantom surface points hit by the lidar's rays, with position noise.
    #[default]
    Phantom,
    /// Rendered range frames run through the full extraction pipeline.
    Pipeline,
}

/// Synthetic lidar placement and resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LidarSetup {
    pub pose: RigidTransform,
    pub width: usize,
    pub height: usize,
    pub vertical_fov_deg: f64,
}

impl Default for LidarSetup {
    fn default() -> Self {
        Self {
            pose: RigidTransform::from_translation(Vec3::new(-1.0, 0.0, 1.0)),
            width: crate::lidar_frames::NATIVE_WIDTH,
            height: crate::lidar_frames::NATIVE_HEIGHT,
            vertical_fov_deg: 90.0,
        }
    }
}

/// Vertical capsule standing on the floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhantomShape {
    pub radius_m: f64,
    pub height_m: f64,
}

impl Default for PhantomShape {
    fn default() -> Self {
        Self {
            radius_m: 0.25,
            height_m: 1.7,
        }
    }
}

impl PhantomShape {
    /// Axis segment of the capsule whose base rests at `base`.
    pub fn segment(&self, base: &Vec3) -> (Vec3, Vec3) {
        (
            base + Vec3::new(0.0, 0.0, self.radius_m),
            base + Vec3::new(0.0, 0.0, (self.height_m - self.radius_m).max(self.radius_m)),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub duration_s: f64,
    #[serde(default)]
    pub rates: Rates,
    /// `[t, x, y, z]`: time (s) and the phantom's base point on the floor (m).
    pub human_waypoints: Vec<[f64; 4]>,
    /// `[t, q1, …, qn]`.
    pub robot_waypoints: Vec<Vec<f64>>,
    #[serde(default)]
    pub noise_sigma_m: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ssm: SsmConfig,
    #[serde(default)]
    pub perception_mode: PerceptionMode,
    #[serde(default)]
    pub perception: PerceptionConfig,
    #[serde(default)]
    pub phantom: PhantomShape,
    #[serde(default)]
    pub lidar: LidarSetup,
    #[serde(default = "default_link_radius")]
    pub link_radius_m: f64,
    #[serde(default = "default_sync_tolerance")]
    pub sync_tolerance_s: f64,
}

fn default_link_radius() -> f64 {
    DEFAULT_LINK_RADIUS
}

fn default_sync_tolerance() -> f64 {
    0.005
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let scn: Scenario = serde_json::from_str(text).map_err(|e| HarnessError::Scenario(e.to_string()))?;
        Ok(scn)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self, HarnessError> {
        serde_json::from_value(value).map_err(|e| HarnessError::Scenario(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text).map_err(|e| HarnessError::Scenario(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self, dof: usize) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Scenario(m));
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad(format!("duration_s must be positive, got {}", self.duration_s));
        }
        for (name, r) in [("lidar", self.rates.lidar), ("robot", self.rates.robot), ("mocap", self.rates.mocap)] {
            if !(r > 0.0 && r.is_finite()) {
                return bad(format!("{name} rate must be positive, got {r}"));
            }
        }
        if self.human_waypoints.is_empty() || self.robot_waypoints.is_empty() {
            return bad("scenario needs human and robot waypoints".into());
        }
        if let Some(w) = self.robot_waypoints.iter().find(|w| w.len() != dof + 1) {
            return bad(format!("robot waypoint has {} values, expected t plus {dof} joints", w.len()));
        }
        let times = |ts: Vec<f64>, what: &str| -> Result<(), HarnessError> {
            if ts.iter().any(|t| !t.is_finite()) || ts.windows(2).any(|w| w[1] < w[0]) {
                return Err(HarnessError::Scenario(format!("{what} waypoints are not time-sorted")));
            }
            if *ts.last().expect("non-empty") > self.duration_s {
                return Err(HarnessError::Scenario(format!("{what} waypoints extend past duration_s")));
            }
            Ok(())
        };
        times(self.human_waypoints.iter().map(|w| w[0]).collect(), "human")?;
        times(self.robot_waypoints.iter().map(|w| w[0]).collect(), "robot")?;
        if self.human_waypoints.iter().flatten().chain(self.robot_waypoints.iter().flatten()).any(|v| !v.is_finite()) {
            return bad("waypoints contain non-finite values".into());
        }
        if !(self.noise_sigma_m >= 0.0 && self.noise_sigma_m.is_finite()) {
            return bad(format!("noise_sigma_m must be non-negative, got {}", self.noise_sigma_m));
        }
        if !(self.phantom.radius_m > 0.0 && self.phantom.height_m >= 2.0 * self.phantom.radius_m) {
            return bad("phantom needs a positive radius and height ≥ 2·radius".into());
        }
        if !(self.sync_tolerance_s >= 0.0) || !(self.link_radius_m >= 0.0) {
            return bad("sync tolerance and link radius must be non-negative".into());
        }
        self.ssm.validate().map_err(|e| HarnessError::Scenario(e.to_string()))
    }

    /// Phantom base point at time `t` (s), linearly interpolated and held
    /// constant outside the waypoint range.
    pub fn human_base(&self, t: f64) -> Vec3 {
        let w = &self.human_waypoints;
        let (i, a) = segment(w.len(), |k| w[k][0], t);
        let p = |k: usize| Vec3::new(w[k][1], w[k][2], w[k][3]);
        if i + 1 >= w.len() {
            p(i)
        } else {
            p(i) + (p(i + 1) - p(i)) * a
        }
    }

    /// Joint positions and velocities at time `t` (s). Velocities are the
    /// slope of the active segment and zero outside the waypoint range.
    pub fn robot_state(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let w = &self.robot_waypoints;
        let (i, a) = segment(w.len(), |k| w[k][0], t);
        let dof = w[0].len() - 1;
        if i + 1 >= w.len() || t < w[0][0] {
            return (w[i][1..].to_vec(), vec![0.0; dof]);
        }
        let dt = w[i + 1][0] - w[i][0];
        let q = (1..=dof).map(|j| w[i][j] + (w[i + 1][j] - w[i][j]) * a).collect();
        let qd = (1..=dof)
            .map(|j| if dt > 0.0 { (w[i + 1][j] - w[i][j]) / dt } else { 0.0 })
            .collect();
        (q, qd)
    }
}

/// Index of the segment containing `t` and the interpolation fraction.
fn segment(len: usize, time: impl Fn(usize) -> f64, t: f64) -> (usize, f64) {
    if t <= time(0) {
        return (0, 0.0);
    }
    let i = (0..len).rposition(|k| time(k) <= t).unwrap_or(0);
    if i + 1 >= len {
        return (len - 1, 0.0);
    }
    let span = time(i + 1) - time(i);
    (i, if span > 0.0 { (t - time(i)) / span } else { 0.0 })
}

/// Sample times (ns) of a stream running at `rate_hz` for `duration_s`.
pub fn stream_times(rate_hz: f64, duration_s: f64) -> Vec<TimestampNs> {
    let n = (duration_s * rate_hz).round() as usize;
    (0..n).map(|k| (k as f64 * 1e9 / rate_hz).round() as TimestampNs).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario() -> Scenario {
        Scenario::from_json(
            r#"{"duration_s": 4, "human_waypoints": [[0, 1, 0, 0], [2, 3, 0, 0]],
                "robot_waypoints": [[1, 0, 0], [3, 1, -2]]}"#,
        )
        .unwrap()
    }

    #[test]
    fn defaults_and_validation() {
        let s = scenario();
        assert_eq!(s.rates, Rates::default());
        assert_eq!(s.perception_mode, PerceptionMode::Phantom);
        s.validate(2).unwrap();
        assert!(s.validate(6).is_err());
        let mut late = s.clone();
        late.duration_s = 2.5;
        assert!(late.validate(2).is_err());
        assert!(Scenario::from_json(r#"{"duration_s": 1, "bogus": 1}"#).is_err());
    }

    #[test]
    fn interpolation() {
        let s = scenario();
        assert_eq!(s.human_base(-1.0), Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(s.human_base(1.0), Vec3::new(2.0, 0.0, 0.0));
        assert_eq!(s.human_base(10.0), Vec3::new(3.0, 0.0, 0.0));
        assert_eq!(s.robot_state(0.0), (vec![0.0, 0.0], vec![0.0, 0.0]));
        assert_eq!(s.robot_state(2.0), (vec![0.5, -1.0], vec![0.5, -1.0]));
        assert_eq!(s.robot_state(3.5), (vec![1.0, -2.0], vec![0.0, 0.0]));
    }

    #[test]
    fn stream_lengths() {
        assert_eq!(stream_times(125.0, 25.0).len(), 3125);
        assert_eq!(stream_times(20.0, 25.0)[1], 50_000_000);
        assert_eq!(stream_times(120.0, 1.0)[1], 8_333_333);
    }
}
