use serde::{Deserialize, Serialize};

use super::{
    directed_robot_velocity, jerk_limited_scale, safety_distance, speed_scaling, DirectedVelocity,
    ScalingState, SsmConfig, SsmError,
};
use crate::geometry::{closest_pair_query, GeometryError, Proximity, SceneGraph};
use crate::kinematics::{JointState, RobotModel};
use crate::TimestampNs;

/// Why a tick could not produce a valid scaling factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fault", content = "detail", rename_all = "snake_case")]
pub enum Fault {
    NoHuman,
    InvalidSeparation,
    StaleJointState { skew_ns: i64 },
    NonFiniteInput(String),
    Geometry(String),
    Kinematics(String),
    Config(String),
}

impl std::fmt::Display for Fault {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Fault::NoHuman => f.write_str("no human detected"),
            Fault::InvalidSeparation => f.write_str("separation vector has no direction"),
            Fault::StaleJointState { skew_ns } => write!(f, "joint state skewed by {skew_ns} ns"),
            Fault::NonFiniteInput(what) => write!(f, "non-finite {what}"),
            Fault::Geometry(m) => write!(f, "geometry: {m}"),
            Fault::Kinematics(m) => write!(f, "kinematics: {m}"),
            Fault::Config(m) => write!(f, "config: {m}"),
        }
    }
}

/// Controller output for one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsmOutput {
    pub timestamp_ns: TimestampNs,
    /// `‖S‖` (m); `None` when no human was available.
    pub min_distance: Option<f64>,
    pub s_safety: f64,
    pub rho: f64,
    /// Rate of the scaling factor (1/s), carried to the next tick.
    pub rho_rate: f64,
    /// Signed directed robot speed (m/s); `None` on invalid ticks.
    pub v_robot: Option<f64>,
    pub valid: bool,
    pub fault: Option<Fault>,
}

impl SsmOutput {
    /// State before the first tick: stopped and not yet valid.
    pub fn initial(timestamp_ns: TimestampNs) -> Self {
        Self {
            timestamp_ns,
            min_distance: None,
            s_safety: 0.0,
            rho: 0.0,
            rho_rate: 0.0,
            v_robot: None,
            valid: false,
            fault: None,
        }
    }

    fn scaling(&self) -> ScalingState {
        ScalingState {
            value: self.rho,
            rate: self.rho_rate,
        }
    }
}

fn fail(t: TimestampNs, cfg: &SsmConfig, min_distance: Option<f64>, fault: Fault) -> SsmOutput {
    let s = safety_distance(0.0, cfg);
    SsmOutput {
        timestamp_ns: t,
        min_distance: min_distance.filter(|d| d.is_finite()),
        s_safety: if s.is_finite() { s } else { 0.0 },
        rho: 0.0,
        rho_rate: 0.0,
        v_robot: None,
        valid: false,
        fault: Some(fault),
    }
}

/// Nominal controller period used when the previous tick gives no usable dt.
const FALLBACK_DT_S: f64 = 0.008;

/// One controller cycle: closest pair → directed velocity → safety distance →
/// scaling → jerk limiting. Every failure yields `valid = false` and `rho = 0`.
pub fn controller_tick(
    scene: &SceneGraph,
    state: &JointState,
    model: &RobotModel,
    cfg: &SsmConfig,
    prev: &SsmOutput,
) -> SsmOutput {
    controller_step(closest_pair_query(scene), scene.timestamp_ns, state, model, cfg, prev)
}

/// [`controller_tick`] with the proximity query already evaluated.
pub fn controller_step(
    proximity: Result<Proximity, GeometryError>,
    scene_timestamp_ns: TimestampNs,
    state: &JointState,
    model: &RobotModel,
    cfg: &SsmConfig,
    prev: &SsmOutput,
) -> SsmOutput {
    let t = state.timestamp_ns;
    if let Err(e) = cfg.validate() {
        return fail(t, &SsmConfig::default(), None, Fault::Config(e.to_string()));
    }
    let pair = match proximity {
        Ok(Proximity::Pair(p)) => p,
        Ok(Proximity::NoHuman) => return fail(t, cfg, None, Fault::NoHuman),
        Err(e) => return fail(t, cfg, None, Fault::Geometry(e.to_string())),
    };
    if !pair.distance.is_finite() || pair.distance < 0.0 {
        return fail(t, cfg, None, Fault::NonFiniteInput("minimum distance".into()));
    }
    let d = pair.distance;
    if let Err(e) = state.validate(model) {
        return fail(t, cfg, Some(d), Fault::Kinematics(e.to_string()));
    }

    let directed = match directed_robot_velocity(&pair, scene_timestamp_ns, state, model, cfg.max_joint_skew_s) {
        Ok(v) => v,
        Err(SsmError::Sync { skew_ns, .. }) => return fail(t, cfg, Some(d), Fault::StaleJointState { skew_ns }),
        Err(e) => return fail(t, cfg, Some(d), Fault::Kinematics(e.to_string())),
    };
    let v_robot = match directed {
        DirectedVelocity::Valid(s) if s.v_robot.is_finite() => s.v_robot,
        DirectedVelocity::Valid(_) => return fail(t, cfg, Some(d), Fault::NonFiniteInput("robot velocity".into())),
        DirectedVelocity::Invalid => return fail(t, cfg, Some(d), Fault::InvalidSeparation),
    };

    let s_safety = safety_distance(v_robot, cfg);
    let target = speed_scaling(d, s_safety, cfg);
    let dt_ns = t.saturating_sub(prev.timestamp_ns);
    let dt = if dt_ns > 0 && dt_ns <= 1_000_000_000 {
        dt_ns as f64 * 1e-9
    } else {
        FALLBACK_DT_S
    };
    let start = if prev.valid { prev.scaling() } else { ScalingState::default() };
    let next = jerk_limited_scale(start, target, dt, cfg, d < s_safety);
    SsmOutput {
        timestamp_ns: t,
        min_distance: Some(d),
        s_safety,
        rho: next.value,
        rho_rate: next.rate,
        v_robot: Some(v_robot),
        valid: true,
        fault: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ClosestPair, ConvexShape, LinkShape};
    use crate::kinematics::{DhJoint, JointKind, RigidTransform};
    use crate::Vec3;

    fn arm() -> RobotModel {
        let joint = DhJoint {
            a: 1.0,
            d: 0.0,
            alpha: 0.0,
            theta_offset: 0.0,
            kind: JointKind::Revolute,
            limits: [-3.0, 3.0],
        };
        RobotModel::new("arm", vec![joint], RigidTransform::identity(), vec![2.0]).unwrap()
    }

    fn scene(human: Option<Vec3>) -> SceneGraph {
        SceneGraph {
            links: vec![LinkShape {
                link_index: 1,
                shape: ConvexShape::capsule(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), 0.05),
            }],
            human: human.map(|p| ConvexShape::point_set(vec![p])),
            timestamp_ns: 0,
        }
    }

    fn run(human: Option<Vec3>, ticks: usize) -> Vec<SsmOutput> {
        let cfg = SsmConfig::default();
        let model = arm();
        let mut prev = SsmOutput::initial(-8_000_000);
        let mut out = Vec::new();
        for k in 0..ticks {
            let t = k as i64 * 8_000_000;
            let mut sc = scene(human);
            sc.timestamp_ns = t;
            let state = JointState::new(vec![0.0], vec![0.0], t);
            prev = controller_tick(&sc, &state, &model, &cfg, &prev);
            out.push(prev.clone());
        }
        out
    }

    #[test]
    fn far_human_ramps_to_one() {
        let log = run(Some(Vec3::new(1.0, 4.0, 0.0)), 200);
        assert!(log.iter().all(|o| o.valid));
        assert!(log.windows(2).all(|w| w[1].rho >= w[0].rho));
        assert_eq!(log.last().unwrap().rho, 1.0);
    }

    #[test]
    fn close_human_stops() {
        let log = run(Some(Vec3::new(1.0, 0.3, 0.0)), 10);
        assert!(log.iter().all(|o| o.valid && o.rho == 0.0));
    }

    #[test]
    fn no_human_fails_safe() {
        let log = run(None, 3);
        assert!(log.iter().all(|o| !o.valid && o.rho == 0.0 && o.fault == Some(Fault::NoHuman)));
    }

    #[test]
    fn nan_distance_fails_safe() {
        let pair = ClosestPair {
            human_point: Vec3::zeros(),
            robot_point: Vec3::zeros(),
            distance: f64::NAN,
            robot_link: 1,
        };
        let state = JointState::new(vec![0.0], vec![0.0], 0);
        let out = controller_step(Ok(Proximity::Pair(pair)), 0, &state, &arm(), &SsmConfig::default(), &SsmOutput::initial(0));
        assert!(!out.valid);
        assert_eq!(out.rho, 0.0);
    }

    #[test]
    fn stale_state_is_a_fault() {
        let mut sc = scene(Some(Vec3::new(1.0, 2.0, 0.0)));
        sc.timestamp_ns = 100_000_000;
        let state = JointState::new(vec![0.0], vec![0.0], 0);
        let out = controller_tick(&sc, &state, &arm(), &SsmConfig::default(), &SsmOutput::initial(0));
        assert_eq!(out.fault, Some(Fault::StaleJointState { skew_ns: 100_000_000 }));
        assert_eq!(out.rho, 0.0);
    }
}
