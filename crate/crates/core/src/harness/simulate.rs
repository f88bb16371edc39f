use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::metrics::capsule_distance;
use super::render::{phantom_points, render_frame, CapsulePhantom, HitLabel, SyntheticScene};
use super::scenario::{stream_times, PerceptionMode, Scenario};
use super::sync::{nearest, synchronize};
use super::HarnessError;
use crate::geometry::{ConvexShape, LinkGeometry, SceneGraph};
use crate::kinematics::{forward_kinematics, ForwardKinematics, JointState, RobotModel};
use crate::lidar_frames::{BeamIntrinsics, SensorModel};
use crate::perception::{build_background, extract_human, SyntheticOracle};
use crate::ssm::{controller_tick, SsmConfig, SsmOutput};
use crate::TimestampNs;

/// Controller outputs of a run, one per robot cycle, with the ground-truth
/// minimum distance at the same instants.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesLog {
    pub outputs: Vec<SsmOutput>,
    pub truth_m: Vec<f64>,
    /// Lidar frames discarded by stream synchronisation.
    pub dropped_sync: usize,
    /// Lidar frames whose perception produced no human.
    pub perception_misses: usize,
}

impl TimeSeriesLog {
    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }
}

pub(crate) fn ns_to_s(t: TimestampNs) -> f64 {
    t as f64 * 1e-9
}

/// Sensor model of the scenario's synthetic lidar.
pub fn scenario_sensor(scn: &Scenario) -> SensorModel {
    SensorModel::new(
        BeamIntrinsics::uniform(scn.lidar.height, scn.lidar.vertical_fov_deg),
        0.001,
        scn.lidar.pose,
    )
}

/// Phantom capsule at time `t` (s).
pub fn phantom_at(scn: &Scenario, t: f64) -> CapsulePhantom {
    let (p0, p1) = scn.phantom.segment(&scn.human_base(t));
    CapsulePhantom {
        p0,
        p1,
        radius: scn.phantom.radius_m,
    }
}

/// Analytic distance between the phantom and the robot's link capsules.
pub fn analytic_distance(phantom: &CapsulePhantom, fk: &ForwardKinematics, geometry: &LinkGeometry) -> f64 {
    geometry
        .capsules
        .iter()
        .filter_map(|c| {
            let pose = fk.frames.get(c.link_index)?;
            let (a, b) = (pose.transform_point(&c.p0_local), pose.transform_point(&c.p1_local));
            Some(capsule_distance((&phantom.p0, &phantom.p1, phantom.radius), (&a, &b, c.radius)))
        })
        .fold(f64::INFINITY, f64::min)
}

/// Run a scenario on the bundled UR10 model.
pub fn simulate(scn: &Scenario, cfg: &SsmConfig) -> Result<TimeSeriesLog, HarnessError> {
    simulate_with_model(scn, &RobotModel::ur10(), cfg)
}

pub fn simulate_with_model(scn: &Scenario, model: &RobotModel, cfg: &SsmConfig) -> Result<TimeSeriesLog, HarnessError> {
    scn.validate(model.dof())?;
    cfg.validate().map_err(|e| HarnessError::Scenario(e.to_string()))?;
    let geometry = LinkGeometry::from_frame_origins(model, scn.link_radius_m);
    let lidar_t = stream_times(scn.rates.lidar, scn.duration_s);
    let robot_t = stream_times(scn.rates.robot, scn.duration_s);
    let mocap_t = stream_times(scn.rates.mocap, scn.duration_s);
    let tolerance_ns = (scn.sync_tolerance_s * 1e9).round() as TimestampNs;
    if robot_t.is_empty() || mocap_t.is_empty() {
        return Err(HarnessError::EmptyStream("robot or mocap"));
    }
    let sync = synchronize(&lidar_t, &[&robot_t, &mocap_t], tolerance_ns)?;

    let sensor = scenario_sensor(scn);
    let width = scn.lidar.width;
    let lidar_period_ns = (1e9 / scn.rates.lidar).round() as TimestampNs;
    let mut rng = ChaCha8Rng::seed_from_u64(scn.seed);

    let background = if scn.perception_mode == PerceptionMode::Pipeline {
        let empty = SyntheticScene { floor: true, humans: vec![] };
        let frames: Vec<_> = (0..scn.perception.background_frames.max(1))
            .map(|k| {
                let t = -(k as TimestampNs + 1) * lidar_period_ns;
                render_frame(&sensor, width, &empty, t, lidar_period_ns, scn.noise_sigma_m, &mut rng).frame
            })
            .collect();
        Some(build_background(&frames, frames.len(), sensor.range_unit_m)?)
    } else {
        None
    };

    // Perception snapshots at the synchronised lidar instants.
    let mut snapshots: Vec<(TimestampNs, Option<ConvexShape>)> = Vec::with_capacity(sync.ticks.len());
    let mut misses = 0;
    for tick in &sync.ticks {
        let t = tick.anchor_ns;
        let phantom = phantom_at(scn, ns_to_s(t));
        let human = match scn.perception_mode {
            PerceptionMode::Exact => Some(ConvexShape::capsule(phantom.p0, phantom.p1, phantom.radius)),
            PerceptionMode::Phantom => {
                SceneGraph::human_from_points(phantom_points(&sensor, width, &phantom, scn.noise_sigma_m, &mut rng))
            }
            PerceptionMode::Pipeline => {
                let scene = SyntheticScene { floor: true, humans: vec![phantom] };
                let rendered = render_frame(&sensor, width, &scene, t, lidar_period_ns, scn.noise_sigma_m, &mut rng);
                let pixels = rendered.pixels_of(HitLabel::Human(0));
                let bg = background.as_ref().expect("pipeline mode builds a background");
                match SyntheticOracle::tight_box(&pixels, scn.perception.resize_factor) {
                    Some(bbox) => extract_human(&rendered.frame, &sensor, &bbox, bg, &scn.perception)?
                        .human()
                        .and_then(|h| SceneGraph::human_from_points(h.positions())),
                    None => None,
                }
            }
        };
        if human.is_none() {
            misses += 1;
        }
        snapshots.push((t, human));
    }

    let mut outputs = Vec::with_capacity(robot_t.len());
    let mut truth_m = Vec::with_capacity(robot_t.len());
    let mut prev = SsmOutput::initial(robot_t[0] - (1e9 / scn.rates.robot) as TimestampNs);
    // Zero-order hold: each cycle uses the newest snapshot not after it.
    let mut available = 0;
    for &t in &robot_t {
        while available < snapshots.len() && snapshots[available].0 <= t {
            available += 1;
        }
        let (q, qd) = scn.robot_state(ns_to_s(t));
        let fk = forward_kinematics(model, &q)?;
        let human = available.checked_sub(1).and_then(|i| snapshots[i].1.clone());
        let scene = SceneGraph::new(&fk, &geometry, human, t);
        let state = JointState::new(q, qd, t);
        let out = controller_tick(&scene, &state, model, cfg, &prev);

        let m = nearest(&mocap_t, t).expect("mocap stream is non-empty");
        truth_m.push(analytic_distance(&phantom_at(scn, ns_to_s(mocap_t[m])), &fk, &geometry));
        outputs.push(out.clone());
        prev = out;
    }
    Ok(TimeSeriesLog {
        outputs,
        truth_m,
        dropped_sync: sync.dropped,
        perception_misses: misses,
    })
}
