use serde::{Deserialize, Serialize};

use super::{RobotTerm, SsmConfig};

/// Protective separation distance (m) for a signed robot speed.
pub fn safety_distance(v_robot: f64, cfg: &SsmConfig) -> f64 {
    let robot_window = match cfg.robot_term {
        RobotTerm::ReactionOnly => cfg.t_r,
        RobotTerm::ReactionAndStop => cfg.t_r + cfg.t_s,
    };
    cfg.v_human * (cfg.t_r + cfg.t_s) + v_robot * robot_window + cfg.c + cfg.z_s + cfg.z_r
}

/// `clamp(max(d − S, 0) / W_max, 0, 1)`. Anything non-finite maps to 0.
pub fn speed_scaling(min_distance: f64, s_safety: f64, cfg: &SsmConfig) -> f64 {
    let rho = (min_distance - s_safety) / cfg.w_max;
    if rho > 0.0 {
        rho.min(1.0)
    } else {
        0.0
    }
}

/// Scaling factor and its rate of change.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScalingState {
    pub value: f64,
    /// 1/s.
    pub rate: f64,
}

/// Rate and rate-change bounds for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JerkLimits {
    pub a_max: f64,
    pub j_max: f64,
}

impl JerkLimits {
    pub fn nominal(cfg: &SsmConfig) -> Self {
        Self {
            a_max: cfg.a_max,
            j_max: cfg.j_max,
        }
    }

    /// Stop envelope that brings a factor of 1 to rest within `0.75·t_s`:
    /// `D/a + a/j` with `a ≥ 2/t_s` and `j ≥ 4a/t_s`.
    pub fn emergency(cfg: &SsmConfig) -> Self {
        let t_s = cfg.t_s.max(1e-3);
        let a_max = cfg.a_max.max(2.0 / t_s);
        Self {
            a_max,
            j_max: cfg.j_max.max(4.0 * a_max / t_s),
        }
    }
}

/// Move `state` toward `target` over `dt` seconds with the rate bounded by
/// `a_max` and its change by `j_max`. The rate follows the braking curve
/// `sqrt(2·j·|e|)` so the target is reached without overshoot.
pub fn jerk_limited_step(state: ScalingState, target: f64, dt: f64, limits: JerkLimits) -> ScalingState {
    let target = if target.is_finite() { target.clamp(0.0, 1.0) } else { 0.0 };
    let value = if state.value.is_finite() { state.value.clamp(0.0, 1.0) } else { 0.0 };
    let rate = if state.rate.is_finite() { state.rate } else { 0.0 };
    if !(dt > 0.0 && dt.is_finite()) {
        return ScalingState { value, rate };
    }
    let e = target - value;
    if e == 0.0 && rate == 0.0 {
        return ScalingState { value, rate };
    }
    let desired = e.signum() * limits.a_max.min((2.0 * limits.j_max * e.abs()).sqrt()).min(e.abs() / dt);
    let step = limits.j_max * dt;
    let new_rate = rate + (desired - rate).clamp(-step, step);
    let next = value + new_rate * dt;
    let overshoot = if e > 0.0 {
        next >= target
    } else if e < 0.0 {
        next <= target
    } else {
        true
    };
    if overshoot {
        ScalingState { value: target, rate: 0.0 }
    } else {
        ScalingState {
            value: next.clamp(0.0, 1.0),
            rate: new_rate,
        }
    }
}

/// One step of the scaling profile. `emergency` selects the stop envelope;
/// it only applies while heading to 0.
pub fn jerk_limited_scale(current: ScalingState, target: f64, dt: f64, cfg: &SsmConfig, emergency: bool) -> ScalingState {
    let limits = if emergency && target == 0.0 {
        JerkLimits::emergency(cfg)
    } else {
        JerkLimits::nominal(cfg)
    };
    jerk_limited_step(current, target, dt, limits)
}
