use serde::{Deserialize, Serialize};

use super::SsmError;

/// Which reaction window multiplies the robot speed in the safety distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobotTerm {
    /// `V_robot · t_r`.
    #[default]
    ReactionOnly,
    /// `V_robot · (t_r + t_s)`, as in some ISO/TS 15066 formulations.
    ReactionAndStop,
}

/// Safety-distance and scaling constants. Keys in files use the symbol names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsmConfig {
    /// Assumed human approach speed (m/s).
    #[serde(rename = "V_human")]
    pub v_human: f64,
    /// Control loop processing time (s).
    pub t_r: f64,
    /// Robot stopping time (s).
    pub t_s: f64,
    /// Intrusion distance (m).
    #[serde(rename = "C")]
    pub c: f64,
    /// Human position uncertainty (m).
    #[serde(rename = "Z_s")]
    pub z_s: f64,
    /// Robot position uncertainty (m).
    #[serde(rename = "Z_r")]
    pub z_r: f64,
    /// Distance beyond the safety threshold at which scaling saturates (m).
    #[serde(rename = "W_max")]
    pub w_max: f64,
    /// Largest rate of change of the scaling factor (1/s).
    pub a_max: f64,
    /// Largest change of that rate (1/s²).
    pub j_max: f64,
    pub robot_term: RobotTerm,
    /// Largest allowed skew between joint state and scene (s).
    pub max_joint_skew_s: f64,
}

impl Default for SsmConfig {
    fn default() -> Self {
        Self {
            v_human: 1.6,
            t_r: 0.008,
            t_s: 0.3,
            c: 0.1,
            z_s: 0.04,
            z_r: 0.003,
            w_max: 3.0,
            a_max: 2.0,
            j_max: 20.0,
            robot_term: RobotTerm::ReactionOnly,
            max_joint_skew_s: 0.020,
        }
    }
}

impl SsmConfig {
    pub fn validate(&self) -> Result<(), SsmError> {
        let fields = [
            ("V_human", self.v_human),
            ("t_r", self.t_r),
            ("t_s", self.t_s),
            ("C", self.c),
            ("Z_s", self.z_s),
            ("Z_r", self.z_r),
            ("W_max", self.w_max),
            ("a_max", self.a_max),
            ("j_max", self.j_max),
            ("max_joint_skew_s", self.max_joint_skew_s),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SsmError::Config(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        if self.w_max <= 0.0 {
            return Err(SsmError::Config("W_max must be positive".into()));
        }
        if self.a_max <= 0.0 || self.j_max <= 0.0 {
            return Err(SsmError::Config("a_max and j_max must be positive".into()));
        }
        Ok(())
    }

    /// Reject a stopping time shorter than the robot's measured worst case.
    pub fn check_stopping_time(&self, worst_case_s: f64) -> Result<(), SsmError> {
        if self.t_s < worst_case_s {
            return Err(SsmError::Config(format!(
                "t_s = {} s is below the robot's worst-case stopping time {worst_case_s} s",
                self.t_s
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_keys() {
        let cfg: SsmConfig = serde_json::from_str(r#"{"V_human": 2.0, "W_max": 2.5, "t_s": 0.4}"#).unwrap();
        assert_eq!((cfg.v_human, cfg.w_max, cfg.t_s), (2.0, 2.5, 0.4));
        assert_eq!(cfg.c, 0.1);
        let json = serde_json::to_value(SsmConfig::default()).unwrap();
        assert_eq!(json["Z_r"], 0.003);
        assert!(serde_json::from_str::<SsmConfig>(r#"{"v_human": 1}"#).is_err());
    }

    #[test]
    fn validation() {
        SsmConfig::default().validate().unwrap();
        let bad = SsmConfig { c: -0.1, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SsmConfig { w_max: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SsmConfig { t_r: f64::NAN, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(SsmConfig::default().check_stopping_time(0.35).is_err());
        assert!(SsmConfig::default().check_stopping_time(0.25).is_ok());
    }
}
