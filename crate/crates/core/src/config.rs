//! Line-oriented `key = value` run configuration.
//!
//! Files are split into `[goal]`, `[limits]`, `[sensor]`, `[initial]` and
//! `[run]` sections (plus `[hole]`, `[grid]`, `[oracle]` for scans).
//! Boundary units are meters, seconds and degrees; angles convert to
//! radians when the typed domain structs are built, while the config
//! structs keep the file-unit values so that serialize/parse round-trips
//! are exact.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::features::GoalSpec;
use crate::plant::{SensorModel, WorldState};
use crate::scanner::{DetectOracle, ScanGrid};
use crate::se3::{RigidPose, Vec3};
use crate::servo::{JacobianVariant, Limits};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{origin}:{line}: {message}")]
    Parse { origin: String, line: usize, message: String },
    #[error("{origin}: invalid config: {message}")]
    Validation { origin: String, message: String },
    #[error("failed to read {origin}: {source}")]
    Io {
        origin: String,
        #[source]
        source: std::io::Error,
    },
}

/// Parsed `section.key = value` entries with line numbers, consumed by
/// the typed config builders; leftovers are reported as unknown keys.
struct Entries {
    origin: String,
    map: HashMap<(String, String), (usize, String)>,
}

impl Entries {
    fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut map = HashMap::new();
        let mut section = String::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| ConfigError::Parse {
                    origin: origin.to_string(),
                    line: line_no,
                    message: format!("malformed section header `{raw_line}`"),
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
                origin: origin.to_string(),
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            if section.is_empty() {
                return Err(ConfigError::Parse {
                    origin: origin.to_string(),
                    line: line_no,
                    message: format!("key `{}` appears before any [section] header", key.trim()),
                });
            }
            let slot = (section.clone(), key.trim().to_string());
            if map.insert(slot.clone(), (line_no, value.trim().to_string())).is_some() {
                return Err(ConfigError::Parse {
                    origin: origin.to_string(),
                    line: line_no,
                    message: format!("duplicate key `{}` in section [{}]", slot.1, slot.0),
                });
            }
        }
        Ok(Self { origin: origin.to_string(), map })
    }

    fn take_raw(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        self.map.remove(&(section.to_string(), key.to_string()))
    }

    fn take_f64(&mut self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take_raw(section, key) {
            None => Ok(None),
            Some((line, value)) => value.parse::<f64>().map(Some).map_err(|_| ConfigError::Parse {
                origin: self.origin.clone(),
                line,
                message: format!("`{key}` must be a number, got `{value}`"),
            }),
        }
    }

    fn require_f64(&mut self, section: &str, key: &str) -> Result<f64, ConfigError> {
        self.take_f64(section, key)?.ok_or_else(|| self.missing(section, key))
    }

    fn take_usize(&mut self, section: &str, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.take_raw(section, key) {
            None => Ok(None),
            Some((line, value)) => value.parse::<usize>().map(Some).map_err(|_| ConfigError::Parse {
                origin: self.origin.clone(),
                line,
                message: format!("`{key}` must be a non-negative integer, got `{value}`"),
            }),
        }
    }

    fn take_u64(&mut self, section: &str, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.take_raw(section, key) {
            None => Ok(None),
            Some((line, value)) => value.parse::<u64>().map(Some).map_err(|_| ConfigError::Parse {
                origin: self.origin.clone(),
                line,
                message: format!("`{key}` must be a non-negative integer, got `{value}`"),
            }),
        }
    }

    fn missing(&self, section: &str, key: &str) -> ConfigError {
        ConfigError::Validation {
            origin: self.origin.clone(),
            message: format!("missing required key `{key}` in section [{section}]"),
        }
    }

    fn reject_leftovers(&self) -> Result<(), ConfigError> {
        if let Some(((section, key), (line, _))) =
            self.map.iter().min_by_key(|(_, (line, _))| *line)
        {
            return Err(ConfigError::Parse {
                origin: self.origin.clone(),
                line: *line,
                message: format!("unknown key `{key}` in section [{section}]"),
            });
        }
        Ok(())
    }
}

fn read_file(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        origin: path.display().to_string(),
        source,
    })
}

fn validation(origin: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation { origin: origin.to_string(), message: message.into() }
}

/// Pose given as x/y/z meters and a/b/c degrees (file units).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoseConfig {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub a_deg: f64,
    pub b_deg: f64,
    pub c_deg: f64,
}

impl PoseConfig {
    pub fn to_pose(&self) -> RigidPose {
        RigidPose::from_euler(
            Vec3::new(self.x, self.y, self.z),
            self.a_deg.to_radians(),
            self.b_deg.to_radians(),
            self.c_deg.to_radians(),
        )
    }
}

/// Servo run configuration in file units.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Desired hole pose relative to the flange (the measured-pose
    /// convention): x/y/z meters, b/c degrees.
    pub goal_x: f64,
    pub goal_y: f64,
    pub goal_z: f64,
    pub goal_b_deg: f64,
    pub goal_c_deg: f64,
    pub axis_offset: f64,

    pub v_max: f64,
    pub w_max_deg: f64,
    pub tau: f64,
    pub beta_p: f64,
    pub beta_r: f64,
    pub deadband: f64,
    pub cond_max: f64,

    pub sigma_t: f64,
    pub sigma_r_deg: f64,
    pub latency_steps: usize,
    pub dropout_prob: f64,
    pub seed: u64,
    pub hand_eye: PoseConfig,

    /// Initial measured relative pose (same convention as the goal).
    pub initial: PoseConfig,

    pub duration: f64,
    pub servo_start: f64,
    pub variant: JacobianVariant,
    pub out: Option<String>,
}

impl Default for RunConfig {
    /// The reproduced closed-loop experiment: tau 4 ms, v_max 50 mm/s,
    /// w_max 40 deg/s, gains 0.001, servo start at 4 s.
    fn default() -> Self {
        Self {
            goal_x: 0.0,
            goal_y: 0.15,
            goal_z: 0.6,
            goal_b_deg: 0.0,
            goal_c_deg: 0.0,
            axis_offset: 0.1,
            v_max: 0.05,
            w_max_deg: 40.0,
            tau: 0.004,
            beta_p: 0.001,
            beta_r: 0.001,
            deadband: 1e-9,
            cond_max: 1e8,
            sigma_t: 0.0,
            sigma_r_deg: 0.0,
            latency_steps: 0,
            dropout_prob: 0.0,
            seed: 0,
            hand_eye: PoseConfig::default(),
            initial: PoseConfig { x: 0.11, y: 0.005, z: 0.9, a_deg: 0.0, b_deg: 8.0, c_deg: 27.0 },
            duration: 25.0,
            servo_start: 4.0,
            variant: JacobianVariant::Corrected,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_str_named(&read_file(path)?, &path.display().to_string())
    }

    pub fn from_str_named(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut e = Entries::parse(text, origin)?;
        let config = RunConfig {
            goal_x: e.require_f64("goal", "x")?,
            goal_y: e.require_f64("goal", "y")?,
            goal_z: e.require_f64("goal", "z")?,
            goal_b_deg: e.require_f64("goal", "b")?,
            goal_c_deg: e.require_f64("goal", "c")?,
            axis_offset: e.take_f64("goal", "axis_offset")?.unwrap_or(0.1),
            v_max: e.require_f64("limits", "v_max")?,
            w_max_deg: e.require_f64("limits", "w_max")?,
            tau: e.require_f64("limits", "tau")?,
            beta_p: e.require_f64("limits", "beta_p")?,
            beta_r: e.require_f64("limits", "beta_r")?,
            deadband: e.take_f64("limits", "deadband")?.unwrap_or(1e-9),
            cond_max: e.take_f64("limits", "cond_max")?.unwrap_or(1e8),
            sigma_t: e.take_f64("sensor", "sigma_t")?.unwrap_or(0.0),
            sigma_r_deg: e.take_f64("sensor", "sigma_r")?.unwrap_or(0.0),
            latency_steps: e.take_usize("sensor", "latency_steps")?.unwrap_or(0),
            dropout_prob: e.take_f64("sensor", "dropout_prob")?.unwrap_or(0.0),
            seed: e.take_u64("sensor", "seed")?.unwrap_or(0),
            hand_eye: PoseConfig {
                x: e.take_f64("sensor", "hand_eye_x")?.unwrap_or(0.0),
                y: e.take_f64("sensor", "hand_eye_y")?.unwrap_or(0.0),
                z: e.take_f64("sensor", "hand_eye_z")?.unwrap_or(0.0),
                a_deg: e.take_f64("sensor", "hand_eye_a")?.unwrap_or(0.0),
                b_deg: e.take_f64("sensor", "hand_eye_b")?.unwrap_or(0.0),
                c_deg: e.take_f64("sensor", "hand_eye_c")?.unwrap_or(0.0),
            },
            initial: PoseConfig {
                x: e.require_f64("initial", "x")?,
                y: e.require_f64("initial", "y")?,
                z: e.require_f64("initial", "z")?,
                a_deg: e.take_f64("initial", "a")?.unwrap_or(0.0),
                b_deg: e.require_f64("initial", "b")?,
                c_deg: e.require_f64("initial", "c")?,
            },
            duration: e.require_f64("run", "duration")?,
            servo_start: e.require_f64("run", "servo_start")?,
            variant: match e.take_raw("run", "jacobian_variant") {
                None => JacobianVariant::Corrected,
                Some((line, value)) => value.parse().map_err(|message| ConfigError::Parse {
                    origin: origin.to_string(),
                    line,
                    message,
                })?,
            },
            out: e.take_raw("run", "out").map(|(_, v)| v),
        };
        e.reject_leftovers()?;
        config.validate(origin)?;
        Ok(config)
    }

    fn validate(&self, origin: &str) -> Result<(), ConfigError> {
        let positive = [
            ("limits.v_max", self.v_max),
            ("limits.w_max", self.w_max_deg),
            ("limits.tau", self.tau),
            ("limits.beta_p", self.beta_p),
            ("limits.beta_r", self.beta_r),
            ("limits.deadband", self.deadband),
            ("limits.cond_max", self.cond_max),
            ("goal.axis_offset", self.axis_offset),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(validation(origin, format!("{name} must be strictly positive, got {value}")));
            }
        }
        if self.deadband >= self.v_max * self.tau {
            return Err(validation(
                origin,
                format!(
                    "limits.deadband ({}) must be well below the per-period cap v_max*tau ({})",
                    self.deadband,
                    self.v_max * self.tau
                ),
            ));
        }
        if self.sigma_t < 0.0 || self.sigma_r_deg < 0.0 {
            return Err(validation(origin, "sensor.sigma_t and sensor.sigma_r must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.dropout_prob) {
            return Err(validation(origin, format!("sensor.dropout_prob must lie in [0, 1), got {}", self.dropout_prob)));
        }
        if !(self.servo_start >= 0.0) {
            return Err(validation(origin, format!("run.servo_start must be >= 0, got {}", self.servo_start)));
        }
        if !(self.duration > self.servo_start) {
            return Err(validation(
                origin,
                format!("run.duration ({}) must exceed run.servo_start ({})", self.duration, self.servo_start),
            ));
        }
        if self.duration > 1e4 {
            return Err(validation(origin, format!("run.duration must not exceed 1e4 s, got {}", self.duration)));
        }
        Ok(())
    }

    /// Canonical serialization; parsing it back yields an equal config.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[goal]");
        let _ = writeln!(s, "x = {}", self.goal_x);
        let _ = writeln!(s, "y = {}", self.goal_y);
        let _ = writeln!(s, "z = {}", self.goal_z);
        let _ = writeln!(s, "b = {}", self.goal_b_deg);
        let _ = writeln!(s, "c = {}", self.goal_c_deg);
        let _ = writeln!(s, "axis_offset = {}", self.axis_offset);
        let _ = writeln!(s, "\n[limits]");
        let _ = writeln!(s, "v_max = {}", self.v_max);
        let _ = writeln!(s, "w_max = {}", self.w_max_deg);
        let _ = writeln!(s, "tau = {}", self.tau);
        let _ = writeln!(s, "beta_p = {}", self.beta_p);
        let _ = writeln!(s, "beta_r = {}", self.beta_r);
        let _ = writeln!(s, "deadband = {}", self.deadband);
        let _ = writeln!(s, "cond_max = {}", self.cond_max);
        let _ = writeln!(s, "\n[sensor]");
        let _ = writeln!(s, "sigma_t = {}", self.sigma_t);
        let _ = writeln!(s, "sigma_r = {}", self.sigma_r_deg);
        let _ = writeln!(s, "latency_steps = {}", self.latency_steps);
        let _ = writeln!(s, "dropout_prob = {}", self.dropout_prob);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "hand_eye_x = {}", self.hand_eye.x);
        let _ = writeln!(s, "hand_eye_y = {}", self.hand_eye.y);
        let _ = writeln!(s, "hand_eye_z = {}", self.hand_eye.z);
        let _ = writeln!(s, "hand_eye_a = {}", self.hand_eye.a_deg);
        let _ = writeln!(s, "hand_eye_b = {}", self.hand_eye.b_deg);
        let _ = writeln!(s, "hand_eye_c = {}", self.hand_eye.c_deg);
        let _ = writeln!(s, "\n[initial]");
        let _ = writeln!(s, "x = {}", self.initial.x);
        let _ = writeln!(s, "y = {}", self.initial.y);
        let _ = writeln!(s, "z = {}", self.initial.z);
        let _ = writeln!(s, "a = {}", self.initial.a_deg);
        let _ = writeln!(s, "b = {}", self.initial.b_deg);
        let _ = writeln!(s, "c = {}", self.initial.c_deg);
        let _ = writeln!(s, "\n[run]");
        let _ = writeln!(s, "duration = {}", self.duration);
        let _ = writeln!(s, "servo_start = {}", self.servo_start);
        let _ = writeln!(s, "jacobian_variant = {}", self.variant.as_str());
        if let Some(out) = &self.out {
            let _ = writeln!(s, "out = {out}");
        }
        s
    }

    pub fn goal(&self) -> GoalSpec {
        GoalSpec::new(
            RigidPose::from_euler(
                Vec3::new(self.goal_x, self.goal_y, self.goal_z),
                0.0,
                self.goal_b_deg.to_radians(),
                self.goal_c_deg.to_radians(),
            ),
            self.axis_offset,
        )
    }

    pub fn limits(&self) -> Limits {
        Limits {
            v_max: self.v_max,
            w_max: self.w_max_deg.to_radians(),
            tau: self.tau,
            beta_p: self.beta_p,
            beta_r: self.beta_r,
            deadband: self.deadband,
            cond_max: self.cond_max,
        }
    }

    pub fn sensor(&self) -> SensorModel {
        SensorModel {
            hand_eye: self.hand_eye.to_pose(),
            sigma_t: self.sigma_t,
            sigma_r: self.sigma_r_deg.to_radians(),
            latency_steps: self.latency_steps,
            dropout_prob: self.dropout_prob,
            rng_seed: self.seed,
        }
    }

    /// Initial world state whose measured relative pose equals the
    /// `[initial]` section.
    pub fn initial_state(&self) -> WorldState {
        WorldState::from_relative_pose(&self.initial.to_pose())
    }
}

/// Scan configuration in file units.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub hole: PoseConfig,
    pub d_min: f64,
    pub d_max: f64,
    pub d_step: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub l_step: f64,
    pub theta_min_deg: f64,
    pub theta_max_deg: f64,
    pub theta_step_deg: f64,
    pub phi_min_deg: f64,
    pub phi_max_deg: f64,
    pub phi_step_deg: f64,
    pub range_min: f64,
    pub range_max: f64,
    pub fov_half_h_deg: f64,
    pub fov_half_v_deg: f64,
    pub incidence_max_deg: f64,
    pub out: Option<String>,
}

impl Default for ScanConfig {
    /// The worked scanning example grid with the default oracle.
    fn default() -> Self {
        Self {
            hole: PoseConfig::default(),
            d_min: 0.30,
            d_max: 1.20,
            d_step: 0.30,
            l_min: 0.0,
            l_max: 0.45,
            l_step: 0.15,
            theta_min_deg: -10.0,
            theta_max_deg: 10.0,
            theta_step_deg: 10.0,
            phi_min_deg: -10.0,
            phi_max_deg: 10.0,
            phi_step_deg: 10.0,
            range_min: 0.3,
            range_max: 3.0,
            fov_half_h_deg: 43.0,
            fov_half_v_deg: 29.0,
            incidence_max_deg: 30.0,
            out: None,
        }
    }
}

impl ScanConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_str_named(&read_file(path)?, &path.display().to_string())
    }

    pub fn from_str_named(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut e = Entries::parse(text, origin)?;
        let defaults = ScanConfig::default();
        let config = ScanConfig {
            hole: PoseConfig {
                x: e.take_f64("hole", "x")?.unwrap_or(0.0),
                y: e.take_f64("hole", "y")?.unwrap_or(0.0),
                z: e.take_f64("hole", "z")?.unwrap_or(0.0),
                a_deg: e.take_f64("hole", "a")?.unwrap_or(0.0),
                b_deg: e.take_f64("hole", "b")?.unwrap_or(0.0),
                c_deg: e.take_f64("hole", "c")?.unwrap_or(0.0),
            },
            d_min: e.require_f64("grid", "d_min")?,
            d_max: e.require_f64("grid", "d_max")?,
            d_step: e.require_f64("grid", "d_step")?,
            l_min: e.require_f64("grid", "l_min")?,
            l_max: e.require_f64("grid", "l_max")?,
            l_step: e.require_f64("grid", "l_step")?,
            theta_min_deg: e.require_f64("grid", "theta_min")?,
            theta_max_deg: e.require_f64("grid", "theta_max")?,
            theta_step_deg: e.require_f64("grid", "theta_step")?,
            phi_min_deg: e.require_f64("grid", "phi_min")?,
            phi_max_deg: e.require_f64("grid", "phi_max")?,
            phi_step_deg: e.require_f64("grid", "phi_step")?,
            range_min: e.take_f64("oracle", "range_min")?.unwrap_or(defaults.range_min),
            range_max: e.take_f64("oracle", "range_max")?.unwrap_or(defaults.range_max),
            fov_half_h_deg: e.take_f64("oracle", "fov_half_h")?.unwrap_or(defaults.fov_half_h_deg),
            fov_half_v_deg: e.take_f64("oracle", "fov_half_v")?.unwrap_or(defaults.fov_half_v_deg),
            incidence_max_deg: e
                .take_f64("oracle", "incidence_max")?
                .unwrap_or(defaults.incidence_max_deg),
            out: e.take_raw("run", "out").map(|(_, v)| v),
        };
        e.reject_leftovers()?;
        config.validate(origin)?;
        Ok(config)
    }

    fn validate(&self, origin: &str) -> Result<(), ConfigError> {
        let axes = [
            ("d", self.d_min, self.d_max, self.d_step),
            ("l", self.l_min, self.l_max, self.l_step),
            ("theta", self.theta_min_deg, self.theta_max_deg, self.theta_step_deg),
            ("phi", self.phi_min_deg, self.phi_max_deg, self.phi_step_deg),
        ];
        for (name, min, max, step) in axes {
            if !(max >= min) {
                return Err(validation(origin, format!("grid.{name}_max must be >= grid.{name}_min")));
            }
            if !(step > 0.0) {
                return Err(validation(origin, format!("grid.{name}_step must be strictly positive")));
            }
        }
        if !(self.range_min > 0.0 && self.range_min < self.range_max) {
            return Err(validation(origin, "oracle requires 0 < range_min < range_max"));
        }
        for (name, angle) in [
            ("fov_half_h", self.fov_half_h_deg),
            ("fov_half_v", self.fov_half_v_deg),
            ("incidence_max", self.incidence_max_deg),
        ] {
            if !(angle > 0.0 && angle < 90.0) {
                return Err(validation(origin, format!("oracle.{name} must lie in (0, 90) degrees")));
            }
        }
        Ok(())
    }

    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[hole]");
        let _ = writeln!(s, "x = {}", self.hole.x);
        let _ = writeln!(s, "y = {}", self.hole.y);
        let _ = writeln!(s, "z = {}", self.hole.z);
        let _ = writeln!(s, "a = {}", self.hole.a_deg);
        let _ = writeln!(s, "b = {}", self.hole.b_deg);
        let _ = writeln!(s, "c = {}", self.hole.c_deg);
        let _ = writeln!(s, "\n[grid]");
        let _ = writeln!(s, "d_min = {}", self.d_min);
        let _ = writeln!(s, "d_max = {}", self.d_max);
        let _ = writeln!(s, "d_step = {}", self.d_step);
        let _ = writeln!(s, "l_min = {}", self.l_min);
        let _ = writeln!(s, "l_max = {}", self.l_max);
        let _ = writeln!(s, "l_step = {}", self.l_step);
        let _ = writeln!(s, "theta_min = {}", self.theta_min_deg);
        let _ = writeln!(s, "theta_max = {}", self.theta_max_deg);
        let _ = writeln!(s, "theta_step = {}", self.theta_step_deg);
        let _ = writeln!(s, "phi_min = {}", self.phi_min_deg);
        let _ = writeln!(s, "phi_max = {}", self.phi_max_deg);
        let _ = writeln!(s, "phi_step = {}", self.phi_step_deg);
        let _ = writeln!(s, "\n[oracle]");
        let _ = writeln!(s, "range_min = {}", self.range_min);
        let _ = writeln!(s, "range_max = {}", self.range_max);
        let _ = writeln!(s, "fov_half_h = {}", self.fov_half_h_deg);
        let _ = writeln!(s, "fov_half_v = {}", self.fov_half_v_deg);
        let _ = writeln!(s, "incidence_max = {}", self.incidence_max_deg);
        if let Some(out) = &self.out {
            let _ = writeln!(s, "\n[run]");
            let _ = writeln!(s, "out = {out}");
        }
        s
    }

    pub fn grid(&self) -> ScanGrid {
        ScanGrid {
            d_min: self.d_min,
            d_max: self.d_max,
            d_step: self.d_step,
            l_min: self.l_min,
            l_max: self.l_max,
            l_step: self.l_step,
            theta_min: self.theta_min_deg.to_radians(),
            theta_max: self.theta_max_deg.to_radians(),
            theta_step: self.theta_step_deg.to_radians(),
            phi_min: self.phi_min_deg.to_radians(),
            phi_max: self.phi_max_deg.to_radians(),
            phi_step: self.phi_step_deg.to_radians(),
        }
    }

    pub fn oracle(&self) -> DetectOracle {
        DetectOracle {
            range_min: self.range_min,
            range_max: self.range_max,
            fov_half_h: self.fov_half_h_deg.to_radians(),
            fov_half_v: self.fov_half_v_deg.to_radians(),
            incidence_max: self.incidence_max_deg.to_radians(),
        }
    }

    pub fn hole_in_world(&self) -> RigidPose {
        self.hole.to_pose()
    }
}
