//! Deterministic kinematic world closing the servo loop.
//!
//! The flange is a pure kinematic integrator stepped at the fixed control
//! period; the hole never moves. A synthetic eye-in-hand sensor reports
//! the hole pose in the camera frame with optional Gaussian noise, a
//! fixed latency and detection dropout, all driven by a seeded RNG so
//! that identical configurations replay bit-identically.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::features::{FeatureError, GoalSpec, HoleObservation};
use crate::se3::{euler_to_rotation, RigidPose, RotationMatrix, Vec3};
use crate::servo::{servo_step, Correction, JacobianVariant, Limits};
use crate::ServoError;

/// Flange and hole poses at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldState {
    pub flange_in_world: RigidPose,
    /// Fixed for the duration of a run.
    pub hole_in_world: RigidPose,
    /// Simulation time, seconds.
    pub t: f64,
}

impl WorldState {
    /// World state whose measured relative pose (hole in flange frame)
    /// equals `hole_in_flange`, with the hole frame as the world frame.
    pub fn from_relative_pose(hole_in_flange: &RigidPose) -> Self {
        WorldState {
            flange_in_world: hole_in_flange.invert(),
            hole_in_world: RigidPose::identity(),
            t: 0.0,
        }
    }

    /// Hole pose in the flange frame (the quantity the sensor measures
    /// when the hand-eye transform is identity).
    pub fn relative_pose(&self) -> RigidPose {
        self.flange_in_world.invert().compose(&self.hole_in_world)
    }
}

/// Synthetic sensor parameters standing in for the camera plus vision
/// pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel {
    /// Camera pose in the flange frame.
    pub hand_eye: RigidPose,
    /// Translation noise per axis, m (std dev).
    pub sigma_t: f64,
    /// Rotation noise angle, rad (std dev), about a uniform random axis.
    pub sigma_r: f64,
    /// Measurement delay in whole control periods.
    pub latency_steps: usize,
    /// Probability per period of a detection dropout, in [0, 1).
    pub dropout_prob: f64,
    pub rng_seed: u64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            hand_eye: RigidPose::identity(),
            sigma_t: 0.0,
            sigma_r: 0.0,
            latency_steps: 0,
            dropout_prob: 0.0,
            rng_seed: 0,
        }
    }
}

/// Stateful sensor: latency queue plus seeded noise stream.
pub struct SensorSim {
    model: SensorModel,
    queue: VecDeque<(f64, RigidPose)>,
    rng: ChaCha8Rng,
}

impl SensorSim {
    pub fn new(model: SensorModel) -> Self {
        Self {
            model,
            queue: VecDeque::with_capacity(model.latency_steps + 1),
            rng: ChaCha8Rng::seed_from_u64(model.rng_seed),
        }
    }

    pub fn model(&self) -> &SensorModel {
        &self.model
    }

    /// One sensor reading: the true hole-in-camera pose delayed by the
    /// latency queue, perturbed by noise, possibly dropped. The timestamp
    /// is the capture time of the delayed sample.
    pub fn observe(&mut self, state: &WorldState) -> HoleObservation {
        let camera_in_world = state.flange_in_world.compose(&self.model.hand_eye);
        let truth = camera_in_world.invert().compose(&state.hole_in_world);

        self.queue.push_back((state.t, truth));
        let (timestamp, delayed) = if self.queue.len() > self.model.latency_steps {
            self.queue.pop_front().unwrap()
        } else {
            // Warm-up: fall back to the oldest sample available.
            *self.queue.front().unwrap()
        };

        if self.model.dropout_prob > 0.0 && self.rng.random::<f64>() < self.model.dropout_prob {
            return HoleObservation { hole_in_camera: delayed, timestamp, valid: false };
        }

        let mut measured = delayed;
        if self.model.sigma_t > 0.0 {
            let normal = Normal::new(0.0, self.model.sigma_t).expect("finite sigma_t");
            measured.translation += Vec3::new(
                normal.sample(&mut self.rng),
                normal.sample(&mut self.rng),
                normal.sample(&mut self.rng),
            );
        }
        if self.model.sigma_r > 0.0 {
            let axis = loop {
                let v = Vec3::new(
                    self.rng.random_range(-1.0..1.0),
                    self.rng.random_range(-1.0..1.0),
                    self.rng.random_range(-1.0..1.0),
                );
                let n = v.norm();
                if n > 1e-3 {
                    break v / n;
                }
            };
            let angle = Normal::new(0.0, self.model.sigma_r).expect("finite sigma_r").sample(&mut self.rng);
            let perturb = RotationMatrix::from_axis_angle(&nalgebra::Unit::new_unchecked(axis), angle);
            measured.rotation = perturb * measured.rotation;
        }

        HoleObservation { hole_in_camera: measured, timestamp, valid: true }
    }
}

/// Moves the flange by a velocity-limited correction expressed in the
/// goal frame.
///
/// Translation is applied along the goal frame's axes and rotation as the
/// y-axis (b) generator composed with the variant's c generator, so the
/// hole-point coordinates in the goal frame update as
/// `p <- p - (dp/dx) * correction` to first order. A zero correction
/// returns the state unchanged, bit for bit.
pub fn apply_correction(state: &WorldState, correction: &Correction, goal: &GoalSpec) -> WorldState {
    if correction.is_zero() {
        return *state;
    }
    let motion = RigidPose::new(
        correction.translation(),
        euler_to_rotation(0.0, correction.db, correction.dc),
    );
    let flange_to_goal = goal.desired_pose;
    let flange_in_world = state
        .flange_in_world
        .compose(&flange_to_goal)
        .compose(&motion)
        .compose(&flange_to_goal.invert());
    WorldState { flange_in_world, ..*state }
}

/// One line of the trajectory log. Pose and angles are stored in SI
/// units (meters/radians); the CSV writer converts angles to degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    /// Measured relative pose (hole in flange frame): x, y, z in meters.
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Z-Y-X Euler angles of the relative pose, radians.
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Feature error the controller acted on (zeros when no valid
    /// observation was available).
    pub error: FeatureError,
    pub correction: Correction,
    pub obs_valid: bool,
}

/// Fixed-schema per-period log of a closed-loop run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    pub records: Vec<StepRecord>,
}

pub const TRAJECTORY_CSV_HEADER: &str =
    "t,x,y,z,a,b,c,e11,e12,e21,e22,e13,dx,dy,dz,db,dc,sat_t,sat_r,obs_valid";

impl TrajectoryLog {
    /// Serializes with the fixed column schema; angles in degrees,
    /// booleans as 0/1, dot-decimal formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.records.len() * 160 + 64);
        out.push_str(TRAJECTORY_CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{:.6},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{},{},{}",
                r.t,
                r.x,
                r.y,
                r.z,
                r.a.to_degrees(),
                r.b.to_degrees(),
                r.c.to_degrees(),
                r.error.e11,
                r.error.e12,
                r.error.e21,
                r.error.e22,
                r.error.e13,
                r.correction.dx,
                r.correction.dy,
                r.correction.dz,
                r.correction.db.to_degrees(),
                r.correction.dc.to_degrees(),
                u8::from(r.correction.saturated_t),
                u8::from(r.correction.saturated_r),
                u8::from(r.obs_valid),
            );
        }
        out
    }
}

/// Closed-loop abort: the solver failed for more than the tolerated
/// number of consecutive periods.
#[derive(Debug, thiserror::Error)]
#[error("servo loop aborted at step {step} (t = {t:.3} s): {source}")]
pub struct LoopAbort {
    pub step: usize,
    pub t: f64,
    #[source]
    pub source: ServoError,
    /// Log of everything up to the abort.
    pub partial: TrajectoryLog,
}

const MAX_CONSECUTIVE_SOLVER_FAILURES: usize = 10;

/// Runs the fixed-step loop: observe, servo, apply, log — holding still
/// before `servo_start` and on invalid observations.
pub fn run_closed_loop(
    initial: WorldState,
    goal: &GoalSpec,
    limits: &Limits,
    sensor_model: SensorModel,
    duration: f64,
    servo_start: f64,
    variant: JacobianVariant,
) -> Result<TrajectoryLog, LoopAbort> {
    let steps = (duration / limits.tau).round() as usize;
    let mut sensor = SensorSim::new(sensor_model);
    let mut state = initial;
    let mut log = TrajectoryLog { records: Vec::with_capacity(steps) };
    let mut consecutive_failures = 0usize;

    for k in 0..steps {
        state.t = k as f64 * limits.tau;
        let obs = sensor.observe(&state);

        let mut error = FeatureError::ZERO;
        let mut correction = Correction::ZERO;
        if obs.valid {
            if state.t >= servo_start {
                match servo_step(&obs, goal, &sensor_model.hand_eye, limits, variant) {
                    Ok((corr, err, diag)) => {
                        consecutive_failures = 0;
                        correction = corr;
                        error = err;
                        log::trace!(
                            "step {k}: cond {:.3e}, sat_t {}, sat_r {}",
                            diag.condition, diag.saturated_t, diag.saturated_r
                        );
                    }
                    Err(e @ ServoError::IllConditioned { .. }) => {
                        consecutive_failures += 1;
                        log::debug!("step {k}: solver failure ({e}); holding");
                        if consecutive_failures > MAX_CONSECUTIVE_SOLVER_FAILURES {
                            return Err(LoopAbort { step: k, t: state.t, source: e, partial: log });
                        }
                    }
                    Err(e) => {
                        // Invalid observation slipped through; hold.
                        log::debug!("step {k}: {e}; holding");
                    }
                }
            } else {
                // Robot holds before servo start, but the measured error
                // is still logged for the record.
                let (p1, p2) = crate::features::hole_points_in_goal_frame(
                    &obs,
                    &sensor_model.hand_eye,
                    goal,
                )
                .expect("observation validity already checked");
                error = crate::features::feature_error(&p1, &p2);
            }
        }

        let rel = state.relative_pose();
        let euler = rel.euler();
        log.records.push(StepRecord {
            t: state.t,
            x: rel.translation.x,
            y: rel.translation.y,
            z: rel.translation.z,
            a: euler.angles.a,
            b: euler.angles.b,
            c: euler.angles.c,
            error,
            correction,
            obs_valid: obs.valid,
        });

        state = apply_correction(&state, &correction, goal);
    }

    Ok(log)
}
