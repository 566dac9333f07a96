//! Feature-based visual servoing toolkit.
//!
//! Aligns a simulated robot flange with a cylindrical hole by driving
//! five point-to-plane distances to zero: two points on the hole axis
//! are measured against the three coordinate planes of the goal frame,
//! a 5x5 feature Jacobian maps the distances to pose increments, and a
//! velocity limiter scales each increment to respect the robot's
//! task-space speed caps. A deterministic kinematic plant with a
//! synthetic eye-in-hand sensor closes the loop, and a viewpoint scanner
//! sweeps camera poses around the hole to map where a detector would
//! succeed.

pub mod config;
pub mod features;
pub mod plant;
pub mod scanner;
pub mod se3;
pub mod servo;

/// Controller-level failures.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ServoError {
    /// The observation was flagged invalid (detection dropout).
    #[error("observation marked invalid")]
    InvalidObservation,
    /// The feature Jacobian is too close to singular to invert safely.
    #[error("jacobian ill-conditioned (cond {cond:.3e} exceeds {cond_max:.3e})")]
    IllConditioned { cond: f64, cond_max: f64 },
}

pub use config::{ConfigError, RunConfig, ScanConfig};
pub use features::{feature_error, hole_points_in_goal_frame, FeatureError, GoalSpec, HoleObservation};
pub use plant::{
    apply_correction, run_closed_loop, LoopAbort, SensorModel, SensorSim, StepRecord,
    TrajectoryLog, WorldState, TRAJECTORY_CSV_HEADER,
};
pub use scanner::{
    evaluate_viewpoint, generate_grid, run_scan, DetectOracle, ScanError, ScanGrid, ScanReport,
    Viewpoint, ViewpointResult, SCAN_CSV_HEADER,
};
pub use se3::{
    euler_to_rotation, rotation_to_euler, EulerDecomposition, EulerZyx, RigidPose, RotationMatrix,
    UnitVec3, Vec3,
};
pub use servo::{
    build_jacobian, check_jacobian_finite_difference, finite_difference_jacobian,
    limit_corrections, newton_step, servo_step, Correction, FdCheckReport, Jacobian5,
    JacobianVariant, Limits, StepDiagnostics,
};
