//! Point/plane feature extraction.
//!
//! The measured hole pose is re-expressed in the goal frame `D` — the
//! flange frame displaced by the desired relative pose — where two points
//! on the hole axis are formed and dotted with the three coordinate-plane
//! normals. When the flange sits exactly at the desired pose the hole
//! origin lands at `D`'s origin and the hole axis lies along `D`'s +z, so
//! every feature error vanishes.

use nalgebra::Vector3;

use crate::se3::{RigidPose, Vec3};
use crate::ServoError;

/// Desired relative pose and the axis offset of the second feature point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalSpec {
    /// Desired pose of the hole frame relative to the flange frame.
    pub desired_pose: RigidPose,
    /// Distance (m) along the hole axis from the hole origin to the
    /// second feature point. Must be > 0; scales the conditioning of the
    /// rotational Jacobian columns.
    pub axis_offset: f64,
}

impl GoalSpec {
    pub fn new(desired_pose: RigidPose, axis_offset: f64) -> Self {
        Self { desired_pose, axis_offset }
    }
}

impl Default for GoalSpec {
    fn default() -> Self {
        Self {
            desired_pose: RigidPose::identity(),
            axis_offset: 0.1,
        }
    }
}

/// Hole pose as reported by the (synthetic) vision pipeline.
///
/// The hole frame's z axis is the hole's principal axis. `valid = false`
/// models a detection dropout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoleObservation {
    pub hole_in_camera: RigidPose,
    /// Measurement time, seconds.
    pub timestamp: f64,
    pub valid: bool,
}

/// Ordered point-to-plane distances, meters.
///
/// `e11`/`e12` are the hole origin against the YZ/XZ planes, `e21`/`e22`
/// the axis point against the same planes, `e13` the hole origin against
/// the XY plane (the stand-off distance error).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureError {
    pub e11: f64,
    pub e12: f64,
    pub e21: f64,
    pub e22: f64,
    pub e13: f64,
}

impl FeatureError {
    pub const ZERO: FeatureError = FeatureError { e11: 0.0, e12: 0.0, e21: 0.0, e22: 0.0, e13: 0.0 };

    /// Components in the fixed order (e11, e12, e21, e22, e13).
    pub fn to_vector(&self) -> nalgebra::SVector<f64, 5> {
        nalgebra::SVector::<f64, 5>::new(self.e11, self.e12, self.e21, self.e22, self.e13)
    }

    pub fn from_vector(v: &nalgebra::SVector<f64, 5>) -> Self {
        Self { e11: v[0], e12: v[1], e21: v[2], e22: v[3], e13: v[4] }
    }

    pub fn max_abs(&self) -> f64 {
        self.to_vector().amax()
    }
}

/// Expresses the observed hole in the goal frame and returns the two
/// feature points: the hole origin `p1` and the axis point
/// `p2 = p1 + axis_offset * z_hole`.
///
/// The goal frame is reached from the camera through the fixed hand-eye
/// transform and the desired relative pose, so the whole chain is
/// `D <- flange <- camera <- hole`.
pub fn hole_points_in_goal_frame(
    obs: &HoleObservation,
    hand_eye: &RigidPose,
    goal: &GoalSpec,
) -> Result<(Vec3, Vec3), ServoError> {
    if !obs.valid {
        return Err(ServoError::InvalidObservation);
    }
    let hole_in_flange = hand_eye.compose(&obs.hole_in_camera);
    let hole_in_goal = goal.desired_pose.invert().compose(&hole_in_flange);
    let p1 = hole_in_goal.translation;
    let p2 = p1 + goal.axis_offset * hole_in_goal.z_axis();
    Ok((p1, p2))
}

/// Point-to-plane distances of the two feature points against the goal
/// frame's YZ, XZ and XY planes (normals x, y, z).
pub fn feature_error(p1: &Vec3, p2: &Vec3) -> FeatureError {
    let n1 = Vector3::x();
    let n2 = Vector3::y();
    let n3 = Vector3::z();
    FeatureError {
        e11: n1.dot(p1),
        e12: n2.dot(p1),
        e21: n1.dot(p2),
        e22: n2.dot(p2),
        e13: n3.dot(p1),
    }
}
