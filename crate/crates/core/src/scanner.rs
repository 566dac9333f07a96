//! Viewpoint lattice scanning around the hole.
//!
//! Before servoing, the area around the hole is swept over a lattice of
//! camera stand-off distance `d` (along the hole z axis), lateral offset
//! `l` (along the hole x axis) and camera tilts `theta`/`phi` (about the
//! camera y and x axes). A geometric detection oracle — range gate, field
//! of view, incidence angle — replaces the real point-cloud detector and
//! reports where the hole would be found.

use std::fmt::Write as _;

use nalgebra::Vector3;

use crate::se3::{RigidPose, RotationMatrix, Vec3};

/// Inclusive lattice bounds and steps; distances in meters, angles in
/// radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    pub d_min: f64,
    pub d_max: f64,
    pub d_step: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub l_step: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_step: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    pub phi_step: f64,
}

/// Lattice point count per axis: floor((max - min) / step) + 1, with a
/// small tolerance so exact multiples are not lost to rounding.
fn axis_count(min: f64, max: f64, step: f64) -> usize {
    ((max - min) / step + 1e-9).floor() as usize + 1
}

fn axis_value(min: f64, step: f64, index: usize) -> f64 {
    min + step * index as f64
}

impl ScanGrid {
    pub fn counts(&self) -> (usize, usize, usize, usize) {
        (
            axis_count(self.l_min, self.l_max, self.l_step),
            axis_count(self.d_min, self.d_max, self.d_step),
            axis_count(self.theta_min, self.theta_max, self.theta_step),
            axis_count(self.phi_min, self.phi_max, self.phi_step),
        )
    }

    pub fn total(&self) -> usize {
        let (nl, nd, nt, np) = self.counts();
        nl * nd * nt * np
    }
}

/// Geometric stand-in for the hole detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectOracle {
    /// Usable depth range of the camera, meters.
    pub range_min: f64,
    pub range_max: f64,
    /// Half-angles of the field of view, radians.
    pub fov_half_h: f64,
    pub fov_half_v: f64,
    /// Largest angle between the optical axis and the hole axis (taken
    /// as an undirected line) at which detection still succeeds.
    pub incidence_max: f64,
}

impl Default for DetectOracle {
    fn default() -> Self {
        Self {
            range_min: 0.3,
            range_max: 3.0,
            fov_half_h: 43f64.to_radians(),
            fov_half_v: 29f64.to_radians(),
            incidence_max: 30f64.to_radians(),
        }
    }
}

/// One lattice point with its camera pose in the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewpoint {
    pub d: f64,
    pub l: f64,
    pub theta: f64,
    pub phi: f64,
    pub camera_in_world: RigidPose,
}

/// Detection outcome at one viewpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewpointResult {
    pub viewpoint: Viewpoint,
    pub found: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("scan grid has {count} viewpoints, more than the {max} supported")]
    GridTooLarge { count: usize, max: usize },
}

const MAX_VIEWPOINTS: usize = 1_000_000;

/// Camera pose for lattice parameters: placed at `d` along the hole z
/// axis and `l` along the hole x axis, looking back at the hole (optical
/// axis +z), then tilted by `theta` about the camera y axis and `phi`
/// about the camera x axis.
pub fn viewpoint_pose(d: f64, l: f64, theta: f64, phi: f64, hole_in_world: &RigidPose) -> RigidPose {
    let position = hole_in_world.transform_point(&Vec3::new(l, 0.0, d));
    let face_hole = RotationMatrix::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI);
    let tilt = RotationMatrix::from_axis_angle(&Vector3::y_axis(), theta)
        * RotationMatrix::from_axis_angle(&Vector3::x_axis(), phi);
    RigidPose::new(position, hole_in_world.rotation * face_hole * tilt)
}

/// Cartesian product over the four axes, ordered l (outer), d, theta,
/// phi (inner).
pub fn generate_grid(grid: &ScanGrid, hole_in_world: &RigidPose) -> Result<Vec<Viewpoint>, ScanError> {
    let count = grid.total();
    if count > MAX_VIEWPOINTS {
        return Err(ScanError::GridTooLarge { count, max: MAX_VIEWPOINTS });
    }
    let (nl, nd, nt, np) = grid.counts();
    let mut viewpoints = Vec::with_capacity(count);
    for il in 0..nl {
        let l = axis_value(grid.l_min, grid.l_step, il);
        for id in 0..nd {
            let d = axis_value(grid.d_min, grid.d_step, id);
            for it in 0..nt {
                let theta = axis_value(grid.theta_min, grid.theta_step, it);
                for ip in 0..np {
                    let phi = axis_value(grid.phi_min, grid.phi_step, ip);
                    viewpoints.push(Viewpoint {
                        d,
                        l,
                        theta,
                        phi,
                        camera_in_world: viewpoint_pose(d, l, theta, phi, hole_in_world),
                    });
                }
            }
        }
    }
    Ok(viewpoints)
}

/// Slack on the inclusive detection bounds so lattice points that sit
/// exactly on a bound are not lost to pose-chain rounding.
const BOUND_EPS: f64 = 1e-9;

/// Applies the three detection predicates: range gate, field of view,
/// incidence angle. Bounds are inclusive.
pub fn evaluate_viewpoint(
    viewpoint: &Viewpoint,
    oracle: &DetectOracle,
    hole_in_world: &RigidPose,
) -> ViewpointResult {
    let camera = &viewpoint.camera_in_world;
    let hole_in_camera = camera.invert().transform_point(&hole_in_world.translation);
    let distance = hole_in_camera.norm();

    let in_range =
        oracle.range_min - BOUND_EPS <= distance && distance <= oracle.range_max + BOUND_EPS;
    let in_front = hole_in_camera.z > 0.0;
    let in_fov = in_front
        && hole_in_camera.x.atan2(hole_in_camera.z).abs() <= oracle.fov_half_h + BOUND_EPS
        && hole_in_camera.y.atan2(hole_in_camera.z).abs() <= oracle.fov_half_v + BOUND_EPS;

    let optical_axis = camera.z_axis();
    let hole_axis = hole_in_world.z_axis();
    let incidence = optical_axis.dot(&hole_axis).abs().min(1.0).acos();
    let incidence_ok = incidence <= oracle.incidence_max + BOUND_EPS;

    ViewpointResult { viewpoint: *viewpoint, found: in_range && in_fov && incidence_ok }
}

/// Per-axis extent of the found viewpoints.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
}

impl AxisRange {
    fn fold(acc: Option<AxisRange>, v: f64) -> Option<AxisRange> {
        Some(match acc {
            None => AxisRange { min: v, max: v },
            Some(r) => AxisRange { min: r.min.min(v), max: r.max.max(v) },
        })
    }
}

/// Scan outcome: every lattice point plus the found-set summary.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanReport {
    pub results: Vec<ViewpointResult>,
    pub found_count: usize,
    pub d_range: Option<AxisRange>,
    pub l_range: Option<AxisRange>,
    pub theta_range: Option<AxisRange>,
    pub phi_range: Option<AxisRange>,
}

pub const SCAN_CSV_HEADER: &str = "l,d,theta,phi,found";

impl ScanReport {
    /// CSV rows in lattice order; meters and degrees, found as 0/1.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.results.len() * 48 + 32);
        out.push_str(SCAN_CSV_HEADER);
        out.push('\n');
        for r in &self.results {
            let v = &r.viewpoint;
            let _ = writeln!(
                out,
                "{:.6},{:.6},{:.6},{:.6},{}",
                v.l,
                v.d,
                v.theta.to_degrees(),
                v.phi.to_degrees(),
                u8::from(r.found),
            );
        }
        out
    }

    /// Human-readable summary block for the sidecar file.
    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "viewpoints: {}", self.results.len());
        let _ = writeln!(out, "found: {}", self.found_count);
        let fmt_m = |r: &Option<AxisRange>| match r {
            Some(r) => format!("{:.3} .. {:.3} m", r.min, r.max),
            None => "n/a".to_string(),
        };
        let fmt_deg = |r: &Option<AxisRange>| match r {
            Some(r) => format!("{:.1} .. {:.1} deg", r.min.to_degrees(), r.max.to_degrees()),
            None => "n/a".to_string(),
        };
        let _ = writeln!(out, "found d range: {}", fmt_m(&self.d_range));
        let _ = writeln!(out, "found l range: {}", fmt_m(&self.l_range));
        let _ = writeln!(out, "found theta range: {}", fmt_deg(&self.theta_range));
        let _ = writeln!(out, "found phi range: {}", fmt_deg(&self.phi_range));
        out
    }
}

/// Evaluates every lattice point and assembles the report.
pub fn run_scan(
    grid: &ScanGrid,
    oracle: &DetectOracle,
    hole_in_world: &RigidPose,
) -> Result<ScanReport, ScanError> {
    let viewpoints = generate_grid(grid, hole_in_world)?;
    let mut report = ScanReport::default();
    report.results.reserve(viewpoints.len());
    for vp in &viewpoints {
        let result = evaluate_viewpoint(vp, oracle, hole_in_world);
        if result.found {
            report.found_count += 1;
            report.d_range = AxisRange::fold(report.d_range, vp.d);
            report.l_range = AxisRange::fold(report.l_range, vp.l);
            report.theta_range = AxisRange::fold(report.theta_range, vp.theta);
            report.phi_range = AxisRange::fold(report.phi_range, vp.phi);
        }
        report.results.push(result);
    }
    log::debug!("scan: {} / {} viewpoints found the hole", report.found_count, report.results.len());
    Ok(report)
}
