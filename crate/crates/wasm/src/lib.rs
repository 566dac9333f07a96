//! wasm-bindgen surface for the browser demo.
//!
//! Three interactive operations, each returning a JSON string for the
//! static page to plot: a closed-loop servo run, a viewpoint scan map,
//! and a Jacobian probe at a chosen relative pose.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use servokit_core::servo::JacobianVariant;
use servokit_core::{
    build_jacobian, feature_error, finite_difference_jacobian, hole_points_in_goal_frame,
    newton_step, run_closed_loop, run_scan, GoalSpec, HoleObservation, RigidPose, RunConfig,
    ScanConfig, Vec3,
};

fn variant_from_flag(printed: bool) -> JacobianVariant {
    if printed {
        JacobianVariant::AsPrinted
    } else {
        JacobianVariant::Corrected
    }
}

#[derive(Serialize)]
struct TrajectoryPoint {
    t: f64,
    x: f64,
    y: f64,
    z: f64,
    b_deg: f64,
    c_deg: f64,
    e: [f64; 5],
    sat_t: bool,
    sat_r: bool,
}

#[derive(Serialize)]
struct ServoRunOut {
    points: Vec<TrajectoryPoint>,
    steps: usize,
    final_max_abs_e: f64,
    converged_1mm_at: Option<f64>,
    error: Option<String>,
}

/// Closed-loop run with the experiment defaults, selected knobs exposed
/// as sliders. Returns a decimated trajectory as JSON.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn servo_run_json(
    init_x: f64,
    init_y: f64,
    init_z: f64,
    init_b_deg: f64,
    init_c_deg: f64,
    beta: f64,
    v_max_mm_s: f64,
    w_max_deg_s: f64,
    duration_s: f64,
    servo_start_s: f64,
    sigma_t_mm: f64,
    seed: u32,
    printed_variant: bool,
    stride: usize,
) -> String {
    let mut cfg = RunConfig::default();
    cfg.initial.x = init_x;
    cfg.initial.y = init_y;
    cfg.initial.z = init_z;
    cfg.initial.b_deg = init_b_deg;
    cfg.initial.c_deg = init_c_deg;
    cfg.beta_p = beta.max(1e-6);
    cfg.beta_r = beta.max(1e-6);
    cfg.v_max = (v_max_mm_s / 1000.0).max(1e-6);
    cfg.w_max_deg = w_max_deg_s.max(1e-3);
    cfg.duration = duration_s.clamp(1.0, 120.0);
    cfg.servo_start = servo_start_s.clamp(0.0, cfg.duration - cfg.tau);
    cfg.sigma_t = sigma_t_mm / 1000.0;
    cfg.seed = seed as u64;
    cfg.variant = variant_from_flag(printed_variant);

    let stride = stride.max(1);
    let result = run_closed_loop(
        cfg.initial_state(),
        &cfg.goal(),
        &cfg.limits(),
        cfg.sensor(),
        cfg.duration,
        cfg.servo_start,
        cfg.variant,
    );

    let out = match result {
        Ok(log) => {
            let mut converged = None;
            for r in &log.records {
                if r.error.max_abs() < 1e-3 && r.t >= cfg.servo_start {
                    converged = Some(r.t);
                    break;
                }
            }
            let points = log
                .records
                .iter()
                .enumerate()
                .filter(|(i, _)| i % stride == 0)
                .map(|(_, r)| TrajectoryPoint {
                    t: r.t,
                    x: r.x,
                    y: r.y,
                    z: r.z,
                    b_deg: r.b.to_degrees(),
                    c_deg: r.c.to_degrees(),
                    e: [r.error.e11, r.error.e12, r.error.e21, r.error.e22, r.error.e13],
                    sat_t: r.correction.saturated_t,
                    sat_r: r.correction.saturated_r,
                })
                .collect();
            ServoRunOut {
                points,
                steps: log.records.len(),
                final_max_abs_e: log.records.last().map(|r| r.error.max_abs()).unwrap_or(0.0),
                converged_1mm_at: converged,
                error: None,
            }
        }
        Err(abort) => ServoRunOut {
            points: Vec::new(),
            steps: abort.partial.records.len(),
            final_max_abs_e: f64::NAN,
            converged_1mm_at: None,
            error: Some(abort.to_string()),
        },
    };
    serde_json::to_string(&out).expect("serializable")
}

#[derive(Serialize)]
struct ScanPoint {
    l: f64,
    d: f64,
    theta_deg: f64,
    phi_deg: f64,
    found: bool,
}

#[derive(Serialize)]
struct ScanOut {
    points: Vec<ScanPoint>,
    found: usize,
    total: usize,
    error: Option<String>,
}

/// Viewpoint scan over the worked example lattice with adjustable
/// bounds and oracle; returns the detection map as JSON.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn scan_run_json(
    d_min: f64,
    d_max: f64,
    d_step: f64,
    l_max: f64,
    l_step: f64,
    angle_span_deg: f64,
    angle_step_deg: f64,
    range_min: f64,
    range_max: f64,
    fov_half_h_deg: f64,
    fov_half_v_deg: f64,
    incidence_max_deg: f64,
) -> String {
    let mut cfg = ScanConfig::default();
    cfg.d_min = d_min.max(0.01);
    cfg.d_max = d_max.max(cfg.d_min);
    cfg.d_step = d_step.max(0.01);
    cfg.l_min = 0.0;
    cfg.l_max = l_max.max(0.0);
    cfg.l_step = l_step.max(0.01);
    cfg.theta_min_deg = -angle_span_deg.abs();
    cfg.theta_max_deg = angle_span_deg.abs();
    cfg.theta_step_deg = angle_step_deg.max(1.0);
    cfg.phi_min_deg = cfg.theta_min_deg;
    cfg.phi_max_deg = cfg.theta_max_deg;
    cfg.phi_step_deg = cfg.theta_step_deg;
    cfg.range_min = range_min.max(0.01);
    cfg.range_max = range_max.max(cfg.range_min + 0.01);
    cfg.fov_half_h_deg = fov_half_h_deg.clamp(1.0, 89.0);
    cfg.fov_half_v_deg = fov_half_v_deg.clamp(1.0, 89.0);
    cfg.incidence_max_deg = incidence_max_deg.clamp(1.0, 89.0);

    let out = match run_scan(&cfg.grid(), &cfg.oracle(), &cfg.hole_in_world()) {
        Ok(report) => ScanOut {
            total: report.results.len(),
            found: report.found_count,
            points: report
                .results
                .iter()
                .map(|r| ScanPoint {
                    l: r.viewpoint.l,
                    d: r.viewpoint.d,
                    theta_deg: r.viewpoint.theta.to_degrees(),
                    phi_deg: r.viewpoint.phi.to_degrees(),
                    found: r.found,
                })
                .collect(),
            error: None,
        },
        Err(e) => ScanOut { points: Vec::new(), found: 0, total: 0, error: Some(e.to_string()) },
    };
    serde_json::to_string(&out).expect("serializable")
}

#[derive(Serialize)]
struct JacobianOut {
    matrix: [[f64; 5]; 5],
    det: f64,
    condition: f64,
    fd_max_deviation: f64,
    e: [f64; 5],
    raw_step: Option<[f64; 5]>,
    solver_error: Option<String>,
}

/// Jacobian probe at a relative pose: entries, determinant, condition
/// number, finite-difference agreement and the raw correction solve.
/// Switching to the printed variant near alignment shows its degeneracy.
#[wasm_bindgen]
pub fn jacobian_probe_json(
    x: f64,
    y: f64,
    z: f64,
    b_deg: f64,
    c_deg: f64,
    axis_offset: f64,
    printed_variant: bool,
) -> String {
    let variant = variant_from_flag(printed_variant);
    let goal = GoalSpec::new(
        RigidPose::from_translation(0.0, 0.15, 0.6),
        axis_offset.max(1e-3),
    );
    let measured = RigidPose::from_euler(
        Vec3::new(x, y, z),
        0.0,
        b_deg.to_radians(),
        c_deg.to_radians(),
    );
    let obs = HoleObservation { hole_in_camera: measured, timestamp: 0.0, valid: true };
    let (p1, p2) = hole_points_in_goal_frame(&obs, &RigidPose::identity(), &goal)
        .expect("observation is valid");
    let error = feature_error(&p1, &p2);
    let jac = build_jacobian(&p1, &p2, variant);
    let fd = finite_difference_jacobian(&p1, &p2, variant, 1e-6);

    let mut matrix = [[0.0; 5]; 5];
    let mut fd_max_deviation: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            matrix[i][j] = jac.matrix[(i, j)];
            let dev = (fd[(i, j)] - jac.matrix[(i, j)]).abs() / jac.matrix[(i, j)].abs().max(1.0);
            fd_max_deviation = fd_max_deviation.max(dev);
        }
    }

    let (raw_step, solver_error) = match newton_step(&error, &jac, 1e8) {
        Ok(v) => (Some([v[0], v[1], v[2], v[3], v[4]]), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let e = error.to_vector();
    let out = JacobianOut {
        matrix,
        det: jac.determinant(),
        condition: jac.condition_1norm(),
        fd_max_deviation,
        e: [e[0], e[1], e[2], e[3], e[4]],
        raw_step,
        solver_error,
    };
    serde_json::to_string(&out).expect("serializable")
}
