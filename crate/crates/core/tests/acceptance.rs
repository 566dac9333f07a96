//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (run with `cargo test --test acceptance -- --nocapture` to see
//! the lines for passing criteria too).

use std::path::PathBuf;
use std::time::Instant;

use servokit_core::servo::JacobianVariant;
use servokit_core::{
    apply_correction, build_jacobian, check_jacobian_finite_difference, feature_error,
    hole_points_in_goal_frame, run_closed_loop, servo_step, GoalSpec, HoleObservation, RigidPose,
    RunConfig, ScanConfig, TrajectoryLog, Vec3, WorldState,
};

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn paper_run() -> (RunConfig, TrajectoryLog, f64) {
    let cfg = RunConfig::load(&config_path("paper_sec4.cfg")).expect("shipped config loads");
    let started = Instant::now();
    let log = run_closed_loop(
        cfg.initial_state(),
        &cfg.goal(),
        &cfg.limits(),
        cfg.sensor(),
        cfg.duration,
        cfg.servo_start,
        cfg.variant,
    )
    .expect("paper run completes");
    let elapsed = started.elapsed().as_secs_f64();
    (cfg, log, elapsed)
}

/// Criterion 1: corrected Jacobian vs central finite differences, 1000
/// random configurations, max relative deviation <= 1e-6, under 1 s.
#[test]
fn criterion_1_jacobian_finite_difference() {
    let started = Instant::now();
    let report = check_jacobian_finite_difference(JacobianVariant::Corrected, 1000, 0);
    let elapsed = started.elapsed().as_secs_f64();
    let ok = report.max_deviation <= 1e-6 && elapsed < 1.0;
    println!(
        "criterion 1 {}: corrected Jacobian vs finite differences, 1000 trials, \
         max deviation {:.3e} (tol 1e-6), runtime {:.3} s (< 1 s)",
        if ok { "PASS" } else { "FAIL" },
        report.max_deviation,
        elapsed
    );
    assert!(
        report.max_deviation <= 1e-6,
        "criterion 1 FAIL: max deviation {:.3e} exceeds 1e-6",
        report.max_deviation
    );
    assert!(elapsed < 1.0, "criterion 1 FAIL: runtime {elapsed:.3} s exceeds 1 s");
}

/// Criterion 2: at p1 = 0, p2 = (0, 0, lambda) the printed variant is
/// singular while the corrected variant keeps |det| >= lambda*(1-1e-9).
/// The stated bound coincides with the true |det| = lambda^2 at
/// lambda = 1, the configuration the criterion's example pins.
#[test]
fn criterion_2_printed_variant_degeneracy() {
    let lambda = 1.0;
    let p1 = Vec3::zeros();
    let p2 = Vec3::new(0.0, 0.0, lambda);
    let printed = build_jacobian(&p1, &p2, JacobianVariant::AsPrinted).determinant().abs();
    let corrected = build_jacobian(&p1, &p2, JacobianVariant::Corrected).determinant().abs();
    let ok = printed < 1e-12 && corrected >= lambda * (1.0 - 1e-9);
    println!(
        "criterion 2 {}: at alignment |det as_printed| = {:.3e} (< 1e-12), \
         |det corrected| = {:.9} (>= {:.9})",
        if ok { "PASS" } else { "FAIL" },
        printed,
        corrected,
        lambda * (1.0 - 1e-9)
    );
    assert!(printed < 1e-12, "criterion 2 FAIL: printed |det| = {printed:.3e}");
    assert!(
        corrected >= lambda * (1.0 - 1e-9),
        "criterion 2 FAIL: corrected |det| = {corrected:.9}"
    );
}

/// Criterion 3: with the shipped experiment config, every feature error
/// component stays below 1 mm from some time in [14 s, 24 s] on, and the
/// 6250-step run takes under a second.
#[test]
fn criterion_3_convergence_time_scale() {
    let (cfg, log, elapsed) = paper_run();
    assert_eq!(log.records.len(), 6250, "expected 6250 control periods");

    // First time from which all five |e| < 1 mm holds for good.
    let mut converged_at: Option<f64> = None;
    for r in log.records.iter().rev() {
        if r.error.max_abs() < 1e-3 {
            converged_at = Some(r.t);
        } else {
            break;
        }
    }
    // Guard against trivial "never above threshold" misreads: the error
    // must actually have been large after servo start.
    let peak = log
        .records
        .iter()
        .filter(|r| r.t >= cfg.servo_start)
        .map(|r| r.error.max_abs())
        .fold(0.0, f64::max);
    assert!(peak > 0.1, "run never carried a large error; setup is wrong");

    let within_window = matches!(converged_at, Some(t) if (14.0..=24.0).contains(&t));
    let ok = within_window && elapsed < 1.0;
    println!(
        "criterion 3 {}: |e| < 1 mm sustained from t = {} (window 14..24 s), \
         runtime {:.3} s (< 1 s)",
        if ok { "PASS" } else { "FAIL" },
        converged_at.map_or("never".to_string(), |t| format!("{t:.3} s")),
        elapsed
    );
    assert!(elapsed < 1.0, "criterion 3 FAIL: runtime {elapsed:.3} s exceeds 1 s");
    assert!(
        within_window,
        "criterion 3 FAIL: all-components |e| < 1 mm sustained from {} \
         (required no earlier than 14 s, no later than 24 s); \
         max |e| at t = 24 s is {:.3e} m",
        converged_at.map_or("never".to_string(), |t| format!("t = {t:.3} s")),
        log.records
            .iter()
            .find(|r| r.t >= 24.0)
            .map(|r| r.error.max_abs())
            .unwrap_or(f64::NAN)
    );
}

/// Criterion 4: over the translation-saturated interval the measured z
/// descends at -50 mm/s within +-5%, and no step exceeds the 0.2 mm /
/// 0.16 deg per-period caps.
#[test]
fn criterion_4_saturated_descent_rate() {
    let (_cfg, log, _) = paper_run();

    let cap_t = 2e-4;
    let cap_r = 0.16f64.to_radians();
    for r in &log.records {
        assert!(
            r.correction.translation_norm() <= cap_t + 1e-12,
            "criterion 4 FAIL: translational increment {:.6e} m exceeds 0.2 mm at t = {:.3}",
            r.correction.translation_norm(),
            r.t
        );
        assert!(
            r.correction.rotation_norm() <= cap_r + 1e-12,
            "criterion 4 FAIL: rotational increment {:.6e} rad exceeds 0.16 deg at t = {:.3}",
            r.correction.rotation_norm(),
            r.t
        );
    }

    let saturated: Vec<_> = log.records.iter().filter(|r| r.correction.saturated_t).collect();
    assert!(!saturated.is_empty(), "criterion 4 FAIL: translational cap never engaged");
    // Least-squares slope of z(t) over the saturated rows.
    let n = saturated.len() as f64;
    let mean_t = saturated.iter().map(|r| r.t).sum::<f64>() / n;
    let mean_z = saturated.iter().map(|r| r.z).sum::<f64>() / n;
    let cov = saturated.iter().map(|r| (r.t - mean_t) * (r.z - mean_z)).sum::<f64>();
    let var = saturated.iter().map(|r| (r.t - mean_t) * (r.t - mean_t)).sum::<f64>();
    let slope = cov / var;

    let ok = (slope - (-0.05)).abs() <= 0.05 * 0.05;
    println!(
        "criterion 4 {}: saturated interval t = {:.3}..{:.3} s, z(t) slope {:.4} m/s \
         (required -0.050 +- 0.0025), per-step caps respected",
        if ok { "PASS" } else { "FAIL" },
        saturated.first().unwrap().t,
        saturated.last().unwrap().t,
        slope
    );
    assert!(
        ok,
        "criterion 4 FAIL: least-squares z slope over the saturated interval is \
         {:.4} m/s, outside -50 mm/s +- 5%",
        slope
    );
}

/// Criterion 5: one unsaturated noiseless step contracts every nonzero
/// error component by (1 - beta) within 5%, over 100 random small
/// displacements.
#[test]
fn criterion_5_linear_contraction() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);

    let cfg = RunConfig::load(&config_path("paper_sec4.cfg")).expect("shipped config loads");
    let goal = cfg.goal();
    let limits = cfg.limits();
    let beta = limits.beta_p;
    let hand_eye = RigidPose::identity();

    let mut checked_components = 0usize;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let dt = Vec3::new(
            rng.random_range(-5e-3..5e-3),
            rng.random_range(-5e-3..5e-3),
            rng.random_range(-5e-3..5e-3),
        );
        let db = rng.random_range(-0.5f64.to_radians()..0.5f64.to_radians());
        let dc = rng.random_range(-0.5f64.to_radians()..0.5f64.to_radians());

        let measured = RigidPose::from_euler(
            Vec3::new(cfg.goal_x + dt.x, cfg.goal_y + dt.y, cfg.goal_z + dt.z),
            0.0,
            db,
            dc,
        );
        let state = WorldState::from_relative_pose(&measured);
        let obs = HoleObservation { hole_in_camera: state.relative_pose(), timestamp: 0.0, valid: true };
        let (correction, before, _) =
            servo_step(&obs, &goal, &hand_eye, &limits, cfg.variant).expect("solvable");
        assert!(
            !correction.saturated_t && !correction.saturated_r,
            "criterion 5 setup broken: small displacement saturated the limiter"
        );

        let after_state = apply_correction(&state, &correction, &goal);
        let obs2 = HoleObservation {
            hole_in_camera: after_state.relative_pose(),
            timestamp: limits.tau,
            valid: true,
        };
        let (p1, p2) = hole_points_in_goal_frame(&obs2, &hand_eye, &goal).expect("valid");
        let after = feature_error(&p1, &p2);

        let before_v = before.to_vector();
        let after_v = after.to_vector();
        for i in 0..5 {
            if before_v[i].abs() > 1e-6 {
                let ratio = after_v[i] / before_v[i];
                worst = worst.max((ratio / (1.0 - beta) - 1.0).abs());
                checked_components += 1;
            }
        }
    }

    let ok = worst <= 0.05;
    println!(
        "criterion 5 {}: {} components over 100 displacements, worst contraction \
         deviation {:.3e} from (1 - beta) (tol 5%)",
        if ok { "PASS" } else { "FAIL" },
        checked_components,
        worst
    );
    assert!(checked_components > 100, "too few nonzero components exercised");
    assert!(ok, "criterion 5 FAIL: contraction deviates from (1 - beta) by {worst:.3e}");
}

/// Criterion 6: the shipped scan config yields exactly 144 viewpoints and
/// every on-axis viewpoint within the camera range reports found.
#[test]
fn criterion_6_scan_grid_reproduction() {
    let cfg = ScanConfig::load(&config_path("paper_scan.cfg")).expect("shipped config loads");
    let report = servokit_core::run_scan(&cfg.grid(), &cfg.oracle(), &cfg.hole_in_world())
        .expect("scan runs");
    let rows = report.to_csv().lines().count() - 1;

    let mut on_axis = 0usize;
    let mut on_axis_found = true;
    for r in &report.results {
        let v = &r.viewpoint;
        if v.l == 0.0 && v.theta == 0.0 && v.phi == 0.0 && (0.3..=1.2).contains(&v.d) {
            on_axis += 1;
            on_axis_found &= r.found;
        }
    }

    let ok = rows == 144 && on_axis == 4 && on_axis_found;
    println!(
        "criterion 6 {}: {} viewpoint rows (expected 144), {} on-axis viewpoints in \
         0.3..1.2 m all found = {}",
        if ok { "PASS" } else { "FAIL" },
        rows,
        on_axis,
        on_axis_found
    );
    assert_eq!(rows, 144, "criterion 6 FAIL: expected 144 rows, got {rows}");
    assert_eq!(on_axis, 4, "criterion 6 FAIL: expected 4 on-axis depths");
    assert!(on_axis_found, "criterion 6 FAIL: an on-axis viewpoint inside the range was missed");
}

/// Criterion 7: identical config and seed replay to byte-identical CSV,
/// including with 1 mm sensor noise.
#[test]
fn criterion_7_determinism() {
    let mut cfg = RunConfig::load(&config_path("paper_sec4.cfg")).expect("shipped config loads");
    cfg.sigma_t = 0.001;
    cfg.seed = 42;
    cfg.duration = 8.0; // noise path exercised; full length not needed

    let run = |cfg: &RunConfig| {
        run_closed_loop(
            cfg.initial_state(),
            &cfg.goal(),
            &cfg.limits(),
            cfg.sensor(),
            cfg.duration,
            cfg.servo_start,
            cfg.variant,
        )
        .expect("run completes")
        .to_csv()
    };
    let first = run(&cfg);
    let second = run(&cfg);
    let ok = first == second;
    println!(
        "criterion 7 {}: two noisy runs (sigma_t = 1 mm, seed 42) produced {} CSV bytes, \
         byte-identical = {}",
        if ok { "PASS" } else { "FAIL" },
        first.len(),
        ok
    );
    assert!(ok, "criterion 7 FAIL: identical seeds produced different CSV output");
}

/// Criterion 8: starting exactly at the desired pose with no noise, every
/// correction is exactly zero and the pose never moves.
#[test]
fn criterion_8_zero_error_fixpoint() {
    let cfg = RunConfig::load(&config_path("paper_sec4.cfg")).expect("shipped config loads");
    let goal = cfg.goal();
    let initial = WorldState::from_relative_pose(&goal.desired_pose);
    let log = run_closed_loop(
        initial,
        &goal,
        &cfg.limits(),
        cfg.sensor(),
        cfg.duration,
        cfg.servo_start,
        cfg.variant,
    )
    .expect("run completes");

    let first = &log.records[0];
    let mut ok = true;
    for r in &log.records {
        ok &= r.correction.is_zero();
        ok &= (r.x, r.y, r.z, r.a, r.b, r.c) == (first.x, first.y, first.z, first.a, first.b, first.c);
    }
    println!(
        "criterion 8 {}: {} periods at the desired pose, corrections all zero and pose \
         bit-constant = {}",
        if ok { "PASS" } else { "FAIL" },
        log.records.len(),
        ok
    );
    for r in &log.records {
        assert!(
            r.correction.is_zero(),
            "criterion 8 FAIL: nonzero correction at t = {:.3}",
            r.t
        );
        assert_eq!(
            (r.x, r.y, r.z, r.a, r.b, r.c),
            (first.x, first.y, first.z, first.a, first.b, first.c),
            "criterion 8 FAIL: pose moved at t = {:.3}",
            r.t
        );
    }

    // The same fixpoint must also hold for the goal used by the paper
    // config when the initial section is overridden to the goal pose.
    let e0 = feature_error(
        &Vec3::zeros(),
        &Vec3::new(0.0, 0.0, goal.axis_offset),
    );
    assert_eq!(e0.max_abs(), 0.0);
}
