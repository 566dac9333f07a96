//! Feature Jacobian, correction solve and velocity limiting.
//!
//! One servo step is `errors -> J^-1 -> raw increments -> velocity
//! limiter`. The Jacobian maps the five controlled pose parameters
//! (x, y, z, b, c) to the five point-to-plane distances; z-rotation (the
//! `a` angle) is deliberately absent because it carries no alignment
//! information for a cylindrical hole.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::features::{feature_error, hole_points_in_goal_frame, FeatureError, GoalSpec, HoleObservation};
use crate::se3::{RigidPose, Vec3};
use crate::ServoError;

pub type Matrix5 = SMatrix<f64, 5, 5>;
pub type Vector5 = SVector<f64, 5>;

/// Which c-column generator the Jacobian uses.
///
/// The published matrix uses the z-axis rotation generator for the `c`
/// column, which contradicts the accompanying text (z-rotation is
/// excluded from the parameter vector) and is singular exactly at the
/// aligned configuration. `Corrected` uses the x-axis generator instead
/// and is the default; `AsPrinted` is kept to document the degeneracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JacobianVariant {
    #[default]
    Corrected,
    AsPrinted,
}

impl JacobianVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            JacobianVariant::Corrected => "corrected",
            JacobianVariant::AsPrinted => "as_printed",
        }
    }
}

impl std::str::FromStr for JacobianVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "corrected" => Ok(JacobianVariant::Corrected),
            "as_printed" => Ok(JacobianVariant::AsPrinted),
            other => Err(format!("unknown jacobian variant `{other}` (expected `corrected` or `as_printed`)")),
        }
    }
}

/// Derivative of a point under the variant's c-column generator.
fn c_generator(p: &Vec3, variant: JacobianVariant) -> Vec3 {
    match variant {
        // x-axis rotation generator: d/dt Rx(t) p at t = 0.
        JacobianVariant::Corrected => Vec3::new(0.0, -p.z, p.y),
        // z-axis rotation generator, as displayed in print.
        JacobianVariant::AsPrinted => Vec3::new(-p.y, p.x, 0.0),
    }
}

/// Derivative of a point under the b-column (y-axis rotation) generator.
fn b_generator(p: &Vec3) -> Vec3 {
    Vec3::new(p.z, 0.0, -p.x)
}

/// 5x5 feature Jacobian, rows ordered (e11, e12, e21, e22, e13), columns
/// (x, y, z, b, c).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian5 {
    pub matrix: Matrix5,
    pub variant: JacobianVariant,
}

/// Builds the feature Jacobian at the two feature points.
pub fn build_jacobian(p1: &Vec3, p2: &Vec3, variant: JacobianVariant) -> Jacobian5 {
    let b1 = b_generator(p1);
    let b2 = b_generator(p2);
    let c1 = c_generator(p1, variant);
    let c2 = c_generator(p2, variant);
    #[rustfmt::skip]
    let matrix = Matrix5::new(
        1.0, 0.0, 0.0, b1.x, c1.x,
        0.0, 1.0, 0.0, b1.y, c1.y,
        1.0, 0.0, 0.0, b2.x, c2.x,
        0.0, 1.0, 0.0, b2.y, c2.y,
        0.0, 0.0, 1.0, b1.z, c1.z,
    );
    Jacobian5 { matrix, variant }
}

impl Jacobian5 {
    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    /// 1-norm condition number; infinity when singular.
    pub fn condition_1norm(&self) -> f64 {
        let norm = one_norm(&self.matrix);
        match self.matrix.try_inverse() {
            Some(inv) => norm * one_norm(&inv),
            None => f64::INFINITY,
        }
    }
}

fn one_norm(m: &Matrix5) -> f64 {
    (0..5)
        .map(|j| (0..5).map(|i| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Velocity limits and limiter gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    /// Maximum translational speed of the flange, m/s.
    pub v_max: f64,
    /// Maximum rotational speed, rad/s.
    pub w_max: f64,
    /// Control period, s.
    pub tau: f64,
    /// Unsaturated translational gain (unitless).
    pub beta_p: f64,
    /// Unsaturated rotational gain (unitless).
    pub beta_r: f64,
    /// Raw-increment norm below which a block is zeroed outright
    /// (m for the translational block, rad for the rotational one).
    pub deadband: f64,
    /// Condition-number threshold for the linear solve.
    pub cond_max: f64,
}

impl Limits {
    /// Largest translational increment per period, m.
    pub fn max_translation_step(&self) -> f64 {
        self.v_max * self.tau
    }

    /// Largest rotational increment per period, rad.
    pub fn max_rotation_step(&self) -> f64 {
        self.w_max * self.tau
    }
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            v_max: 0.05,
            w_max: 40f64.to_radians(),
            tau: 0.004,
            beta_p: 0.001,
            beta_r: 0.001,
            deadband: 1e-9,
            cond_max: 1e8,
        }
    }
}

/// Velocity-limited robot increment: translations in meters, rotations in
/// radians, plus flags telling whether either cap was binding.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Correction {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    pub db: f64,
    pub dc: f64,
    pub saturated_t: bool,
    pub saturated_r: bool,
}

impl Correction {
    pub const ZERO: Correction = Correction {
        dx: 0.0, dy: 0.0, dz: 0.0, db: 0.0, dc: 0.0,
        saturated_t: false, saturated_r: false,
    };

    pub fn is_zero(&self) -> bool {
        self.dx == 0.0 && self.dy == 0.0 && self.dz == 0.0 && self.db == 0.0 && self.dc == 0.0
    }

    pub fn translation(&self) -> Vec3 {
        Vec3::new(self.dx, self.dy, self.dz)
    }

    pub fn translation_norm(&self) -> f64 {
        self.translation().norm()
    }

    pub fn rotation_norm(&self) -> f64 {
        (self.db * self.db + self.dc * self.dc).sqrt()
    }
}

/// Solves `J * dx = e` for the raw (unlimited) increment vector.
///
/// Fails with [`ServoError::IllConditioned`] when the 1-norm condition
/// estimate exceeds `cond_max`, which flags degenerate geometry such as
/// the printed Jacobian variant at alignment or a vanishing axis offset.
pub fn newton_step(error: &FeatureError, jacobian: &Jacobian5, cond_max: f64) -> Result<Vector5, ServoError> {
    let cond = jacobian.condition_1norm();
    if !cond.is_finite() || cond > cond_max {
        return Err(ServoError::IllConditioned { cond, cond_max });
    }
    let lu = jacobian.matrix.lu();
    lu.solve(&error.to_vector())
        .ok_or(ServoError::IllConditioned { cond: f64::INFINITY, cond_max })
}

/// Scales the raw increment so per-period velocity limits hold.
///
/// Each block keeps its direction; the translational magnitude becomes
/// `min(beta_p * |raw_t|, v_max * tau)` and the rotational one
/// `min(beta_r * |raw_r|, w_max * tau)`. Blocks with raw norm below the
/// deadband are zeroed exactly.
pub fn limit_corrections(raw: &Vector5, limits: &Limits) -> Correction {
    let mut out = Correction::ZERO;

    let t_norm = (raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2]).sqrt();
    if t_norm >= limits.deadband {
        let cap = limits.max_translation_step();
        let candidate = limits.beta_p * t_norm;
        out.saturated_t = candidate >= cap;
        let scale = candidate.min(cap) / t_norm;
        out.dx = scale * raw[0];
        out.dy = scale * raw[1];
        out.dz = scale * raw[2];
    }

    let r_norm = (raw[3] * raw[3] + raw[4] * raw[4]).sqrt();
    if r_norm >= limits.deadband {
        let cap = limits.max_rotation_step();
        let candidate = limits.beta_r * r_norm;
        out.saturated_r = candidate >= cap;
        let scale = candidate.min(cap) / r_norm;
        out.db = scale * raw[3];
        out.dc = scale * raw[4];
    }

    out
}

/// Per-step solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub condition: f64,
    pub saturated_t: bool,
    pub saturated_r: bool,
}

/// Full control step: observation to velocity-limited correction.
pub fn servo_step(
    obs: &HoleObservation,
    goal: &GoalSpec,
    hand_eye: &RigidPose,
    limits: &Limits,
    variant: JacobianVariant,
) -> Result<(Correction, FeatureError, StepDiagnostics), ServoError> {
    let (p1, p2) = hole_points_in_goal_frame(obs, hand_eye, goal)?;
    let error = feature_error(&p1, &p2);
    let jacobian = build_jacobian(&p1, &p2, variant);
    let raw = newton_step(&error, &jacobian, limits.cond_max)?;
    let correction = limit_corrections(&raw, limits);
    let diagnostics = StepDiagnostics {
        condition: jacobian.condition_1norm(),
        saturated_t: correction.saturated_t,
        saturated_r: correction.saturated_r,
    };
    Ok((correction, error, diagnostics))
}

/// Outcome of the finite-difference Jacobian validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdCheckReport {
    pub variant: JacobianVariant,
    pub trials: usize,
    /// Largest `|fd - analytic| / max(1, |analytic|)` over all entries.
    pub max_deviation: f64,
    /// Configurations whose condition number exceeded the default cap.
    pub near_singular: usize,
}

impl FdCheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_deviation <= tolerance
    }
}

/// Rotation matrix for the variant's c-column generator at angle `t`.
fn c_generator_rotation(t: f64, variant: JacobianVariant) -> Matrix3<f64> {
    match variant {
        JacobianVariant::Corrected => *nalgebra::Rotation3::from_axis_angle(&Vector3::x_axis(), t).matrix(),
        JacobianVariant::AsPrinted => *nalgebra::Rotation3::from_axis_angle(&Vector3::z_axis(), t).matrix(),
    }
}

/// Central finite difference of the feature error under the five
/// generator motions, evaluated at (`p1`, `p2`).
pub fn finite_difference_jacobian(p1: &Vec3, p2: &Vec3, variant: JacobianVariant, step: f64) -> Matrix5 {
    let eval = |q1: &Vec3, q2: &Vec3| feature_error(q1, q2).to_vector();
    let mut fd = Matrix5::zeros();
    // Translation columns: both points shift together.
    for (col, axis) in [Vector3::x(), Vector3::y(), Vector3::z()].iter().enumerate() {
        let plus = eval(&(p1 + step * axis), &(p2 + step * axis));
        let minus = eval(&(p1 - step * axis), &(p2 - step * axis));
        fd.set_column(col, &((plus - minus) / (2.0 * step)));
    }
    // Rotation columns: both points rotate about the goal-frame origin.
    let ry = |t: f64| *nalgebra::Rotation3::from_axis_angle(&Vector3::y_axis(), t).matrix();
    let plus = eval(&(ry(step) * p1), &(ry(step) * p2));
    let minus = eval(&(ry(-step) * p1), &(ry(-step) * p2));
    fd.set_column(3, &((plus - minus) / (2.0 * step)));
    let rc_p = c_generator_rotation(step, variant);
    let rc_m = c_generator_rotation(-step, variant);
    let plus = eval(&(rc_p * p1), &(rc_p * p2));
    let minus = eval(&(rc_m * p1), &(rc_m * p2));
    fd.set_column(4, &((plus - minus) / (2.0 * step)));
    fd
}

const FD_STEP: f64 = 1e-6;

/// Validates the analytic Jacobian against central finite differences at
/// `trials` random point pairs with coordinates within 2 m.
///
/// The deviation per entry is `|fd - analytic| / max(1, |analytic|)`, so
/// near-zero entries are held to the same absolute scale as unit ones.
pub fn check_jacobian_finite_difference(variant: JacobianVariant, trials: usize, seed: u64) -> FdCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_deviation: f64 = 0.0;
    let mut near_singular = 0;
    let default_limits = Limits::default();
    for _ in 0..trials {
        let mut coord = || rng.random_range(-2.0..2.0);
        let p1 = Vec3::new(coord(), coord(), coord());
        let mut p2 = Vec3::new(coord(), coord(), coord());
        if (p2 - p1).norm() < 1e-6 {
            p2.z += 0.1;
        }
        let analytic = build_jacobian(&p1, &p2, variant);
        if analytic.condition_1norm() > default_limits.cond_max {
            near_singular += 1;
        }
        let fd = finite_difference_jacobian(&p1, &p2, variant, FD_STEP);
        for i in 0..5 {
            for j in 0..5 {
                let a = analytic.matrix[(i, j)];
                let deviation = (fd[(i, j)] - a).abs() / a.abs().max(1.0);
                max_deviation = max_deviation.max(deviation);
            }
        }
    }
    FdCheckReport { variant, trials, max_deviation, near_singular }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn aligned_points(lambda: f64) -> (Vec3, Vec3) {
        (Vec3::zeros(), Vec3::new(0.0, 0.0, lambda))
    }

    #[test]
    fn corrected_jacobian_at_alignment() {
        let (p1, p2) = aligned_points(1.0);
        let j = build_jacobian(&p1, &p2, JacobianVariant::Corrected);
        #[rustfmt::skip]
        let expected = Matrix5::new(
            1.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0, 0.0,
            1.0, 0.0, 0.0, 1.0, 0.0,
            0.0, 1.0, 0.0, 0.0, -1.0,
            0.0, 0.0, 1.0, 0.0, 0.0,
        );
        assert_eq!(j.matrix, expected);
        assert_relative_eq!(j.determinant().abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn printed_jacobian_degenerates_at_alignment() {
        let (p1, p2) = aligned_points(1.0);
        let j = build_jacobian(&p1, &p2, JacobianVariant::AsPrinted);
        #[rustfmt::skip]
        let expected = Matrix5::new(
            1.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0, 0.0,
            1.0, 0.0, 0.0, 1.0, 0.0,
            0.0, 1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0, 0.0,
        );
        assert_eq!(j.matrix, expected);
        assert!(j.determinant().abs() < 1e-15);
        assert!(!j.condition_1norm().is_finite());
    }

    #[test]
    fn corrected_determinant_scales_with_axis_offset_squared() {
        // |det| = lambda^2 at the aligned configuration.
        for lambda in [0.05, 0.1, 0.5, 1.0, 2.0] {
            let (p1, p2) = aligned_points(lambda);
            let j = build_jacobian(&p1, &p2, JacobianVariant::Corrected);
            assert_relative_eq!(j.determinant(), -lambda * lambda, epsilon = 1e-12 * lambda.max(1.0));
        }
    }

    #[test]
    fn structural_zeros_hold_everywhere() {
        let p1 = Vec3::new(0.3, -0.7, 1.2);
        let p2 = Vec3::new(-0.4, 0.2, 0.9);
        for variant in [JacobianVariant::Corrected, JacobianVariant::AsPrinted] {
            let j = build_jacobian(&p1, &p2, variant).matrix;
            for row in 0..4 {
                assert_eq!(j[(row, 2)], 0.0);
            }
            assert_eq!((j[(4, 0)], j[(4, 1)], j[(4, 2)]), (0.0, 0.0, 1.0));
        }
    }

    #[test]
    fn newton_zero_error_gives_zero_step() {
        let (p1, p2) = aligned_points(1.0);
        let j = build_jacobian(&p1, &p2, JacobianVariant::Corrected);
        let dx = newton_step(&FeatureError::ZERO, &j, 1e8).unwrap();
        assert_eq!(dx, Vector5::zeros());
    }

    #[test]
    fn newton_couples_x_and_b_at_alignment() {
        // Solving the aligned corrected system for e = (0.1, 0, 0, 0, 0)
        // gives dx = 0.1 and db = -0.1 (row 3 must stay zero).
        let (p1, p2) = aligned_points(1.0);
        let j = build_jacobian(&p1, &p2, JacobianVariant::Corrected);
        let e = FeatureError { e11: 0.1, ..FeatureError::ZERO };
        let dx = newton_step(&e, &j, 1e8).unwrap();
        assert_relative_eq!(dx, Vector5::new(0.1, 0.0, 0.0, -0.1, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn newton_rejects_printed_variant_at_alignment() {
        let (p1, p2) = aligned_points(1.0);
        let j = build_jacobian(&p1, &p2, JacobianVariant::AsPrinted);
        let e = FeatureError { e11: 0.1, ..FeatureError::ZERO };
        let err = newton_step(&e, &j, 1e8).unwrap_err();
        assert!(matches!(err, ServoError::IllConditioned { .. }));
    }

    #[test]
    fn limiter_caps_long_steps_and_keeps_direction() {
        // Raw 0.3 m along z with the experiment limits: the candidate
        // 0.3 mm exceeds the 0.2 mm cap.
        let limits = Limits::default();
        let raw = Vector5::new(0.0, 0.0, 0.3, 0.0, 0.0);
        let out = limit_corrections(&raw, &limits);
        assert!(out.saturated_t);
        assert!(!out.saturated_r);
        assert_relative_eq!(out.dz, 2e-4, epsilon = 1e-15);
        assert_eq!((out.dx, out.dy), (0.0, 0.0));
    }

    #[test]
    fn limiter_scales_short_steps_by_gain() {
        let limits = Limits::default();
        let raw = Vector5::new(0.05, 0.0, 0.0, 0.0, 0.0);
        let out = limit_corrections(&raw, &limits);
        assert!(!out.saturated_t);
        assert_relative_eq!(out.dx, 5e-5, epsilon = 1e-18);
    }

    #[test]
    fn limiter_zero_input_zero_output() {
        let out = limit_corrections(&Vector5::zeros(), &Limits::default());
        assert_eq!(out, Correction::ZERO);
    }

    #[test]
    fn fd_check_corrected_is_tight() {
        let report = check_jacobian_finite_difference(JacobianVariant::Corrected, 200, 42);
        assert!(report.max_deviation <= 1e-6, "max deviation {}", report.max_deviation);
    }

    #[test]
    fn fd_check_printed_matches_its_own_generators() {
        let report = check_jacobian_finite_difference(JacobianVariant::AsPrinted, 200, 42);
        assert!(report.max_deviation <= 1e-6, "max deviation {}", report.max_deviation);
    }

    proptest! {
        /// The limiter never exceeds either per-period cap and preserves
        /// block directions.
        #[test]
        fn limiter_bounds_and_direction(
            rx in -10.0..10.0f64, ry in -10.0..10.0f64, rz in -10.0..10.0f64,
            rb in -10.0..10.0f64, rc in -10.0..10.0f64,
        ) {
            let limits = Limits::default();
            let raw = Vector5::new(rx, ry, rz, rb, rc);
            let out = limit_corrections(&raw, &limits);
            prop_assert!(out.translation_norm() <= limits.max_translation_step() + 1e-12);
            prop_assert!(out.rotation_norm() <= limits.max_rotation_step() + 1e-12);
            let t_raw = Vec3::new(rx, ry, rz);
            if out.translation_norm() > 0.0 {
                let cos = out.translation().dot(&t_raw) / (out.translation_norm() * t_raw.norm());
                prop_assert!((cos - 1.0).abs() < 1e-12);
            }
            let r_raw = (rb * rb + rc * rc).sqrt();
            if out.rotation_norm() > 0.0 {
                let cos = (out.db * rb + out.dc * rc) / (out.rotation_norm() * r_raw);
                prop_assert!((cos - 1.0).abs() < 1e-12);
            }
        }

        /// Analytic vs finite-difference agreement over random geometry.
        #[test]
        fn jacobian_matches_finite_differences(
            x1 in -2.0..2.0f64, y1 in -2.0..2.0f64, z1 in -2.0..2.0f64,
            x2 in -2.0..2.0f64, y2 in -2.0..2.0f64, z2 in -2.0..2.0f64,
        ) {
            let p1 = Vec3::new(x1, y1, z1);
            let mut p2 = Vec3::new(x2, y2, z2);
            if (p2 - p1).norm() < 1e-6 { p2.z += 0.1; }
            for variant in [JacobianVariant::Corrected, JacobianVariant::AsPrinted] {
                let analytic = build_jacobian(&p1, &p2, variant).matrix;
                let fd = finite_difference_jacobian(&p1, &p2, variant, 1e-6);
                for i in 0..5 {
                    for j in 0..5 {
                        let dev = (fd[(i, j)] - analytic[(i, j)]).abs()
                            / analytic[(i, j)].abs().max(1.0);
                        prop_assert!(dev <= 1e-6);
                    }
                }
            }
        }
    }
}
