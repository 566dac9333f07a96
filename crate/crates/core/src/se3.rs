//! Rigid-body poses, rotations and frame composition.
//!
//! All orientations use the intrinsic Z-Y-X Euler convention
//! `R = Rz(a) * Ry(b) * Rx(c)` (KUKA-style a/b/c angles). Angles are
//! radians everywhere inside the library; degrees appear only at the
//! config and CSV boundaries.

use nalgebra::{Rotation3, Vector3};

/// 3D point or direction, meters (unitless when a direction).
pub type Vec3 = Vector3<f64>;

/// Unit-norm direction vector.
pub type UnitVec3 = nalgebra::Unit<Vector3<f64>>;

/// Rotation matrix (orthonormal, det +1).
pub type RotationMatrix = Rotation3<f64>;

/// Below this value of cos(b) the Z-Y-X extraction is at gimbal lock and
/// the `a` angle is folded into `c`.
pub const GIMBAL_LOCK_COS_B: f64 = 1e-8;

/// Z-Y-X Euler angles in radians: `R = Rz(a) * Ry(b) * Rx(c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerZyx {
    /// Rotation about z (the axis the servo never commands).
    pub a: f64,
    /// Rotation about y.
    pub b: f64,
    /// Rotation about x.
    pub c: f64,
}

impl EulerZyx {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub const ZERO: EulerZyx = EulerZyx { a: 0.0, b: 0.0, c: 0.0 };
}

/// Euler extraction result; `gimbal_lock` is set when cos(b) fell below
/// [`GIMBAL_LOCK_COS_B`] and the convention a = 0 was applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerDecomposition {
    pub angles: EulerZyx,
    pub gimbal_lock: bool,
}

/// Builds `R = Rz(a) * Ry(b) * Rx(c)`.
pub fn euler_to_rotation(a: f64, b: f64, c: f64) -> RotationMatrix {
    Rotation3::from_axis_angle(&Vector3::z_axis(), a)
        * Rotation3::from_axis_angle(&Vector3::y_axis(), b)
        * Rotation3::from_axis_angle(&Vector3::x_axis(), c)
}

/// Extracts Z-Y-X Euler angles from a rotation matrix.
///
/// At gimbal lock (|cos b| < [`GIMBAL_LOCK_COS_B`]) the decomposition is
/// not unique; `a` is set to 0 and the residual rotation folds into `c`,
/// with the `gimbal_lock` flag raised.
pub fn rotation_to_euler(r: &RotationMatrix) -> EulerDecomposition {
    let m = r.matrix();
    let sin_b = -m[(2, 0)];
    let cos_b = (m[(0, 0)] * m[(0, 0)] + m[(1, 0)] * m[(1, 0)]).sqrt();
    let b = sin_b.atan2(cos_b);
    if cos_b < GIMBAL_LOCK_COS_B {
        // b = +-pi/2: with a fixed to 0, c comes from the free row/column.
        let c = if sin_b > 0.0 {
            m[(0, 1)].atan2(m[(0, 2)])
        } else {
            (-m[(0, 1)]).atan2(-m[(0, 2)])
        };
        return EulerDecomposition {
            angles: EulerZyx::new(0.0, b, c),
            gimbal_lock: true,
        };
    }
    let a = m[(1, 0)].atan2(m[(0, 0)]);
    let c = m[(2, 1)].atan2(m[(2, 2)]);
    EulerDecomposition {
        angles: EulerZyx::new(a, b, c),
        gimbal_lock: false,
    }
}

/// Pose of one frame expressed in another: rotation plus translation.
///
/// Acts on points as `p -> R * p + t`. Composition follows the usual
/// chain rule: if `T_ab` maps b-coordinates to a-coordinates then
/// `T_ab.compose(&T_bc) == T_ac`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidPose {
    pub translation: Vec3,
    pub rotation: RotationMatrix,
}

impl RigidPose {
    pub fn new(translation: Vec3, rotation: RotationMatrix) -> Self {
        Self { translation, rotation }
    }

    pub fn identity() -> Self {
        Self {
            translation: Vec3::zeros(),
            rotation: Rotation3::identity(),
        }
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Self {
            translation: Vec3::new(x, y, z),
            rotation: Rotation3::identity(),
        }
    }

    /// Pose from translation and Z-Y-X Euler angles (radians).
    pub fn from_euler(translation: Vec3, a: f64, b: f64, c: f64) -> Self {
        Self {
            translation,
            rotation: euler_to_rotation(a, b, c),
        }
    }

    pub fn compose(&self, other: &RigidPose) -> RigidPose {
        RigidPose {
            translation: self.translation + self.rotation * other.translation,
            rotation: self.rotation * other.rotation,
        }
    }

    pub fn invert(&self) -> RigidPose {
        let rot_inv = self.rotation.inverse();
        RigidPose {
            translation: -(rot_inv * self.translation),
            rotation: rot_inv,
        }
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// Rotates a direction (no translation applied).
    pub fn transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// Z axis of this frame expressed in the parent frame.
    pub fn z_axis(&self) -> Vec3 {
        self.rotation * Vector3::z()
    }

    /// Z-Y-X Euler angles of the rotation part.
    pub fn euler(&self) -> EulerDecomposition {
        rotation_to_euler(&self.rotation)
    }
}

/// Largest deviation of `R^T R` from identity plus the det(+1) defect.
/// Zero (up to rounding) for a proper rotation.
pub fn orthonormality_defect(r: &RotationMatrix) -> f64 {
    let m = r.matrix();
    let gram = m.transpose() * m;
    let mut defect: f64 = (m.determinant() - 1.0).abs();
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((gram[(i, j)] - target).abs());
        }
    }
    defect
}
