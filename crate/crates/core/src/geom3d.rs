//! Rigid-body math: rotations, transforms, twists, wrenches, and the adjoint
//! machinery used by the contact kinematics and dynamics.
//!
//! Six-vectors are stacked angular-first: a twist is `(omega, v)` and a wrench
//! is `(torque, force)`. Hand and object orientations use x-y-z extrinsic
//! roll-pitch-yaw angles `(theta, beta, gamma)`, i.e.
//! `R = Rot(z, gamma) * Rot(y, beta) * Rot(x, theta)`.

use core::fmt;

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

#[allow(unused_imports)]
use crate::real::FloatExt as _;

/// Orthonormality / determinant tolerance for [`Rotation`] validation.
pub const ROTATION_TOL: f64 = 1e-12;

/// Pitch angles closer than this to `pi/2` are treated as gimbal-locked when
/// extracting roll-pitch-yaw angles.
pub const GIMBAL_MARGIN: f64 = 1e-6;

/// Error raised when extracting Euler angles at a pitch singularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GimbalLockError {
    /// The pitch angle at which extraction was attempted.
    pub pitch: f64,
}

impl fmt::Display for GimbalLockError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "roll-pitch-yaw extraction is degenerate at pitch {} (|pitch| near pi/2)",
            self.pitch
        )
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GimbalLockError {}

/// A proper rotation matrix in SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// Wraps a matrix, checking `R * R^T = I` and `det R = +1` within
    /// [`ROTATION_TOL`].
    pub fn try_new(m: Matrix3<f64>) -> Option<Self> {
        let defect = (m * m.transpose() - Matrix3::identity()).abs().max();
        if defect > ROTATION_TOL || (m.determinant() - 1.0).abs() > ROTATION_TOL {
            return None;
        }
        Some(Rotation(m))
    }

    /// Wraps a matrix that is known to be a rotation by construction.
    ///
    /// Debug builds still validate.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        debug_assert!(
            (m * m.transpose() - Matrix3::identity()).abs().max() < 1e-9,
            "matrix is not orthonormal"
        );
        Rotation(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    /// Rotation of `angle` about the x-axis.
    pub fn about_x(angle: f64) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        Rotation(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    /// Rotation of `angle` about the y-axis.
    pub fn about_y(angle: f64) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        Rotation(Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
    }

    /// Rotation of `angle` about the z-axis.
    pub fn about_z(angle: f64) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        Rotation(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// Largest deviation from orthonormality, for diagnostics.
    pub fn orthonormality_defect(&self) -> f64 {
        (self.0 * self.0.transpose() - Matrix3::identity()).abs().max()
    }
}

impl core::ops::Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl core::ops::Mul<&Rotation> for &Rotation {
    type Output = Rotation;
    fn mul(self, rhs: &Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

/// A rigid transform in SE(3): rotation plus translation, applied as
/// `p -> R p + r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub rotation: Rotation,
    pub translation: Vector3<f64>,
}

impl Transform {
    pub fn identity() -> Self {
        Transform {
            rotation: Rotation::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Rotation, translation: Vector3<f64>) -> Self {
        Transform { rotation, translation }
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Transform {
            translation: -(rt.apply(&self.translation)),
            rotation: rt,
        }
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.apply(p) + self.translation
    }

    /// Composition `self * rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Transform) -> Transform {
        Transform {
            rotation: self.rotation * rhs.rotation,
            translation: self.rotation.apply(&rhs.translation) + self.translation,
        }
    }
}

impl core::ops::Mul for Transform {
    type Output = Transform;
    fn mul(self, rhs: Transform) -> Transform {
        self.compose(&rhs)
    }
}

/// A body twist `(omega, v)`, angular part first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist {
    pub angular: Vector3<f64>,
    pub linear: Vector3<f64>,
}

impl Twist {
    pub fn zero() -> Self {
        Twist {
            angular: Vector3::zeros(),
            linear: Vector3::zeros(),
        }
    }

    pub fn new(angular: Vector3<f64>, linear: Vector3<f64>) -> Self {
        Twist { angular, linear }
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Twist {
            angular: v.fixed_rows::<3>(0).into_owned(),
            linear: v.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        stack6(&self.angular, &self.linear)
    }

    /// Screw pitch `omega . v / |omega|^2`; `None` for near-zero rotation.
    pub fn pitch(&self) -> Option<f64> {
        let w2 = self.angular.norm_squared();
        if w2 < 1e-18 {
            None
        } else {
            Some(self.angular.dot(&self.linear) / w2)
        }
    }
}

/// A wrench `(torque, force)`, torque first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wrench {
    pub torque: Vector3<f64>,
    pub force: Vector3<f64>,
}

impl Wrench {
    pub fn zero() -> Self {
        Wrench {
            torque: Vector3::zeros(),
            force: Vector3::zeros(),
        }
    }

    pub fn new(torque: Vector3<f64>, force: Vector3<f64>) -> Self {
        Wrench { torque, force }
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Wrench {
            torque: v.fixed_rows::<3>(0).into_owned(),
            force: v.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        stack6(&self.torque, &self.force)
    }
}

/// Roll-pitch-yaw Euler angles `(theta, beta, gamma)` about the fixed x, y,
/// and z axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerRpy {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl EulerRpy {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        EulerRpy { roll, pitch, yaw }
    }

    pub fn zero() -> Self {
        EulerRpy::new(0.0, 0.0, 0.0)
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.roll, self.pitch, self.yaw)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        EulerRpy::new(v.x, v.y, v.z)
    }
}

/// Stacks two 3-vectors into a 6-vector, first on top.
pub fn stack6(top: &Vector3<f64>, bottom: &Vector3<f64>) -> Vector6<f64> {
    Vector6::new(top.x, top.y, top.z, bottom.x, bottom.y, bottom.z)
}

/// The skew-symmetric matrix `[v]` with `[v] w = v x w`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// The 6x6 adjoint map of a transform: `[[R, 0], [[r] R, R]]`.
///
/// Transforms twists between frames: `V_a = adjoint(T_ab) V_b`.
pub fn adjoint(t: &Transform) -> Matrix6<f64> {
    let r = t.rotation.matrix();
    let pr = skew(&t.translation) * r;
    let mut out = Matrix6::zeros();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
    out.fixed_view_mut::<3, 3>(3, 0).copy_from(&pr);
    out.fixed_view_mut::<3, 3>(3, 3).copy_from(r);
    out
}

/// The 6x6 Lie-bracket matrix of a twist: `[[omega], 0], [[v], [omega]]`.
///
/// `lie_ad(V1) * V2` is the Lie bracket of the two twists.
pub fn lie_ad(v: &Twist) -> Matrix6<f64> {
    let w = skew(&v.angular);
    let l = skew(&v.linear);
    let mut out = Matrix6::zeros();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(&w);
    out.fixed_view_mut::<3, 3>(3, 0).copy_from(&l);
    out.fixed_view_mut::<3, 3>(3, 3).copy_from(&w);
    out
}

/// Builds the rotation `Rot(z, yaw) * Rot(y, pitch) * Rot(x, roll)`.
pub fn rotation_from_rpy(rpy: &EulerRpy) -> Rotation {
    Rotation::about_z(rpy.yaw) * Rotation::about_y(rpy.pitch) * Rotation::about_x(rpy.roll)
}

/// Extracts roll-pitch-yaw angles from a rotation.
///
/// Fails with [`GimbalLockError`] when the pitch is within [`GIMBAL_MARGIN`]
/// of `pi/2`, where the decomposition is not unique.
pub fn rpy_from_rotation(r: &Rotation) -> Result<EulerRpy, GimbalLockError> {
    let m = r.matrix();
    let s = -m[(2, 0)];
    let pitch = s.clamp(-1.0, 1.0).asin();
    if core::f64::consts::FRAC_PI_2 - pitch.abs() < GIMBAL_MARGIN {
        return Err(GimbalLockError { pitch });
    }
    let roll = m[(2, 1)].atan2(m[(2, 2)]);
    let yaw = m[(1, 0)].atan2(m[(0, 0)]);
    Ok(EulerRpy::new(roll, pitch, yaw))
}

/// Maps roll-pitch-yaw rates to the spatial angular velocity:
/// `omega_s = B(rpy) * rpy_dot`.
pub fn rpy_rate_map(rpy: &EulerRpy) -> Matrix3<f64> {
    let rz = Rotation::about_z(rpy.yaw);
    let rzy = rz * Rotation::about_y(rpy.pitch);
    let b1 = rzy.apply(&Vector3::x());
    let b2 = rz.apply(&Vector3::y());
    Matrix3::from_columns(&[b1, b2, Vector3::z()])
}

/// Inverts [`rpy_rate_map`]: recovers `rpy_dot` from the spatial angular
/// velocity. Fails near the pitch singularity where the map loses rank.
pub fn rpy_rates_from_angular_velocity(
    rpy: &EulerRpy,
    omega_space: &Vector3<f64>,
) -> Result<Vector3<f64>, GimbalLockError> {
    if core::f64::consts::FRAC_PI_2 - rpy.pitch.abs() < GIMBAL_MARGIN {
        return Err(GimbalLockError { pitch: rpy.pitch });
    }
    let b = rpy_rate_map(rpy);
    b.lu()
        .solve(omega_space)
        .ok_or(GimbalLockError { pitch: rpy.pitch })
}

/// Derivative of a vector expressed in a rotating frame, transported to a
/// second frame: returns `a + omega_frames x v`, where `omega_frames` is the
/// angular velocity of the vector's frame relative to the observer's frame
/// (all three arguments in one common frame).
pub fn cross_frame_derivative(
    v: &Vector3<f64>,
    a: &Vector3<f64>,
    omega_frames: &Vector3<f64>,
) -> Vector3<f64> {
    a + omega_frames.cross(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector6;

    fn rot_xyz(a: f64, b: f64, c: f64) -> Rotation {
        Rotation::about_x(a) * Rotation::about_y(b) * Rotation::about_z(c)
    }

    #[test]
    fn skew_zero_and_unit() {
        assert_eq!(skew(&Vector3::zeros()), Matrix3::zeros());
        let m = skew(&Vector3::x());
        let expected = Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
        assert_eq!(m, expected);
    }

    #[test]
    fn skew_matches_cross_product() {
        let mut x: u64 = 0x9e3779b97f4a7c15;
        let mut next = || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        for _ in 0..100 {
            let v = Vector3::new(next(), next(), next());
            let w = Vector3::new(next(), next(), next());
            assert!((skew(&v) * w - v.cross(&w)).abs().max() < 1e-14);
            assert!((skew(&v) + skew(&v).transpose()).abs().max() == 0.0);
        }
    }

    #[test]
    fn adjoint_identity_and_translation() {
        assert_eq!(adjoint(&Transform::identity()), Matrix6::identity());
        let t = Transform::new(Rotation::identity(), Vector3::new(0.0, 0.0, 1.0));
        let ad = adjoint(&t);
        let ll = ad.fixed_view::<3, 3>(3, 0).into_owned();
        assert_eq!(ll, skew(&Vector3::new(0.0, 0.0, 1.0)));
    }

    #[test]
    fn adjoint_composition_property() {
        for i in 0..50 {
            let k = i as f64;
            let t1 = Transform::new(
                rot_xyz(0.3 + 0.01 * k, -0.2 + 0.02 * k, 0.7 - 0.03 * k),
                Vector3::new(0.1 * k, -0.2, 0.05 * k),
            );
            let t2 = Transform::new(
                rot_xyz(-0.4 + 0.015 * k, 0.5, 0.1 * k),
                Vector3::new(-0.3, 0.02 * k, 0.4),
            );
            let lhs = adjoint(&t1.compose(&t2));
            let rhs = adjoint(&t1) * adjoint(&t2);
            assert!((lhs - rhs).abs().max() < 1e-12);
        }
    }

    #[test]
    fn adjoint_of_inverse_is_inverse_of_adjoint() {
        let t = Transform::new(rot_xyz(0.3, 1.1, -0.4), Vector3::new(0.2, -0.7, 0.9));
        let ad_inv = adjoint(&t.inverse());
        let inv_ad = adjoint(&t).try_inverse().unwrap();
        assert!((ad_inv - inv_ad).abs().max() < 1e-12);
    }

    #[test]
    fn twist_transformation_preserves_pitch() {
        let t = Transform::new(rot_xyz(0.2, -0.8, 1.3), Vector3::new(1.0, 2.0, -0.5));
        let v = Twist::new(Vector3::new(0.4, -0.2, 0.9), Vector3::new(-1.0, 0.3, 0.2));
        let mapped = Twist::from_vector(&(adjoint(&t) * v.to_vector()));
        let p0 = v.pitch().unwrap();
        let p1 = mapped.pitch().unwrap();
        assert!((p0 - p1).abs() < 1e-12);
    }

    #[test]
    fn lie_ad_blocks_and_antisymmetry() {
        assert_eq!(lie_ad(&Twist::zero()), Matrix6::zeros());
        let v = Twist::new(Vector3::new(1.0, -2.0, 0.5), Vector3::zeros());
        let ad = lie_ad(&v);
        assert_eq!(ad.fixed_view::<3, 3>(3, 0).into_owned(), Matrix3::zeros());

        let v1 = Twist::new(Vector3::new(0.3, 0.1, -0.7), Vector3::new(0.2, 0.9, -0.1));
        let v2 = Twist::new(Vector3::new(-0.5, 0.4, 0.2), Vector3::new(0.8, -0.3, 0.6));
        let lhs = lie_ad(&v1) * v2.to_vector();
        let rhs: Vector6<f64> = -(lie_ad(&v2) * v1.to_vector());
        assert!((lhs - rhs).abs().max() < 1e-13);
    }

    #[test]
    fn rpy_zero_is_identity_and_quarter_roll_maps_y_to_z() {
        assert!(
            (rotation_from_rpy(&EulerRpy::zero()).matrix() - Matrix3::identity())
                .abs()
                .max()
                < 1e-15
        );
        let r = rotation_from_rpy(&EulerRpy::new(core::f64::consts::FRAC_PI_2, 0.0, 0.0));
        assert!((r.apply(&Vector3::y()) - Vector3::z()).abs().max() < 1e-15);
    }

    #[test]
    fn rpy_round_trip() {
        let mut x: u64 = 0x2545f4914f6cdd1d;
        let mut next = || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        for _ in 0..100 {
            let rpy = EulerRpy::new(
                3.0 * next(),
                1.4 * next(),
                3.0 * next(),
            );
            let r = rotation_from_rpy(&rpy);
            assert!(r.orthonormality_defect() < 1e-12);
            let back = rpy_from_rotation(&r).unwrap();
            assert!((back.roll - rpy.roll).abs() < 1e-10);
            assert!((back.pitch - rpy.pitch).abs() < 1e-10);
            assert!((back.yaw - rpy.yaw).abs() < 1e-10);
        }
    }

    #[test]
    fn rpy_extraction_reports_gimbal_lock() {
        let r = rotation_from_rpy(&EulerRpy::new(0.3, core::f64::consts::FRAC_PI_2, -0.2));
        assert!(rpy_from_rotation(&r).is_err());
    }

    #[test]
    fn rpy_rate_map_matches_finite_difference() {
        let rpy = EulerRpy::new(0.4, -0.6, 1.1);
        let rates = Vector3::new(0.3, -0.5, 0.8);
        let h = 1e-7;
        let rp = EulerRpy::new(
            rpy.roll + h * rates.x,
            rpy.pitch + h * rates.y,
            rpy.yaw + h * rates.z,
        );
        let rm = EulerRpy::new(
            rpy.roll - h * rates.x,
            rpy.pitch - h * rates.y,
            rpy.yaw - h * rates.z,
        );
        let dr = (rotation_from_rpy(&rp).matrix() - rotation_from_rpy(&rm).matrix()) / (2.0 * h);
        let omega_hat = dr * rotation_from_rpy(&rpy).matrix().transpose();
        let omega = Vector3::new(omega_hat[(2, 1)], omega_hat[(0, 2)], omega_hat[(1, 0)]);
        let predicted = rpy_rate_map(&rpy) * rates;
        assert!((omega - predicted).abs().max() < 1e-6);
        let back = rpy_rates_from_angular_velocity(&rpy, &predicted).unwrap();
        assert!((back - rates).abs().max() < 1e-12);
    }

    #[test]
    fn cross_frame_derivative_cases() {
        let v = Vector3::new(1.0, 0.0, 0.0);
        let a = Vector3::new(0.2, -0.1, 0.4);
        assert_eq!(cross_frame_derivative(&v, &a, &Vector3::zeros()), a);
        let d = cross_frame_derivative(&v, &Vector3::zeros(), &Vector3::z());
        assert!((d - Vector3::new(0.0, 1.0, 0.0)).abs().max() < 1e-15);
    }

    #[test]
    fn cross_frame_derivative_matches_finite_difference() {
        // A vector fixed in a frame rotating at omega, observed from the
        // static frame: its static-frame derivative is omega x v.
        let omega = Vector3::new(0.3, -0.7, 0.5);
        let v0 = Vector3::new(0.8, 0.1, -0.4);
        let h = 1e-6;
        let rot = |t: f64| {
            let angle = omega.norm() * t;
            let axis = nalgebra::Unit::new_normalize(omega);
            nalgebra::Rotation3::from_axis_angle(&axis, angle)
        };
        let fd = (rot(h) * v0 - rot(-h) * v0) / (2.0 * h);
        let analytic = cross_frame_derivative(&v0, &Vector3::zeros(), &omega);
        assert!((fd - analytic).abs().max() < 1e-5);
    }
}
