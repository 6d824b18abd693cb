//! First- and second-order rolling contact kinematics between two
//! orthogonally parameterized surfaces.
//!
//! The contact configuration is `q = (u_o, v_o, u_h, v_h, psi)`: chart
//! coordinates of the contact on the object and hand plus the spin angle
//! between the two contact frames. With the relative angular velocity at the
//! contact `omega_rel = (w_x, w_y, w_z)` (object relative to hand, expressed
//! in the hand contact frame), rolling transport is
//!
//! ```text
//!     q_dot  = K1(q) omega_rel
//!     q_ddot = K2(q, omega_rel) + K3(q) dV_rel
//! ```
//!
//! where `dV_rel = (alpha, a)` stacks the relative rotational and linear
//! accelerations at the contact. Rolling constrains `a` to
//! [`rolling_accel_constraint`]; pure rolling additionally pins `alpha_z` to
//! [`pure_rolling_alpha_z`].
//!
//! Spin-angle convention: rotating the object contact frame's x-axis by
//! `psi` about the object's outward contact normal aligns it with the hand
//! contact frame's x-axis, which makes a pure spin `w_z` produce
//! `psi_dot = +w_z`. The in-plane map between the frames is the reflection
//! `R_psi = [[cos psi, sin psi], [sin psi, -cos psi]]`.

use core::fmt;

use nalgebra::{
    Matrix2, Matrix3, Matrix4, Matrix6, RowVector2, SMatrix, Vector2, Vector3, Vector4, Vector5,
    Vector6,
};

use crate::geom3d::{adjoint, stack6, Rotation, Transform, Twist};
#[allow(unused_imports)]
use crate::real::FloatExt as _;
use crate::surface::{LocalGeometry, SurfaceChart, SurfaceError};

/// Rejection threshold on the rolling-consistency residual when recovering
/// `omega_rel` from `q_dot`.
pub const CONSISTENCY_TOL: f64 = 1e-6;

/// `(H_o~ + H_h)^-1` norms beyond this indicate degenerate relative
/// curvature (e.g. plane on plane, or an object exactly filling a bowl).
pub const RELATIVE_CURVATURE_NORM_MAX: f64 = 1e9;

/// Tolerance on `w_z` for a state to qualify as pure rolling.
pub const PURE_ROLLING_SPIN_TOL: f64 = 1e-8;

/// Errors from contact kinematics evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum ContactError {
    Surface(SurfaceError),
    /// The relative curvature form is (near-)singular at the contact.
    SingularGeometry { inverse_norm: f64 },
    /// `q_dot` violates the rolling-consistency constraint.
    InconsistentRates { residual: f64 },
    /// A pure-rolling operation was invoked on a spinning state.
    NotPureRolling { omega_z: f64 },
}

impl fmt::Display for ContactError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContactError::Surface(e) => write!(f, "{e}"),
            ContactError::SingularGeometry { inverse_norm } => write!(
                f,
                "degenerate relative curvature at contact (||(H_o~ + H_h)^-1|| = {inverse_norm:e})"
            ),
            ContactError::InconsistentRates { residual } => write!(
                f,
                "contact rates violate rolling consistency (residual {residual:e})"
            ),
            ContactError::NotPureRolling { omega_z } => {
                write!(f, "state is not pure rolling (w_z = {omega_z:e})")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ContactError {}

impl From<SurfaceError> for ContactError {
    fn from(e: SurfaceError) -> Self {
        ContactError::Surface(e)
    }
}

/// The five contact coordinates `(u_o, v_o, u_h, v_h, psi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactConfig {
    pub object: Vector2<f64>,
    pub hand: Vector2<f64>,
    pub spin: f64,
}

impl ContactConfig {
    pub fn new(object: Vector2<f64>, hand: Vector2<f64>, spin: f64) -> Self {
        ContactConfig { object, hand, spin }
    }

    pub fn from_vector(q: &Vector5<f64>) -> Self {
        ContactConfig {
            object: Vector2::new(q[0], q[1]),
            hand: Vector2::new(q[2], q[3]),
            spin: q[4],
        }
    }

    pub fn to_vector(&self) -> Vector5<f64> {
        Vector5::new(self.object.x, self.object.y, self.hand.x, self.hand.y, self.spin)
    }

    /// The spin angle wrapped to `(-pi, pi]`.
    pub fn wrapped_spin(&self) -> f64 {
        let two_pi = 2.0 * core::f64::consts::PI;
        let w = (self.spin + core::f64::consts::PI).rem_euclid(two_pi);
        if w == 0.0 {
            core::f64::consts::PI
        } else {
            w - core::f64::consts::PI
        }
    }
}

/// The contact coordinate rates `q_dot`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactRates {
    pub object: Vector2<f64>,
    pub hand: Vector2<f64>,
    pub spin_rate: f64,
}

impl ContactRates {
    pub fn zero() -> Self {
        ContactRates {
            object: Vector2::zeros(),
            hand: Vector2::zeros(),
            spin_rate: 0.0,
        }
    }

    pub fn from_vector(v: &Vector5<f64>) -> Self {
        ContactRates {
            object: Vector2::new(v[0], v[1]),
            hand: Vector2::new(v[2], v[3]),
            spin_rate: v[4],
        }
    }

    pub fn to_vector(&self) -> Vector5<f64> {
        Vector5::new(self.object.x, self.object.y, self.hand.x, self.hand.y, self.spin_rate)
    }
}

/// Relative accelerations at the contact, split per the rolling constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeAccel {
    /// Relative rotational acceleration `(a_x, a_y, a_z)` in the hand
    /// contact frame.
    pub angular: Vector3<f64>,
    /// Relative linear acceleration; equals the rolling constraint value for
    /// rolling states.
    pub linear: Vector3<f64>,
}

impl RelativeAccel {
    pub fn to_vector(&self) -> Vector6<f64> {
        stack6(&self.angular, &self.linear)
    }
}

/// The object/hand chart pair in contact.
#[derive(Debug, Clone)]
pub struct SurfacePair {
    pub object: SurfaceChart,
    pub hand: SurfaceChart,
}

fn e1() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

/// In-plane reflection between the two contact frames.
pub fn spin_reflection(psi: f64) -> Matrix2<f64> {
    let (s, c) = (psi.sin(), psi.cos());
    Matrix2::new(c, s, s, -c)
}

/// Full 3x3 rotation from the hand contact frame to the object contact
/// frame (equal to its own inverse).
pub fn spin_rotation(psi: f64) -> Matrix3<f64> {
    let (s, c) = (psi.sin(), psi.cos());
    Matrix3::new(c, s, 0.0, s, -c, 0.0, 0.0, 0.0, -1.0)
}

/// Local geometry of both surfaces at a contact configuration, with the
/// first-order kinematics blocks preassembled.
#[derive(Debug, Clone)]
pub struct ContactKinematics {
    pub q: ContactConfig,
    pub object: LocalGeometry,
    pub hand: LocalGeometry,
    /// `R_psi`.
    pub spin_reflection: Matrix2<f64>,
    /// `(H_o~ + H_h)^-1`.
    pub relative_curvature_inv: Matrix2<f64>,
    /// `u_o_dot = k1_object * (w_x, w_y)`.
    pub k1_object: Matrix2<f64>,
    /// `u_h_dot = k1_hand * (w_x, w_y)`.
    pub k1_hand: Matrix2<f64>,
    /// `sigma_o Gamma_o k1_object + sigma_h Gamma_h k1_hand` (the spin-row
    /// coupling; `psi_dot = w_z - spin_coupling * (w_x, w_y)`).
    pub spin_coupling: RowVector2<f64>,
}

impl ContactKinematics {
    /// Evaluates both surfaces at `q` and assembles the first-order blocks.
    pub fn new(pair: &SurfacePair, q: &ContactConfig) -> Result<Self, ContactError> {
        let object = pair.object.local_geometry(&q.object)?;
        let hand = pair.hand.local_geometry(&q.hand)?;
        Self::from_geometry(q, object, hand)
    }

    /// [`Self::new`] without chart-margin enforcement (used inside
    /// integration stages; accepted states are checked separately).
    pub fn new_unchecked_domain(pair: &SurfacePair, q: &ContactConfig) -> Result<Self, ContactError> {
        let object = pair.object.local_geometry_unchecked(&q.object)?;
        let hand = pair.hand.local_geometry_unchecked(&q.hand)?;
        Self::from_geometry(q, object, hand)
    }

    fn from_geometry(
        q: &ContactConfig,
        object: LocalGeometry,
        hand: LocalGeometry,
    ) -> Result<Self, ContactError> {
        let r_psi = spin_reflection(q.spin);

        let h_tilde = r_psi * object.curvature * r_psi;
        let rel = h_tilde + hand.curvature;
        let rel_inv = rel
            .try_inverse()
            .ok_or(ContactError::SingularGeometry {
                inverse_norm: f64::INFINITY,
            })?;
        let inv_norm = rel_inv.norm();
        if inv_norm > RELATIVE_CURVATURE_NORM_MAX {
            return Err(ContactError::SingularGeometry {
                inverse_norm: inv_norm,
            });
        }

        let k1_object = object.inv_sqrt_metric() * r_psi * rel_inv * e1();
        let k1_hand = hand.inv_sqrt_metric() * rel_inv * e1();
        let spin_coupling =
            object.sigma * object.gamma * k1_object + hand.sigma * hand.gamma * k1_hand;

        Ok(ContactKinematics {
            q: *q,
            object,
            hand,
            spin_reflection: r_psi,
            relative_curvature_inv: rel_inv,
            k1_object,
            k1_hand,
            spin_coupling,
        })
    }

    /// The 5x3 first-order kinematics matrix mapping `omega_rel` to `q_dot`.
    pub fn k1_matrix(&self) -> SMatrix<f64, 5, 3> {
        let mut k1 = SMatrix::<f64, 5, 3>::zeros();
        k1.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.k1_object);
        k1.fixed_view_mut::<2, 2>(2, 0).copy_from(&self.k1_hand);
        k1[(4, 0)] = -self.spin_coupling[0];
        k1[(4, 1)] = -self.spin_coupling[1];
        k1[(4, 2)] = 1.0;
        k1
    }

    /// First-order kinematics: `q_dot = K1(q) omega_rel`.
    pub fn rates_from_omega(&self, omega_rel: &Vector3<f64>) -> ContactRates {
        let w_xy = Vector2::new(omega_rel.x, omega_rel.y);
        ContactRates {
            object: self.k1_object * w_xy,
            hand: self.k1_hand * w_xy,
            spin_rate: omega_rel.z - (self.spin_coupling * w_xy)[0],
        }
    }

    /// Recovers `omega_rel` from `q_dot`, checking the rolling-consistency
    /// constraint `k1_object^-1 u_o_dot = k1_hand^-1 u_h_dot`.
    pub fn omega_from_rates(&self, rates: &ContactRates) -> Result<Vector3<f64>, ContactError> {
        let w_from_object = self
            .k1_object
            .try_inverse()
            .ok_or(ContactError::SingularGeometry {
                inverse_norm: f64::INFINITY,
            })?
            * rates.object;
        let residual = self.consistency_residual(rates)?;
        if residual > CONSISTENCY_TOL {
            return Err(ContactError::InconsistentRates { residual });
        }
        let w_z = rates.spin_rate
            + (self.object.sigma * self.object.gamma * rates.object)[0]
            + (self.hand.sigma * self.hand.gamma * rates.hand)[0];
        Ok(Vector3::new(w_from_object.x, w_from_object.y, w_z))
    }

    /// Norm of `k1_object^-1 u_o_dot - k1_hand^-1 u_h_dot`.
    pub fn consistency_residual(&self, rates: &ContactRates) -> Result<f64, ContactError> {
        let inv = |m: &Matrix2<f64>| {
            m.try_inverse().ok_or(ContactError::SingularGeometry {
                inverse_norm: f64::INFINITY,
            })
        };
        let w_o = inv(&self.k1_object)? * rates.object;
        let w_h = inv(&self.k1_hand)? * rates.hand;
        Ok((w_o - w_h).norm())
    }

    /// Spin rate `w_z` implied by the state (`psi_dot` plus the connection
    /// terms).
    pub fn spin_velocity(&self, rates: &ContactRates) -> f64 {
        rates.spin_rate
            + (self.object.sigma * self.object.gamma * rates.object)[0]
            + (self.hand.sigma * self.hand.gamma * rates.hand)[0]
    }

    /// Rolling constraint on the relative linear acceleration (the value
    /// `a_rel` must take for the contact to persist without slipping).
    pub fn rolling_accel(&self, rates: &ContactRates, omega_rel: &Vector3<f64>) -> Vector3<f64> {
        // Contact-locus velocity relative to the object, in the hand contact
        // frame; equal to the hand-side expression for rolling states.
        let t = self.spin_reflection * self.object.sqrt_metric() * rates.object;
        let xy = -omega_rel.z * e1() * t;
        let z = omega_rel.y * t.x - omega_rel.x * t.y;
        Vector3::new(xy.x, xy.y, z)
    }

    /// Second-order kinematics: `q_ddot = K2(q, omega_rel) + K3(q) dV_rel`.
    ///
    /// `omega_rel` must be consistent with `rates` (use
    /// [`Self::omega_from_rates`]).
    pub fn qddot(
        &self,
        rates: &ContactRates,
        omega_rel: &Vector3<f64>,
        dv_rel: &Vector6<f64>,
    ) -> Result<Vector5<f64>, ContactError> {
        let m = self.curvature_coupling_matrix();
        let m_inv = m.try_inverse().ok_or(ContactError::SingularGeometry {
            inverse_norm: f64::INFINITY,
        })?;

        let w_o = quad_rates(&rates.object);
        let w_h = quad_rates(&rates.hand);
        let sqrt_go = self.object.sqrt_metric();
        let sqrt_gh = self.hand.sqrt_metric();
        let r_psi = &self.spin_reflection;
        let w_z = omega_rel.z;

        // Quadratic-velocity sources from both surfaces.
        let top_o = -(r_psi * sqrt_go) * self.object.gamma_bar * w_o;
        let bot_o = (r_psi * e1() * self.object.inv_sqrt_metric()) * self.object.ell_bbar * w_o;
        let top_h = sqrt_gh * self.hand.gamma_bar * w_h;
        let bot_h = -(e1() * self.hand.inv_sqrt_metric()) * self.hand.ell_bbar * w_h;

        // Velocity cross-terms.
        let top_v = -2.0 * w_z * e1() * r_psi * sqrt_go * rates.object;
        let bot_v = -w_z * r_psi * self.object.curvature * sqrt_go * rates.object
            + rates.spin_rate * self.hand.curvature * sqrt_gh * rates.hand;

        // Connection term on the hand rows.
        let sg = (self.object.sigma * self.object.gamma * rates.object)[0];
        let bot_g = -sg * Vector2::new(omega_rel.y, -omega_rel.x);

        let rhs = Vector4::new(
            top_o.x + top_h.x + top_v.x,
            top_o.y + top_h.y + top_v.y,
            bot_o.x + bot_h.x + bot_v.x + bot_g.x,
            bot_o.y + bot_h.y + bot_v.y + bot_g.y,
        );
        let k2a = m_inv * rhs;

        // Acceleration channel: stacked (-a_x, -a_y, alpha_x, alpha_y).
        let accel_in = Vector4::new(-dv_rel[3], -dv_rel[4], dv_rel[0], dv_rel[1]);
        let u_accel = m_inv * accel_in;

        let uddot = k2a + u_accel;

        // Spin row.
        let l_term = (rowvec2(omega_rel.y, -omega_rel.x)
            * (r_psi * e1() * self.object.inv_sqrt_metric())
            * self.object.second_fundamental
            * rates.object)[0];
        let gbb_o = (self.object.sigma * self.object.gamma_bbar * w_o)[0];
        let gbb_h = (self.hand.sigma * self.hand.gamma_bbar * w_h)[0];
        let couple = |u: &Vector4<f64>| -> f64 {
            (self.object.sigma * self.object.gamma * Vector2::new(u.x, u.y))[0]
                + (self.hand.sigma * self.hand.gamma * Vector2::new(u.z, u.w))[0]
        };
        let psi_ddot = l_term - gbb_o - gbb_h - couple(&uddot) + dv_rel[2];

        Ok(Vector5::new(uddot.x, uddot.y, uddot.z, uddot.w, psi_ddot))
    }

    /// The 4x4 matrix coupling `[u_o_ddot; u_h_ddot]` to the contact
    /// acceleration channel.
    fn curvature_coupling_matrix(&self) -> Matrix4<f64> {
        let r_psi = &self.spin_reflection;
        let a = r_psi * self.object.sqrt_metric();
        let b = -self.hand.sqrt_metric();
        let c = r_psi * e1() * self.object.curvature * self.object.sqrt_metric();
        let d = -(e1() * self.hand.curvature * self.hand.sqrt_metric());
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&a);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&b);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&c);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&d);
        m
    }

    /// Angular velocity of the (moving) hand contact frame relative to the
    /// hand body, expressed in the hand contact frame: curvature tilt from
    /// the moving contact plus the in-plane connection rate.
    pub fn hand_frame_transport_rate(&self, rates: &ContactRates) -> Vector3<f64> {
        let tilt = self.hand.curvature * self.hand.sqrt_metric() * rates.hand;
        let xy = -e1() * tilt;
        let z = (self.hand.sigma * self.hand.gamma * rates.hand)[0];
        Vector3::new(xy.x, xy.y, z)
    }
}

fn rowvec2(a: f64, b: f64) -> nalgebra::RowVector2<f64> {
    nalgebra::RowVector2::new(a, b)
}

/// `(u_dot^2, u_dot v_dot, v_dot^2)`.
fn quad_rates(u: &Vector2<f64>) -> Vector3<f64> {
    Vector3::new(u.x * u.x, u.x * u.y, u.y * u.y)
}

/// All frames and transforms reconstructed from the hand pose and the
/// contact configuration.
#[derive(Debug, Clone)]
pub struct ContactFrames {
    /// `T_sh`.
    pub hand_pose: Transform,
    /// `T_so`, constructed so the contact points coincide and the normals
    /// oppose.
    pub object_pose: Transform,
    /// `T_s c_h`: hand contact frame in the world.
    pub world_from_hand_contact: Transform,
    /// `T_s c_o`: object contact frame in the world.
    pub world_from_object_contact: Transform,
    /// `T_oh`.
    pub object_from_hand: Transform,
    /// `T_o c_h`.
    pub object_from_hand_contact: Transform,
    /// `T_c_h o`.
    pub hand_contact_from_object: Transform,
    /// In-plane spin reflection `R_psi`.
    pub spin_reflection: Matrix2<f64>,
    /// Contact point in the hand frame, `F_h(u_h)`.
    pub hand_contact_offset: Vector3<f64>,
    /// Contact point in the object frame, `F_o(u_o)`.
    pub object_contact_offset: Vector3<f64>,
}

impl ContactFrames {
    /// Reconstructs the object pose and all derived transforms from the hand
    /// pose and contact configuration.
    pub fn build(
        pair: &SurfacePair,
        hand_pose: &Transform,
        q: &ContactConfig,
    ) -> Result<Self, ContactError> {
        let gauss_h = pair.hand.gauss_frame(&q.hand)?;
        let gauss_o = pair.object.gauss_frame(&q.object)?;
        let p_h = pair.hand.point(&q.hand)?;
        let p_o = pair.object.point(&q.object)?;
        Ok(Self::assemble(hand_pose, q, gauss_h, gauss_o, p_h, p_o))
    }

    /// [`Self::build`] without chart-margin enforcement.
    pub fn build_unchecked_domain(
        pair: &SurfacePair,
        hand_pose: &Transform,
        q: &ContactConfig,
    ) -> Result<Self, ContactError> {
        let gauss_h = pair.hand.gauss_frame_unchecked(&q.hand);
        let gauss_o = pair.object.gauss_frame_unchecked(&q.object);
        let p_h = pair.hand.jet_unchecked(&q.hand).f;
        let p_o = pair.object.jet_unchecked(&q.object).f;
        Ok(Self::assemble(hand_pose, q, gauss_h, gauss_o, p_h, p_o))
    }

    fn assemble(
        hand_pose: &Transform,
        q: &ContactConfig,
        gauss_h: Rotation,
        gauss_o: Rotation,
        p_h: Vector3<f64>,
        p_o: Vector3<f64>,
    ) -> Self {

        let hand_to_contact = Transform::new(gauss_h, p_h);
        let world_from_hand_contact = hand_pose.compose(&hand_to_contact);
        let spin = Transform::new(
            Rotation::from_matrix_unchecked(spin_rotation(q.spin)),
            Vector3::zeros(),
        );
        let object_to_contact = Transform::new(gauss_o, p_o);
        let object_pose = world_from_hand_contact
            .compose(&spin)
            .compose(&object_to_contact.inverse());
        let world_from_object_contact = object_pose.compose(&object_to_contact);

        let object_from_world = object_pose.inverse();
        let object_from_hand = object_from_world.compose(hand_pose);
        let object_from_hand_contact = object_from_world.compose(&world_from_hand_contact);

        ContactFrames {
            hand_pose: *hand_pose,
            object_pose,
            world_from_hand_contact,
            world_from_object_contact,
            object_from_hand,
            hand_contact_from_object: object_from_hand_contact.inverse(),
            object_from_hand_contact,
            spin_reflection: spin_reflection(q.spin),
            hand_contact_offset: p_h,
            object_contact_offset: p_o,
        }
    }
}

/// Spec-level wrapper: the 5x3 first-order kinematics matrix at `q`.
pub fn k1(pair: &SurfacePair, q: &ContactConfig) -> Result<SMatrix<f64, 5, 3>, ContactError> {
    Ok(ContactKinematics::new(pair, q)?.k1_matrix())
}

/// First-order kinematics `q_dot = K1(q) omega_rel`.
pub fn first_order_qdot(
    pair: &SurfacePair,
    q: &ContactConfig,
    omega_rel: &Vector3<f64>,
) -> Result<ContactRates, ContactError> {
    Ok(ContactKinematics::new(pair, q)?.rates_from_omega(omega_rel))
}

/// Body twist of the object from the hand twist and the relative twist at
/// the contact: `V_o = Ad(T_oh) V_h + Ad(T_o c_h) V_rel`.
pub fn object_twist(frames: &ContactFrames, hand_twist: &Twist, rel_twist: &Twist) -> Twist {
    let v = adjoint(&frames.object_from_hand) * hand_twist.to_vector()
        + adjoint(&frames.object_from_hand_contact) * rel_twist.to_vector();
    Twist::from_vector(&v)
}

/// Second-order kinematics `q_ddot = K2 + K3 dV_rel`, with `omega_rel`
/// recovered from `q_dot`.
pub fn second_order_qddot(
    pair: &SurfacePair,
    q: &ContactConfig,
    rates: &ContactRates,
    dv_rel: &Vector6<f64>,
) -> Result<Vector5<f64>, ContactError> {
    let kin = ContactKinematics::new(pair, q)?;
    let omega = kin.omega_from_rates(rates)?;
    kin.qddot(rates, &omega, dv_rel)
}

/// The rolling constraint on the relative linear acceleration.
pub fn rolling_accel_constraint(
    pair: &SurfacePair,
    q: &ContactConfig,
    rates: &ContactRates,
) -> Result<Vector3<f64>, ContactError> {
    let kin = ContactKinematics::new(pair, q)?;
    let omega = kin.omega_from_rates(rates)?;
    Ok(kin.rolling_accel(rates, &omega))
}

/// The spin acceleration `alpha_z` that preserves `w_z = 0` along a
/// pure-rolling motion.
///
/// Fails with [`ContactError::NotPureRolling`] when the state's spin
/// velocity exceeds [`PURE_ROLLING_SPIN_TOL`].
pub fn pure_rolling_alpha_z(
    pair: &SurfacePair,
    q: &ContactConfig,
    rates: &ContactRates,
) -> Result<f64, ContactError> {
    let kin = ContactKinematics::new(pair, q)?;
    let omega = kin.omega_from_rates(rates)?;
    if omega.z.abs() > PURE_ROLLING_SPIN_TOL {
        return Err(ContactError::NotPureRolling { omega_z: omega.z });
    }
    Ok(pure_rolling_alpha_z_unchecked(&kin, rates, &omega))
}

/// [`pure_rolling_alpha_z`] without the spin-velocity precondition; used
/// internally by the dynamics where `w_z` is maintained at zero by
/// construction.
pub fn pure_rolling_alpha_z_unchecked(
    kin: &ContactKinematics,
    rates: &ContactRates,
    omega_rel: &Vector3<f64>,
) -> f64 {
    let coeff = kin.spin_reflection * e1() * kin.object.inv_sqrt_metric()
        * kin.object.second_fundamental
        * rates.object;
    -(omega_rel.y * coeff.x - omega_rel.x * coeff.y)
}

/// The velocity-product bias between the frozen-frame relative acceleration
/// (which closes Newton-Euler exactly) and the contact-kinematics
/// acceleration slots, expressed in the hand contact frame.
///
/// The angular part is `W x omega_rel` with `W` the angular velocity of the
/// moving hand contact frame; the linear part is `-omega_rel x v_mat`, with
/// `v_mat` the hand material velocity at the contact.
pub fn contact_frame_bias(
    kin: &ContactKinematics,
    frames: &ContactFrames,
    rates: &ContactRates,
    omega_rel: &Vector3<f64>,
    hand_twist: &Twist,
) -> Vector6<f64> {
    let r_ch_h = frames
        .world_from_hand_contact
        .rotation
        .transpose()
        .matrix()
        * frames.hand_pose.rotation.matrix();
    let omega_h_c = r_ch_h * hand_twist.angular;
    let w = omega_h_c + kin.hand_frame_transport_rate(rates);
    let v_mat =
        r_ch_h * (hand_twist.linear + hand_twist.angular.cross(&frames.hand_contact_offset));
    stack6(&w.cross(omega_rel), &(-omega_rel.cross(&v_mat)))
}

/// Velocity-product term of the object-acceleration relation (`K4`):
/// the contact-frame bias transported into the object frame.
pub fn velocity_product_term(
    kin: &ContactKinematics,
    frames: &ContactFrames,
    rates: &ContactRates,
    omega_rel: &Vector3<f64>,
    hand_twist: &Twist,
) -> Vector6<f64> {
    adjoint(&frames.object_from_hand_contact)
        * contact_frame_bias(kin, frames, rates, omega_rel, hand_twist)
}

/// Body acceleration of the object:
/// `V_o_dot = Ad(T_oh) V_h_dot + Ad(T_o c_h) dV_rel + K4`.
#[allow(clippy::too_many_arguments)]
pub fn object_accel(
    pair: &SurfacePair,
    q: &ContactConfig,
    rates: &ContactRates,
    frames: &ContactFrames,
    hand_twist: &Twist,
    hand_accel: &Vector6<f64>,
    dv_rel: &Vector6<f64>,
) -> Result<Vector6<f64>, ContactError> {
    let kin = ContactKinematics::new(pair, q)?;
    let omega = kin.omega_from_rates(rates)?;
    let k4 = velocity_product_term(&kin, frames, rates, &omega, hand_twist);
    Ok(adjoint(&frames.object_from_hand) * hand_accel
        + adjoint(&frames.object_from_hand_contact) * dv_rel
        + k4)
}

/// Builds frames for a contact configuration (spec-level wrapper around
/// [`ContactFrames::build`]).
pub fn contact_frames(
    pair: &SurfacePair,
    hand_pose: &Transform,
    q: &ContactConfig,
) -> Result<ContactFrames, ContactError> {
    ContactFrames::build(pair, hand_pose, q)
}

/// Adjoint helper exposed for the dynamics assembly.
pub fn adjoint6(t: &Transform) -> Matrix6<f64> {
    adjoint(t)
}
