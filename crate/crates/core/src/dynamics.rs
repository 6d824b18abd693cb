//! Rolling dynamics: the contact-wrench solve, friction validity, the
//! control-affine state derivative, and trajectory simulation.
//!
//! The system state is the 22-vector
//! `s = (Phi_sh, r_sh, q, V_h, q_dot)`: hand roll-pitch-yaw and position,
//! the five contact coordinates, the hand body twist, and the contact
//! coordinate rates. The hand is acceleration-controlled; given the state
//! and the hand acceleration, a 6x6 linear solve yields the relative
//! rotational acceleration at the contact and the contact wrench, which is
//! then checked against the normal-force and friction-cone limits.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DVector, Matrix6, SMatrix, SVector, Vector3, Vector6};

use crate::contact::{
    contact_frame_bias, pure_rolling_alpha_z_unchecked, ContactConfig, ContactError,
    ContactFrames, ContactKinematics, ContactRates, SurfacePair,
};
use crate::geom3d::{
    adjoint, lie_ad, rotation_from_rpy, rpy_rates_from_angular_velocity, stack6, EulerRpy,
    GimbalLockError, Rotation, Transform, Twist, Wrench,
};
use crate::ode::{integrate_dense, OdeOptions, StopReason};
#[allow(unused_imports)]
use crate::real::FloatExt as _;

/// Hand pitch angles at or beyond this are rejected (the roll-pitch-yaw rate
/// map degenerates at pi/2).
pub const PITCH_LIMIT: f64 = 1.4;

/// Condition-number limit on the assembled 6x6 contact system.
pub const CONTACT_SYSTEM_COND_MAX: f64 = 1e12;

/// Dimension of the rolling state vector.
pub const STATE_DIM: usize = 22;

/// Errors from dynamics evaluation and simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsError {
    Contact(ContactError),
    Gimbal(GimbalLockError),
    /// The assembled contact system is numerically singular.
    SingularSystem { condition: f64 },
    /// The adaptive integrator collapsed its step size.
    StepSizeCollapse { t: f64, step: f64 },
    /// The integrator exhausted its step budget.
    StepBudgetExhausted { t: f64 },
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicsError::Contact(e) => write!(f, "{e}"),
            DynamicsError::Gimbal(e) => write!(f, "{e}"),
            DynamicsError::SingularSystem { condition } => {
                write!(f, "contact dynamics system is singular (cond ~ {condition:e})")
            }
            DynamicsError::StepSizeCollapse { t, step } => {
                write!(f, "integrator step collapsed to {step:e} at t = {t}")
            }
            DynamicsError::StepBudgetExhausted { t } => {
                write!(f, "integrator step budget exhausted at t = {t}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DynamicsError {}

impl From<ContactError> for DynamicsError {
    fn from(e: ContactError) -> Self {
        DynamicsError::Contact(e)
    }
}

impl From<GimbalLockError> for DynamicsError {
    fn from(e: GimbalLockError) -> Self {
        DynamicsError::Gimbal(e)
    }
}

/// Full state of the rolling system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollingState {
    /// Hand orientation as roll-pitch-yaw.
    pub hand_rpy: EulerRpy,
    /// Hand position in the world, m.
    pub hand_position: Vector3<f64>,
    /// Contact configuration.
    pub contact: ContactConfig,
    /// Hand body twist.
    pub hand_twist: Twist,
    /// Contact coordinate rates.
    pub contact_rates: ContactRates,
}

impl RollingState {
    pub fn to_vector(&self) -> SVector<f64, STATE_DIM> {
        let mut s = SVector::<f64, STATE_DIM>::zeros();
        s.fixed_rows_mut::<3>(0).copy_from(&self.hand_rpy.to_vector());
        s.fixed_rows_mut::<3>(3).copy_from(&self.hand_position);
        s.fixed_rows_mut::<5>(6).copy_from(&self.contact.to_vector());
        s.fixed_rows_mut::<6>(11).copy_from(&self.hand_twist.to_vector());
        s.fixed_rows_mut::<5>(17)
            .copy_from(&self.contact_rates.to_vector());
        s
    }

    pub fn from_vector(s: &SVector<f64, STATE_DIM>) -> Self {
        RollingState {
            hand_rpy: EulerRpy::from_vector(&s.fixed_rows::<3>(0).into_owned()),
            hand_position: s.fixed_rows::<3>(3).into_owned(),
            contact: ContactConfig::from_vector(&s.fixed_rows::<5>(6).into_owned()),
            hand_twist: Twist::from_vector(&s.fixed_rows::<6>(11).into_owned()),
            contact_rates: ContactRates::from_vector(&s.fixed_rows::<5>(17).into_owned()),
        }
    }

    /// World pose of the hand.
    pub fn hand_pose(&self) -> Transform {
        Transform::new(rotation_from_rpy(&self.hand_rpy), self.hand_position)
    }
}

/// Mass properties of the object (the frame sits at the center of mass,
/// axes along the principal directions).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectModel {
    /// Mass, kg.
    pub mass: f64,
    /// Diagonal of the rotational inertia, kg m^2.
    pub inertia: Vector3<f64>,
}

impl ObjectModel {
    pub fn new(mass: f64, inertia: Vector3<f64>) -> Self {
        ObjectModel { mass, inertia }
    }

    pub fn is_valid(&self) -> bool {
        self.mass > 0.0 && self.inertia.x > 0.0 && self.inertia.y > 0.0 && self.inertia.z > 0.0
    }

    /// Spatial inertia `blockdiag(J, m I)`.
    pub fn spatial_inertia(&self) -> Matrix6<f64> {
        let mut g = Matrix6::zeros();
        g[(0, 0)] = self.inertia.x;
        g[(1, 1)] = self.inertia.y;
        g[(2, 2)] = self.inertia.z;
        g[(3, 3)] = self.mass;
        g[(4, 4)] = self.mass;
        g[(5, 5)] = self.mass;
        g
    }
}

/// Contact friction regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactMode {
    /// Point contact: forces only, relative spin about the normal allowed.
    Rolling,
    /// Soft contact: a normal-axis torque is transmitted and spin is
    /// kinematically forbidden.
    PureRolling,
}

/// Which expression supplies the pure-rolling spin acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpinAccelRule {
    /// The closed form derived from `d(w_z)/dt = 0`; correct for general
    /// geometry pairs.
    #[default]
    DerivativeConsistent,
    /// The historical `alpha_z = 0` shortcut. Valid only for special
    /// geometries (sphere-on-plane and similar); kept for regression
    /// comparison.
    Zero,
}

/// Friction model and coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionModel {
    pub mode: ContactMode,
    /// Static friction coefficient (dimensionless).
    pub mu_static: f64,
    /// Spin-torque coefficient, m (pure rolling only).
    pub mu_spin: f64,
    /// Pure-rolling spin-acceleration rule.
    pub spin_rule: SpinAccelRule,
}

impl FrictionModel {
    pub fn rolling(mu_static: f64) -> Self {
        FrictionModel {
            mode: ContactMode::Rolling,
            mu_static,
            mu_spin: 0.0,
            spin_rule: SpinAccelRule::DerivativeConsistent,
        }
    }

    pub fn pure_rolling(mu_static: f64, mu_spin: f64) -> Self {
        FrictionModel {
            mode: ContactMode::PureRolling,
            mu_static,
            mu_spin,
            spin_rule: SpinAccelRule::DerivativeConsistent,
        }
    }
}

/// Everything needed to evaluate the rolling dynamics.
#[derive(Debug, Clone)]
pub struct RollingSystem {
    pub surfaces: SurfacePair,
    pub object: ObjectModel,
    pub friction: FrictionModel,
    /// Gravity acceleration vector in the world frame, m/s^2.
    pub gravity: Vector3<f64>,
}

/// Relative rotational acceleration and contact wrench, with validity flags.
#[derive(Debug, Clone, Copy)]
pub struct ContactSolution {
    /// Relative rotational acceleration at the contact, hand contact frame.
    pub alpha_rel: Vector3<f64>,
    /// Relative linear acceleration (the rolling-constraint value).
    pub a_rel: Vector3<f64>,
    /// Contact wrench in the hand contact frame.
    pub wrench: Wrench,
    /// `f_z >= 0` (no adhesion).
    pub valid_normal: bool,
    /// `|(f_x, f_y)| <= mu_s f_z`.
    pub valid_friction: bool,
    /// `|tau_z| <= mu_spin f_z` (pure rolling; vacuously true otherwise).
    pub valid_spin: bool,
}

impl ContactSolution {
    pub fn all_valid(&self) -> bool {
        self.valid_normal && self.valid_friction && self.valid_spin
    }

    /// Stacked relative acceleration `(alpha, a)`.
    pub fn dv_rel(&self) -> Vector6<f64> {
        stack6(&self.alpha_rel, &self.a_rel)
    }
}

/// One full dynamics evaluation at a state.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub sdot: SVector<f64, STATE_DIM>,
    pub solution: ContactSolution,
    pub omega_rel: Vector3<f64>,
    pub frames: ContactFrames,
    pub object_twist: Twist,
}

/// Gravitational wrench on the object in its own frame: zero torque about
/// the mass center and the rotated weight vector.
pub fn gravity_wrench(
    model: &ObjectModel,
    object_rotation: &Rotation,
    gravity: &Vector3<f64>,
) -> Wrench {
    Wrench::new(
        Vector3::zeros(),
        object_rotation.transpose().apply(&(model.mass * gravity)),
    )
}

fn max_abs_col_sum(m: &Matrix6<f64>) -> f64 {
    (0..6)
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves the rolling (or pure-rolling) contact system at a state: the
/// relative rotational acceleration and contact wrench under the given hand
/// acceleration, with validity flags.
pub fn solve_contact(
    system: &RollingSystem,
    state: &RollingState,
    hand_accel: &Vector6<f64>,
) -> Result<ContactSolution, DynamicsError> {
    let kin = ContactKinematics::new(&system.surfaces, &state.contact)?;
    let frames = ContactFrames::build(&system.surfaces, &state.hand_pose(), &state.contact)?;
    solve_contact_prepared(system, state, hand_accel, &kin, &frames).map(|(sol, _, _)| sol)
}

/// The inner contact solve with precomputed kinematics and frames; also
/// returns the recovered relative angular velocity and the object twist.
fn solve_contact_prepared(
    system: &RollingSystem,
    state: &RollingState,
    hand_accel: &Vector6<f64>,
    kin: &ContactKinematics,
    frames: &ContactFrames,
) -> Result<(ContactSolution, Vector3<f64>, Twist), DynamicsError> {
    let rates = &state.contact_rates;
    let omega_rel = kin.omega_from_rates(rates)?;
    let rel_twist = Twist::new(omega_rel, Vector3::zeros());

    let ad_oh = adjoint(&frames.object_from_hand);
    let ad_och = adjoint(&frames.object_from_hand_contact);
    let ad_cho_t = adjoint(&frames.hand_contact_from_object).transpose();

    let v_o = Twist::from_vector(
        &(ad_oh * state.hand_twist.to_vector() + ad_och * rel_twist.to_vector()),
    );

    let g_o = system.object.spatial_inertia();
    let f_grav = gravity_wrench(&system.object, &frames.object_pose.rotation, &system.gravity);

    let a_roll = kin.rolling_accel(rates, &omega_rel);
    let bias = contact_frame_bias(kin, frames, rates, &omega_rel, &state.hand_twist);

    // Known part of the frozen-frame relative acceleration: the linear
    // rolling constraint, the frame-transport bias, and (pure rolling) the
    // spin acceleration.
    let mut known = stack6(&Vector3::zeros(), &a_roll) + bias;
    let alpha_z_pure = match system.friction.mode {
        ContactMode::Rolling => None,
        ContactMode::PureRolling => {
            let az = match system.friction.spin_rule {
                SpinAccelRule::DerivativeConsistent => {
                    pure_rolling_alpha_z_unchecked(kin, rates, &omega_rel)
                }
                SpinAccelRule::Zero => 0.0,
            };
            known[2] += az;
            Some(az)
        }
    };

    let momentum_rhs = lie_ad(&v_o).transpose() * g_o * v_o.to_vector() + f_grav.to_vector();
    let b = momentum_rhs - g_o * (ad_oh * hand_accel + ad_och * known);

    // Columns: unknown relative rotational accelerations through
    // G_o Ad(T_o c_h), unknown wrench components through -Ad(T_c_h o)^T.
    let g_ad = g_o * ad_och;
    let mut a = Matrix6::zeros();
    match system.friction.mode {
        ContactMode::Rolling => {
            for i in 0..3 {
                a.set_column(i, &g_ad.column(i).into_owned());
            }
            for i in 0..3 {
                a.set_column(3 + i, &(-ad_cho_t.column(3 + i).into_owned()));
            }
        }
        ContactMode::PureRolling => {
            for i in 0..2 {
                a.set_column(i, &g_ad.column(i).into_owned());
            }
            a.set_column(2, &(-ad_cho_t.column(2).into_owned()));
            for i in 0..3 {
                a.set_column(3 + i, &(-ad_cho_t.column(3 + i).into_owned()));
            }
        }
    }

    let a_inv = a.try_inverse().ok_or(DynamicsError::SingularSystem {
        condition: f64::INFINITY,
    })?;
    let condition = max_abs_col_sum(&a) * max_abs_col_sum(&a_inv);
    if condition > CONTACT_SYSTEM_COND_MAX {
        return Err(DynamicsError::SingularSystem { condition });
    }
    let x = a_inv * b;

    let (alpha_rel, wrench) = match system.friction.mode {
        ContactMode::Rolling => (
            Vector3::new(x[0], x[1], x[2]),
            Wrench::new(Vector3::zeros(), Vector3::new(x[3], x[4], x[5])),
        ),
        ContactMode::PureRolling => (
            Vector3::new(x[0], x[1], alpha_z_pure.unwrap_or(0.0)),
            Wrench::new(
                Vector3::new(0.0, 0.0, x[2]),
                Vector3::new(x[3], x[4], x[5]),
            ),
        ),
    };

    let f = &wrench.force;
    let valid_normal = f.z >= 0.0;
    let valid_friction = f.x.hypot(f.y) <= system.friction.mu_static * f.z + 1e-12;
    let valid_spin = match system.friction.mode {
        ContactMode::Rolling => true,
        ContactMode::PureRolling => {
            wrench.torque.z.abs() <= system.friction.mu_spin * f.z + 1e-12
        }
    };

    Ok((
        ContactSolution {
            alpha_rel,
            a_rel: a_roll,
            wrench,
            valid_normal,
            valid_friction,
            valid_spin,
        },
        omega_rel,
        v_o,
    ))
}

/// Evaluates the full control-affine state derivative together with the
/// contact solution at a state.
///
/// Chart-domain margins are not enforced here (integration stages may probe
/// slightly past them); [`domain_check`] covers accepted states.
pub fn evaluate(
    system: &RollingSystem,
    state: &RollingState,
    hand_accel: &Vector6<f64>,
) -> Result<Evaluation, DynamicsError> {
    if state.hand_rpy.pitch.abs() >= PITCH_LIMIT {
        return Err(DynamicsError::Gimbal(GimbalLockError {
            pitch: state.hand_rpy.pitch,
        }));
    }
    let kin = ContactKinematics::new_unchecked_domain(&system.surfaces, &state.contact)?;
    let frames =
        ContactFrames::build_unchecked_domain(&system.surfaces, &state.hand_pose(), &state.contact)?;
    let (solution, omega_rel, v_o) =
        solve_contact_prepared(system, state, hand_accel, &kin, &frames)?;

    let r_sh = frames.hand_pose.rotation;
    let omega_world = r_sh.apply(&state.hand_twist.angular);
    let rpy_rates = rpy_rates_from_angular_velocity(&state.hand_rpy, &omega_world)?;
    let qddot = kin.qddot(&state.contact_rates, &omega_rel, &solution.dv_rel())?;

    let mut sdot = SVector::<f64, STATE_DIM>::zeros();
    sdot.fixed_rows_mut::<3>(0).copy_from(&rpy_rates);
    sdot.fixed_rows_mut::<3>(3)
        .copy_from(&r_sh.apply(&state.hand_twist.linear));
    sdot.fixed_rows_mut::<5>(6)
        .copy_from(&state.contact_rates.to_vector());
    sdot.fixed_rows_mut::<6>(11).copy_from(hand_accel);
    sdot.fixed_rows_mut::<5>(17).copy_from(&qddot);

    Ok(Evaluation {
        sdot,
        solution,
        omega_rel,
        frames,
        object_twist: v_o,
    })
}

/// The control-affine state derivative `s_dot = K7(s) + K8(s) u`.
pub fn state_derivative(
    system: &RollingSystem,
    state: &RollingState,
    hand_accel: &Vector6<f64>,
) -> Result<SVector<f64, STATE_DIM>, DynamicsError> {
    evaluate(system, state, hand_accel).map(|e| e.sdot)
}

/// Mechanical energy of the object: `1/2 V_o^T G_o V_o - m g . r_so`.
pub fn mechanical_energy(system: &RollingSystem, state: &RollingState) -> Result<f64, DynamicsError> {
    let kin = ContactKinematics::new(&system.surfaces, &state.contact)?;
    let frames = ContactFrames::build(&system.surfaces, &state.hand_pose(), &state.contact)?;
    let omega_rel = kin.omega_from_rates(&state.contact_rates)?;
    let rel = Twist::new(omega_rel, Vector3::zeros());
    let v_o = adjoint(&frames.object_from_hand) * state.hand_twist.to_vector()
        + adjoint(&frames.object_from_hand_contact) * rel.to_vector();
    let g_o = system.object.spatial_inertia();
    let kinetic = 0.5 * (v_o.transpose() * g_o * v_o)[0];
    let potential = -system.object.mass * system.gravity.dot(&frames.object_pose.translation);
    Ok(kinetic + potential)
}

/// Why a simulation stopped before its end time.
#[derive(Debug, Clone, PartialEq)]
pub enum HaltCause {
    /// The contact normal force went negative (separation).
    NormalForce { f_z: f64 },
    /// The tangential force left the friction cone.
    FrictionCone { tangential: f64, limit: f64 },
    /// The spin torque exceeded its limit (pure rolling).
    SpinTorque { tau_z: f64, limit: f64 },
    /// A contact coordinate left its chart's admissible domain.
    ChartDomain,
    /// The hand pitch approached the representation singularity.
    GimbalLock { pitch: f64 },
    /// Contact geometry degenerated (relative curvature singular).
    SingularGeometry,
    /// The stored rates drifted off the rolling-consistency subspace.
    InconsistentRates { residual: f64 },
}

impl fmt::Display for HaltCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HaltCause::NormalForce { f_z } => write!(f, "normal force became negative ({f_z} N)"),
            HaltCause::FrictionCone { tangential, limit } => {
                write!(f, "friction cone violated ({tangential} N > {limit} N)")
            }
            HaltCause::SpinTorque { tau_z, limit } => {
                write!(f, "spin torque limit violated ({tau_z} N m > {limit} N m)")
            }
            HaltCause::ChartDomain => write!(f, "contact left the chart domain"),
            HaltCause::GimbalLock { pitch } => {
                write!(f, "hand pitch {pitch} reached the representation singularity")
            }
            HaltCause::SingularGeometry => write!(f, "contact geometry degenerated"),
            HaltCause::InconsistentRates { residual } => {
                write!(f, "rolling consistency lost (residual {residual:e})")
            }
        }
    }
}

/// Simulation termination status.
#[derive(Debug, Clone, PartialEq)]
pub enum SimOutcome {
    Completed,
    Halted { time: f64, cause: HaltCause },
}

/// One trajectory sample.
#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub time: f64,
    pub state: RollingState,
    pub control: Vector6<f64>,
    pub wrench: Wrench,
    pub valid_normal: bool,
    pub valid_friction: bool,
    pub valid_spin: bool,
}

/// Simulation output: samples at the requested times plus the outcome.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub outcome: SimOutcome,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    /// Largest rate-projection correction applied (zero when projection is
    /// disabled).
    pub max_projection_correction: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &RollingState {
        &self.samples.last().expect("trajectory has samples").state
    }

    pub fn final_time(&self) -> f64 {
        self.samples.last().expect("trajectory has samples").time
    }
}

/// Simulation options.
#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Project the stored contact rates onto the rolling-consistency
    /// subspace after each accepted step.
    pub project_rates: bool,
    pub max_steps: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            project_rates: true,
            max_steps: 50_000_000,
        }
    }
}

impl SimOptions {
    /// Tight tolerances used for validation runs.
    pub fn validation() -> Self {
        SimOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            ..Default::default()
        }
    }
}


fn classify_halt(err: &DynamicsError) -> HaltCause {
    match err {
        DynamicsError::Contact(ContactError::Surface(_)) => HaltCause::ChartDomain,
        DynamicsError::Contact(ContactError::SingularGeometry { .. })
        | DynamicsError::SingularSystem { .. } => HaltCause::SingularGeometry,
        DynamicsError::Contact(ContactError::InconsistentRates { residual })
        | DynamicsError::Contact(ContactError::NotPureRolling { omega_z: residual }) => {
            HaltCause::InconsistentRates {
                residual: *residual,
            }
        }
        DynamicsError::Gimbal(e) => HaltCause::GimbalLock { pitch: e.pitch },
        DynamicsError::StepSizeCollapse { .. } | DynamicsError::StepBudgetExhausted { .. } => {
            HaltCause::SingularGeometry
        }
    }
}

fn flags_halt(system: &RollingSystem, sol: &ContactSolution) -> Option<HaltCause> {
    if !sol.valid_normal {
        return Some(HaltCause::NormalForce {
            f_z: sol.wrench.force.z,
        });
    }
    if !sol.valid_friction {
        return Some(HaltCause::FrictionCone {
            tangential: sol.wrench.force.x.hypot(sol.wrench.force.y),
            limit: system.friction.mu_static * sol.wrench.force.z,
        });
    }
    if !sol.valid_spin {
        return Some(HaltCause::SpinTorque {
            tau_z: sol.wrench.torque.z,
            limit: system.friction.mu_spin * sol.wrench.force.z,
        });
    }
    None
}

/// Checks the contact coordinates against both charts' margin-shrunk
/// domains.
pub fn domain_check(system: &RollingSystem, state: &RollingState) -> bool {
    system.surfaces.object.contains(&state.contact.object)
        && system.surfaces.hand.contains(&state.contact.hand)
}

/// Simulates the rolling system under a time-indexed control program,
/// sampling at the given times (ascending, within `[0, t_final]`).
///
/// The run halts with a typed [`SimOutcome::Halted`] when a wrench-validity
/// flag goes false or the state reaches a chart-domain or representation
/// limit; step-size collapse is a hard error.
pub fn simulate(
    system: &RollingSystem,
    initial: &RollingState,
    control: &dyn Fn(f64) -> Vector6<f64>,
    t_final: f64,
    sample_times: &[f64],
    options: &SimOptions,
) -> Result<Trajectory, DynamicsError> {
    simulate_with_feedback(
        system,
        initial,
        &mut |t, _s| control(t),
        t_final,
        sample_times,
        options,
    )
}

/// [`simulate`] with state feedback available to the control law.
pub fn simulate_with_feedback(
    system: &RollingSystem,
    initial: &RollingState,
    control: &mut dyn FnMut(f64, &RollingState) -> Vector6<f64>,
    t_final: f64,
    sample_times: &[f64],
    options: &SimOptions,
) -> Result<Trajectory, DynamicsError> {
    use core::cell::{Cell, RefCell};

    let ode_opts = OdeOptions {
        rel_tol: options.rel_tol,
        abs_tol: options.abs_tol,
        min_step: 1e-10,
        max_step: f64::INFINITY,
        max_steps: options.max_steps,
    };

    let control = RefCell::new(control);
    let rhs_error: RefCell<Option<DynamicsError>> = RefCell::new(None);
    let halt: RefCell<Option<(f64, HaltCause)>> = RefCell::new(None);
    let max_projection = Cell::new(0.0f64);

    let y0 = DVector::from_row_slice(initial.to_vector().as_slice());

    let mut rhs = |t: f64, y: &DVector<f64>, dy: &mut DVector<f64>| -> Result<(), ()> {
        let state = RollingState::from_vector(&SVector::from_column_slice(y.as_slice()));
        let u = (control.borrow_mut())(t, &state);
        match state_derivative(system, &state, &u) {
            Ok(sdot) => {
                dy.copy_from_slice(sdot.as_slice());
                Ok(())
            }
            Err(e) => {
                *rhs_error.borrow_mut() = Some(e);
                Err(())
            }
        }
    };

    let mut project = |_t: f64, y: &mut DVector<f64>| {
        if !options.project_rates {
            return;
        }
        let sv = SVector::<f64, STATE_DIM>::from_column_slice(y.as_slice());
        let state = RollingState::from_vector(&sv);
        let kin = match ContactKinematics::new_unchecked_domain(&system.surfaces, &state.contact) {
            Ok(k) => k,
            Err(_) => return,
        };
        let (inv_o, inv_h) = match (kin.k1_object.try_inverse(), kin.k1_hand.try_inverse()) {
            (Some(a), Some(b)) => (a, b),
            _ => return,
        };
        let w_mean = 0.5 * (inv_o * state.contact_rates.object + inv_h * state.contact_rates.hand);
        let new_o = kin.k1_object * w_mean;
        let new_h = kin.k1_hand * w_mean;
        let correction = ((new_o - state.contact_rates.object).norm_squared()
            + (new_h - state.contact_rates.hand).norm_squared())
        .sqrt();
        max_projection.set(max_projection.get().max(correction));
        y[17] = new_o.x;
        y[18] = new_o.y;
        y[19] = new_h.x;
        y[20] = new_h.y;
    };

    let mut observer = |step: &crate::ode::DenseStep, y: &DVector<f64>| -> bool {
        let state = RollingState::from_vector(&SVector::from_column_slice(y.as_slice()));
        let t = step.t0 + step.h;
        if !domain_check(system, &state) {
            *halt.borrow_mut() = Some((t, HaltCause::ChartDomain));
            return false;
        }
        let u = (control.borrow_mut())(t, &state);
        match evaluate(system, &state, &u) {
            Ok(eval) => match flags_halt(system, &eval.solution) {
                Some(cause) => {
                    *halt.borrow_mut() = Some((t, cause));
                    false
                }
                None => true,
            },
            Err(e) => {
                *halt.borrow_mut() = Some((t, classify_halt(&e)));
                false
            }
        }
    };

    let sol = integrate_dense(
        &mut rhs,
        0.0,
        y0,
        t_final,
        &ode_opts,
        &mut project,
        &mut observer,
    );

    let outcome = match sol.stop {
        None => SimOutcome::Completed,
        Some(StopReason::Observer) => {
            let (time, cause) = halt
                .borrow_mut()
                .take()
                .unwrap_or((sol.t_end, HaltCause::SingularGeometry));
            SimOutcome::Halted { time, cause }
        }
        Some(StopReason::RhsFailure) => {
            let err = rhs_error.borrow_mut().take();
            let cause = err
                .as_ref()
                .map(classify_halt)
                .unwrap_or(HaltCause::SingularGeometry);
            SimOutcome::Halted {
                time: sol.t_end,
                cause,
            }
        }
        Some(StopReason::StepSizeCollapse { step }) => {
            return Err(DynamicsError::StepSizeCollapse {
                t: sol.t_end,
                step,
            });
        }
        Some(StopReason::BudgetExhausted) => {
            return Err(DynamicsError::StepBudgetExhausted { t: sol.t_end });
        }
    };

    // Sample the dense solution; wrench and flags are re-evaluated at each
    // sample time.
    let mut samples = Vec::new();
    let t_reached = sol.t_end;
    for &t in sample_times.iter().filter(|&&t| t <= t_reached + 1e-12) {
        let y = sol.eval(t);
        let state = RollingState::from_vector(&SVector::from_column_slice(y.as_slice()));
        let u = (control.borrow_mut())(t, &state);
        let (wrench, flags) = match evaluate(system, &state, &u) {
            Ok(e) => (
                e.solution.wrench,
                (
                    e.solution.valid_normal,
                    e.solution.valid_friction,
                    e.solution.valid_spin,
                ),
            ),
            Err(_) => (Wrench::zero(), (false, false, false)),
        };
        samples.push(TrajectorySample {
            time: t,
            state,
            control: u,
            wrench,
            valid_normal: flags.0,
            valid_friction: flags.1,
            valid_spin: flags.2,
        });
    }

    Ok(Trajectory {
        samples,
        outcome,
        steps_accepted: sol.n_accepted,
        steps_rejected: sol.n_rejected,
        max_projection_correction: max_projection.get(),
    })
}

/// Uniform sample grid over `[0, t_final]` with approximately `dt` spacing,
/// always including both endpoints.
pub fn uniform_samples(t_final: f64, dt: f64) -> Vec<f64> {
    let n = ((t_final / dt).ceil() as usize).max(1);
    (0..=n).map(|i| t_final * i as f64 / n as f64).collect()
}

/// Jacobians of the state derivative with respect to state and control by
/// central differences (the control channel is exactly affine, so its
/// differences are exact up to roundoff).
pub fn numeric_jacobians(
    system: &RollingSystem,
    state: &RollingState,
    hand_accel: &Vector6<f64>,
    step: f64,
) -> Result<
    (
        SMatrix<f64, STATE_DIM, STATE_DIM>,
        SMatrix<f64, STATE_DIM, 6>,
    ),
    DynamicsError,
> {
    let s0 = state.to_vector();
    let mut a = SMatrix::<f64, STATE_DIM, STATE_DIM>::zeros();
    for j in 0..STATE_DIM {
        let mut sp = s0;
        let mut sm = s0;
        sp[j] += step;
        sm[j] -= step;
        let fp = state_derivative(system, &RollingState::from_vector(&sp), hand_accel)?;
        let fm = state_derivative(system, &RollingState::from_vector(&sm), hand_accel)?;
        a.set_column(j, &((fp - fm) / (2.0 * step)));
    }
    let mut b = SMatrix::<f64, STATE_DIM, 6>::zeros();
    for j in 0..6 {
        let mut up = *hand_accel;
        let mut um = *hand_accel;
        up[j] += step;
        um[j] -= step;
        let fp = state_derivative(system, state, &up)?;
        let fm = state_derivative(system, state, &um)?;
        b.set_column(j, &((fp - fm) / (2.0 * step)));
    }
    Ok((a, b))
}
