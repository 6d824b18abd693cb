//! Geometric validation of the contact kinematics: the first-order transport
//! is checked against rigid-body pose propagation, the second-order
//! kinematics against finite differences along transported paths, and the
//! rolling acceleration constraint against material-point accelerations.

use nalgebra::{Matrix3, Vector2, Vector3, Vector5, Vector6};
use rolling_core::contact::{
    contact_frames, first_order_qdot, k1, object_twist, pure_rolling_alpha_z,
    rolling_accel_constraint, second_order_qddot, ContactConfig, ContactFrames,
    ContactKinematics, ContactRates, SurfacePair,
};
use rolling_core::geom3d::{skew, Rotation, Transform, Twist};
use rolling_core::surface::{make_ellipsoid_bowl, make_plane, make_sphere};

const FRAC_PI_2: f64 = core::f64::consts::FRAC_PI_2;

fn ball_on_plane() -> SurfacePair {
    SurfacePair {
        object: make_sphere(0.2).unwrap(),
        hand: make_plane(),
    }
}

fn ball_in_bowl() -> SurfacePair {
    SurfacePair {
        object: make_sphere(0.05).unwrap(),
        hand: make_ellipsoid_bowl(Vector3::new(0.3, 0.3, 0.2)).unwrap(),
    }
}

fn turntable_q() -> ContactConfig {
    ContactConfig::new(Vector2::new(FRAC_PI_2, 0.0), Vector2::zeros(), 0.0)
}

fn bowl_q() -> ContactConfig {
    ContactConfig::new(
        Vector2::new(1.1, 0.4),
        Vector2::new(core::f64::consts::PI - 0.6, 0.2),
        0.3,
    )
}

/// Fixed-step RK4 on the 5-dim contact configuration under a prescribed
/// relative angular velocity program.
fn transport_q(
    pair: &SurfacePair,
    q0: &ContactConfig,
    omega: &dyn Fn(f64) -> Vector3<f64>,
    t_end: f64,
    h: f64,
) -> Vec<(f64, ContactConfig)> {
    let f = |t: f64, q: &Vector5<f64>| -> Vector5<f64> {
        let cfg = ContactConfig::from_vector(q);
        first_order_qdot(pair, &cfg, &omega(t)).unwrap().to_vector()
    };
    let mut out = vec![(0.0, *q0)];
    let mut q = q0.to_vector();
    let mut t = 0.0;
    let n = (t_end / h).round() as usize;
    for _ in 0..n {
        let k1v = f(t, &q);
        let k2v = f(t + h / 2.0, &(q + h / 2.0 * k1v));
        let k3v = f(t + h / 2.0, &(q + h / 2.0 * k2v));
        let k4v = f(t + h, &(q + h * k3v));
        q += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        t += h;
        out.push((t, ContactConfig::from_vector(&q)));
    }
    out
}

#[test]
fn k1_turntable_reference_values() {
    let pair = ball_on_plane();
    let q = turntable_q();
    let m = k1(&pair, &q).unwrap();

    // Zero relative motion gives zero rates.
    assert_eq!(m * Vector3::zeros(), Vector5::zeros());

    // The spinning-plate initial condition.
    let rates = first_order_qdot(&pair, &q, &Vector3::new(1.0, 0.0, -7.0)).unwrap();
    let expected = Vector5::new(0.0, 1.0, 0.0, -0.2, -7.0);
    assert!(
        (rates.to_vector() - expected).abs().max() < 1e-12,
        "q_dot = {:?}",
        rates.to_vector()
    );

    // Recovering omega from the rates inverts the map.
    let kin = ContactKinematics::new(&pair, &q).unwrap();
    let w = kin.omega_from_rates(&rates).unwrap();
    assert!((w - Vector3::new(1.0, 0.0, -7.0)).abs().max() < 1e-12);
}

#[test]
fn consistency_residual_is_zero_for_k1_rates() {
    let pair = ball_in_bowl();
    let q = bowl_q();
    let kin = ContactKinematics::new(&pair, &q).unwrap();
    for w in [
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(-0.3, 0.8, 2.0),
        Vector3::new(0.1, -0.2, -0.5),
    ] {
        let rates = kin.rates_from_omega(&w);
        assert!(kin.consistency_residual(&rates).unwrap() < 1e-10);
        let back = kin.omega_from_rates(&rates).unwrap();
        assert!((back - w).abs().max() < 1e-10);
    }
}

#[test]
fn inconsistent_rates_rejected() {
    let pair = ball_in_bowl();
    let kin = ContactKinematics::new(&pair, &bowl_q()).unwrap();
    let mut rates = kin.rates_from_omega(&Vector3::new(0.5, -0.2, 0.1));
    rates.hand.x += 0.05;
    assert!(kin.omega_from_rates(&rates).is_err());
}

#[test]
fn plane_on_plane_curvature_degenerate() {
    let pair = SurfacePair {
        object: make_plane(),
        hand: make_plane(),
    };
    let q = ContactConfig::new(Vector2::zeros(), Vector2::zeros(), 0.0);
    assert!(k1(&pair, &q).is_err());
}

#[test]
fn frames_place_ball_center_above_plane_contact() {
    let pair = ball_on_plane();
    let frames = contact_frames(&pair, &Transform::identity(), &turntable_q()).unwrap();
    assert!(
        (frames.object_pose.translation - Vector3::new(0.0, 0.0, 0.2))
            .abs()
            .max()
            < 1e-14
    );
    // Contact frames share their origin.
    assert!(
        (frames.world_from_hand_contact.translation
            - frames.world_from_object_contact.translation)
            .norm()
            < 1e-14
    );
}

#[test]
fn frames_have_antiparallel_normals_and_spin_offset() {
    for (pair, q0) in [(ball_on_plane(), turntable_q()), (ball_in_bowl(), bowl_q())] {
        let hand_pose = Transform::new(
            Rotation::about_x(0.1) * Rotation::about_z(0.4),
            Vector3::new(0.2, -0.1, 0.05),
        );
        let frames = contact_frames(&pair, &hand_pose, &q0).unwrap();
        let n_h = frames
            .world_from_hand_contact
            .rotation
            .matrix()
            .column(2)
            .into_owned();
        let n_o = frames
            .world_from_object_contact
            .rotation
            .matrix()
            .column(2)
            .into_owned();
        assert!((n_h + n_o).norm() < 1e-12, "normals not antiparallel");
        assert!(
            (frames.world_from_hand_contact.translation
                - frames.world_from_object_contact.translation)
                .norm()
                < 1e-12
        );

        // Perturbing psi rotates the object x-axis by exactly delta about
        // the object contact normal.
        let delta = 0.013;
        let mut q1 = q0;
        q1.spin += delta;
        let frames1 = contact_frames(&pair, &hand_pose, &q1).unwrap();
        let x0 = frames
            .world_from_object_contact
            .rotation
            .matrix()
            .column(0)
            .into_owned();
        let x1 = frames1
            .world_from_object_contact
            .rotation
            .matrix()
            .column(0)
            .into_owned();
        let y0 = frames
            .world_from_object_contact
            .rotation
            .matrix()
            .column(1)
            .into_owned();
        // Angle of x1 relative to x0, measured about n_o.
        let angle = (x1.dot(&y0)).atan2(x1.dot(&x0));
        // x_ch is fixed; rotating psi by delta swings x_co by -delta about
        // n_o (equivalently +delta of the hand frame relative to the object).
        assert!(
            (angle + delta).abs() < 1e-10,
            "spin offset angle {angle} vs {delta}"
        );
        let _ = x0;
    }
}

#[test]
fn object_twist_cases() {
    let pair = ball_on_plane();
    let frames = contact_frames(&pair, &Transform::identity(), &turntable_q()).unwrap();

    // Both twists zero.
    let v = object_twist(&frames, &Twist::zero(), &Twist::zero());
    assert_eq!(v.to_vector(), Vector6::zeros());

    // Turntable initial state: the object's spatial angular velocity has no
    // z-component (plate spin and relative spin cancel).
    let v_h = Twist::new(Vector3::new(0.0, 0.0, 7.0), Vector3::zeros());
    let v_rel = Twist::new(Vector3::new(1.0, 0.0, -7.0), Vector3::zeros());
    let v_o = object_twist(&frames, &v_h, &v_rel);
    let omega_world = frames.object_pose.rotation.apply(&v_o.angular);
    assert!((omega_world - Vector3::new(1.0, 0.0, 0.0)).abs().max() < 1e-12);

    // Rigid common motion: the object twist is the adjoint-transported hand
    // twist.
    let v_h = Twist::new(Vector3::new(0.3, -0.2, 0.5), Vector3::new(0.1, 0.0, -0.4));
    let v_o = object_twist(&frames, &v_h, &Twist::zero());
    let expected = rolling_core::geom3d::adjoint(&frames.object_from_hand) * v_h.to_vector();
    assert!((v_o.to_vector() - expected).abs().max() < 1e-12);
}

/// The object pose reconstructed from the transported contact coordinates
/// must move with exactly the body twist predicted by the twist relation;
/// this pins the spin conventions in K1 against rigid-body geometry.
#[test]
fn reconstructed_pose_velocity_matches_object_twist() {
    for (pair, q0) in [(ball_on_plane(), turntable_q()), (ball_in_bowl(), bowl_q())] {
        let omega = |t: f64| Vector3::new(0.8 - 0.3 * t, 0.4 * (2.0 * t).sin(), 1.5 * t.cos());
        let h = 1e-5;
        let path = transport_q(&pair, &q0, &omega, 20.0 * h, h);
        let hand_pose = Transform::identity();

        let pose_at = |idx: usize| {
            ContactFrames::build(&pair, &hand_pose, &path[idx].1)
                .unwrap()
                .object_pose
        };
        let mid = path.len() / 2;
        let (tm, qm) = path[mid];
        let frames = ContactFrames::build(&pair, &hand_pose, &qm).unwrap();
        let before = pose_at(mid - 1);
        let after = pose_at(mid + 1);

        let dr = (after.rotation.matrix() - before.rotation.matrix()) / (2.0 * h);
        let omega_body_hat = frames.object_pose.rotation.matrix().transpose() * dr;
        let omega_body = Vector3::new(
            omega_body_hat[(2, 1)],
            omega_body_hat[(0, 2)],
            omega_body_hat[(1, 0)],
        );
        let v_body = frames.object_pose.rotation.matrix().transpose()
            * ((after.translation - before.translation) / (2.0 * h));

        let predicted = object_twist(
            &frames,
            &Twist::zero(),
            &Twist::new(omega(tm), Vector3::zeros()),
        );
        assert!(
            (omega_body - predicted.angular).abs().max() < 1e-6,
            "angular mismatch: fd {omega_body:?} vs {:?}",
            predicted.angular
        );
        assert!(
            (v_body - predicted.linear).abs().max() < 1e-6,
            "linear mismatch: fd {v_body:?} vs {:?}",
            predicted.linear
        );
    }
}

/// Contact maintenance: transporting q by the first-order kinematics while
/// independently integrating the object pose from the twist relation keeps
/// the two bodies' contact points coincident.
#[test]
fn contact_points_stay_coincident_under_transport() {
    for (pair, q0, label) in [
        (ball_on_plane(), turntable_q(), "sphere-on-plane"),
        (ball_in_bowl(), bowl_q(), "sphere-in-bowl"),
    ] {
        let omega = |t: f64| Vector3::new(0.9 * (1.3 * t).cos(), -0.6 + 0.2 * t, 0.8 * (0.7 * t).sin());
        let hand_pose = Transform::identity();
        let h = 2e-4;
        let t_end = 1.0;
        let path = transport_q(&pair, &q0, &omega, t_end, h);

        // Independent pose integration: rigid-body kinematics driven by the
        // object twist evaluated along the transported path.
        let frames0 = ContactFrames::build(&pair, &hand_pose, &q0).unwrap();
        let mut rot = *frames0.object_pose.rotation.matrix();
        let mut pos = frames0.object_pose.translation;

        let deriv = |rot: &Matrix3<f64>, q: &ContactConfig, t: f64| {
            let frames = ContactFrames::build(&pair, &hand_pose, q).unwrap();
            let v = object_twist(
                &frames,
                &Twist::zero(),
                &Twist::new(omega(t), Vector3::zeros()),
            );
            (rot * skew(&v.angular), rot * v.linear)
        };

        for i in 0..path.len() - 1 {
            let (t, q) = path[i];
            let (_t1, q1) = path[i + 1];
            let qh = ContactConfig::from_vector(&(0.5 * (q.to_vector() + q1.to_vector())));
            // RK4 on the pose using q interpolated at half steps.
            let (k1r, k1p) = deriv(&rot, &q, t);
            let (k2r, k2p) = deriv(&(rot + h / 2.0 * k1r), &qh, t + h / 2.0);
            let (k3r, k3p) = deriv(&(rot + h / 2.0 * k2r), &qh, t + h / 2.0);
            let (k4r, k4p) = deriv(&(rot + h * k3r), &q1, t + h);
            rot += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
            pos += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        }

        // World contact point via the integrated pose and the object chart
        // versus via the hand chart.
        let q_end = path.last().unwrap().1;
        let p_obj = rot * pair.object.point(&q_end.object).unwrap() + pos;
        let p_hand = hand_pose.apply(&pair.hand.point(&q_end.hand).unwrap());
        let gap = (p_obj - p_hand).norm();
        assert!(
            gap < 1e-6,
            "{label}: contact gap {gap:e} after {t_end} s of transport"
        );
    }
}

/// Finite-difference propagation oracle for K1: displace the object by the
/// relative twist over a short interval and re-solve the contact
/// coordinates geometrically.
#[test]
fn k1_matches_geometric_contact_propagation() {
    let pair = ball_in_bowl();
    let q0 = bowl_q();
    let hand_pose = Transform::identity();
    let omega_rel = Vector3::new(0.7, -0.4, 1.1);
    let dt = 1e-6;

    let frames = ContactFrames::build(&pair, &hand_pose, &q0).unwrap();
    // Twist of the object relative to the hand, expressed in {c_h}; advance
    // the object pose by its exponential over dt.
    let t_sc = &frames.world_from_hand_contact;
    let omega_world = t_sc.rotation.apply(&omega_rel);
    let pivot = t_sc.translation;
    let angle = (omega_world * dt).norm();
    let displaced = if angle < 1e-14 {
        frames.object_pose
    } else {
        let axis = nalgebra::Unit::new_normalize(omega_world);
        let rot = nalgebra::Rotation3::from_axis_angle(&axis, angle);
        let rot = Rotation::from_matrix_unchecked(rot.into_inner());
        Transform::new(
            rot * frames.object_pose.rotation,
            rot.apply(&(frames.object_pose.translation - pivot)) + pivot,
        )
    };

    // Solve the contact coordinates for the displaced pose by Gauss-Newton
    // on tangential coincidence and normal alignment.
    let mut u = nalgebra::Vector4::new(q0.object.x, q0.object.y, q0.hand.x, q0.hand.y);
    let residual = |u: &nalgebra::Vector4<f64>| -> nalgebra::Vector4<f64> {
        let p_o = displaced.apply(&pair.object.point(&Vector2::new(u[0], u[1])).unwrap());
        let p_h = hand_pose.apply(&pair.hand.point(&Vector2::new(u[2], u[3])).unwrap());
        let frame_h = pair.hand.gauss_frame(&Vector2::new(u[2], u[3])).unwrap();
        let x_h = hand_pose.rotation.apply(&frame_h.matrix().column(0).into_owned());
        let y_h = hand_pose.rotation.apply(&frame_h.matrix().column(1).into_owned());
        let n_o = displaced.rotation.apply(
            &pair
                .object
                .gauss_frame(&Vector2::new(u[0], u[1]))
                .unwrap()
                .matrix()
                .column(2)
                .into_owned(),
        );
        let d = p_o - p_h;
        nalgebra::Vector4::new(x_h.dot(&d), y_h.dot(&d), x_h.dot(&n_o), y_h.dot(&n_o))
    };
    for _ in 0..20 {
        let r = residual(&u);
        if r.norm() < 1e-14 {
            break;
        }
        let mut jac = nalgebra::Matrix4::<f64>::zeros();
        let fd = 1e-7;
        for j in 0..4 {
            let mut up = u;
            let mut um = u;
            up[j] += fd;
            um[j] -= fd;
            jac.set_column(j, &((residual(&up) - residual(&um)) / (2.0 * fd)));
        }
        u -= jac.lu().solve(&r).unwrap();
    }

    // Spin angle from the x-axes: psi is the azimuth of x_co measured from
    // x_ch about the hand contact normal.
    let frame_h = pair.hand.gauss_frame(&Vector2::new(u[2], u[3])).unwrap();
    let x_h = hand_pose.rotation.apply(&frame_h.matrix().column(0).into_owned());
    let y_h = hand_pose.rotation.apply(&frame_h.matrix().column(1).into_owned());
    let x_o = displaced.rotation.apply(
        &pair
            .object
            .gauss_frame(&Vector2::new(u[0], u[1]))
            .unwrap()
            .matrix()
            .column(0)
            .into_owned(),
    );
    let psi = (x_o.dot(&y_h)).atan2(x_o.dot(&x_h));

    let qdot_fd = Vector5::new(
        (u[0] - q0.object.x) / dt,
        (u[1] - q0.object.y) / dt,
        (u[2] - q0.hand.x) / dt,
        (u[3] - q0.hand.y) / dt,
        (psi - q0.spin) / dt,
    );
    let qdot = first_order_qdot(&pair, &q0, &omega_rel).unwrap().to_vector();
    assert!(
        (qdot_fd - qdot).abs().max() < 1e-4,
        "fd {qdot_fd:?} vs K1 {qdot:?}"
    );
}

/// Second-order kinematics against finite differences of the first-order
/// transport, with the relative acceleration slots taken from the
/// component derivative of the prescribed omega program and the rolling
/// constraint.
#[test]
fn qddot_matches_finite_difference_of_transport() {
    for (pair, q0) in [(ball_on_plane(), turntable_q()), (ball_in_bowl(), bowl_q())] {
        let omega = |t: f64| {
            Vector3::new(
                0.9 - 0.5 * t + 0.3 * (3.0 * t).sin(),
                -0.4 + 0.8 * t,
                1.2 * (2.0 * t).cos(),
            )
        };
        let domega = |t: f64| {
            Vector3::new(
                -0.5 + 0.9 * (3.0 * t).cos(),
                0.8,
                -2.4 * (2.0 * t).sin(),
            )
        };
        let h = 1e-5;
        let path = transport_q(&pair, &q0, &omega, 40.0 * h, h);
        let mid = path.len() / 2;
        let (tm, qm) = path[mid];

        let rates_at = |idx: usize| {
            let (t, q) = path[idx];
            first_order_qdot(&pair, &q, &omega(t)).unwrap().to_vector()
        };
        let qddot_fd = (rates_at(mid + 1) - rates_at(mid - 1)) / (2.0 * h);

        let rates = first_order_qdot(&pair, &qm, &omega(tm)).unwrap();
        let a_roll = rolling_accel_constraint(&pair, &qm, &rates).unwrap();
        let alpha = domega(tm);
        let dv_rel = Vector6::new(alpha.x, alpha.y, alpha.z, a_roll.x, a_roll.y, a_roll.z);
        let qddot = second_order_qddot(&pair, &qm, &rates, &dv_rel).unwrap();

        assert!(
            (qddot_fd - qddot).abs().max() < 1e-4,
            "fd {qddot_fd:?} vs K2+K3 {qddot:?}"
        );
    }
}

/// The rolling acceleration constraint equals the relative acceleration of
/// the two coincident contact material points (computed by finite
/// differences of their world trajectories), expressed in the hand contact
/// frame.
#[test]
fn rolling_accel_matches_material_point_acceleration() {
    let pair = ball_in_bowl();
    let q0 = bowl_q();
    // Hand spinning about a skew axis to exercise the moving-hand terms.
    let hand_omega = Vector3::new(0.4, -0.3, 1.2);
    let hand_pose_at = |t: f64| {
        let angle = hand_omega.norm() * t;
        let axis = nalgebra::Unit::new_normalize(hand_omega);
        Transform::new(
            Rotation::from_matrix_unchecked(
                nalgebra::Rotation3::from_axis_angle(&axis, angle).into_inner(),
            ),
            Vector3::new(0.02 * t, -0.03 * t, 0.01 * t * t),
        )
    };

    let omega_rel = |_t: f64| Vector3::new(0.8, -0.5, 0.9);
    let h = 1e-5;

    // Transport q under a static-hand formulation: the contact coordinates
    // evolve identically regardless of the hand's rigid motion (the
    // kinematics are relative), so reuse the plain transport.
    let path = transport_q(&pair, &q0, &omega_rel, 20.0 * h, h);
    let mid = path.len() / 2;
    let (tm, qm) = path[mid];

    // Material points fixed at the mid-time contact.
    let m_o = pair.object.point(&qm.object).unwrap();
    let m_h = pair.hand.point(&qm.hand).unwrap();

    let world_obj = |idx: usize| {
        let (t, q) = path[idx];
        let frames = ContactFrames::build(&pair, &hand_pose_at(t), &q).unwrap();
        frames.object_pose.apply(&m_o)
    };
    let world_hand = |idx: usize| {
        let (t, _q) = path[idx];
        hand_pose_at(t).apply(&m_h)
    };

    let acc = |f: &dyn Fn(usize) -> Vector3<f64>| {
        (f(mid + 1) - 2.0 * f(mid) + f(mid - 1)) / (h * h)
    };
    let rel_acc_world = acc(&world_obj) - acc(&world_hand);
    let frames = ContactFrames::build(&pair, &hand_pose_at(tm), &qm).unwrap();
    let rel_acc_contact = frames
        .world_from_hand_contact
        .rotation
        .transpose()
        .apply(&rel_acc_world);

    let rates = first_order_qdot(&pair, &qm, &omega_rel(tm)).unwrap();
    let a_roll = rolling_accel_constraint(&pair, &qm, &rates).unwrap();
    assert!(
        (rel_acc_contact - a_roll).abs().max() < 1e-4,
        "material fd {rel_acc_contact:?} vs a_roll {a_roll:?}"
    );

    // Cross-product form of the same constraint: -omega_rel x v_c with v_c
    // the contact-locus velocity relative to the hand.
    let kin = ContactKinematics::new(&pair, &qm).unwrap();
    let v_c3 = {
        let v = kin.hand.sqrt_metric() * rates.hand;
        Vector3::new(v.x, v.y, 0.0)
    };
    let cross_form = -omega_rel(tm).cross(&v_c3);
    assert!((cross_form - a_roll).abs().max() < 1e-10);
}

#[test]
fn rolling_accel_zero_cases() {
    let pair = ball_on_plane();
    let q = turntable_q();
    // Zero rates give zero constraint.
    let a = rolling_accel_constraint(&pair, &q, &ContactRates::zero()).unwrap();
    assert_eq!(a, Vector3::zeros());

    // With w_z = 0 the tangential components vanish exactly.
    let kin = ContactKinematics::new(&pair, &q).unwrap();
    let rates = kin.rates_from_omega(&Vector3::new(0.6, -0.9, 0.0));
    let a = rolling_accel_constraint(&pair, &q, &rates).unwrap();
    assert_eq!(a.x, 0.0);
    assert_eq!(a.y, 0.0);
}

#[test]
fn pure_rolling_alpha_z_vanishes_for_sphere_on_plane() {
    let pair = ball_on_plane();
    for (qo, qh, psi, w) in [
        (Vector2::new(1.2, 0.4), Vector2::new(0.1, -0.2), 0.7, Vector2::new(0.5, -0.8)),
        (Vector2::new(2.0, -1.0), Vector2::new(-0.3, 0.5), -1.2, Vector2::new(-0.1, 0.9)),
        (Vector2::new(0.9, 2.2), Vector2::new(0.4, 0.0), 2.9, Vector2::new(1.5, 0.2)),
    ] {
        let q = ContactConfig::new(qo, qh, psi);
        let kin = ContactKinematics::new(&pair, &q).unwrap();
        let rates = kin.rates_from_omega(&Vector3::new(w.x, w.y, 0.0));
        let az = pure_rolling_alpha_z(&pair, &q, &rates).unwrap();
        assert!(az.abs() < 1e-12, "alpha_z = {az} at {q:?}");
    }

    // Zero rates trivially give zero.
    let q = turntable_q();
    let az = pure_rolling_alpha_z(&pair, &q, &ContactRates::zero()).unwrap();
    assert_eq!(az, 0.0);

    // Spinning states are rejected.
    let kin = ContactKinematics::new(&pair, &q).unwrap();
    let spinning = kin.rates_from_omega(&Vector3::new(0.1, 0.0, 2.0));
    assert!(pure_rolling_alpha_z(&pair, &q, &spinning).is_err());
}

/// Kinematic regression for the pure-rolling spin constraint: transporting
/// (q, q_dot) with the second-order kinematics and the derivative-consistent
/// alpha_z keeps w_z at zero on a curved-on-curved pair, while the alpha_z=0
/// shortcut lets it drift.
#[test]
fn pure_rolling_spin_preserved_only_with_consistent_alpha_z() {
    let pair = SurfacePair {
        object: make_sphere(0.05).unwrap(),
        hand: make_ellipsoid_bowl(Vector3::new(0.3, 0.3, 0.2)).unwrap(),
    };
    let q0 = bowl_q();
    let kin0 = ContactKinematics::new(&pair, &q0).unwrap();
    let rates0 = kin0.rates_from_omega(&Vector3::new(1.4, -0.9, 0.0));

    let run = |consistent: bool| -> f64 {
        // State: (q, q_dot) as a 10-vector; alpha_xy driven by a smooth
        // program, alpha_z per the selected rule, a = a_roll.
        let mut y = [0.0f64; 10];
        y[..5].copy_from_slice(q0.to_vector().as_slice());
        y[5..].copy_from_slice(rates0.to_vector().as_slice());
        let f = |t: f64, y: &[f64; 10]| -> [f64; 10] {
            let q = ContactConfig::from_vector(&Vector5::from_column_slice(&y[..5]));
            let rates = ContactRates::from_vector(&Vector5::from_column_slice(&y[5..]));
            let kin = ContactKinematics::new(&pair, &q).unwrap();
            let omega = kin.omega_from_rates(&rates).unwrap();
            let a_roll = kin.rolling_accel(&rates, &omega);
            let alpha_z = if consistent {
                rolling_core::contact::pure_rolling_alpha_z_unchecked(&kin, &rates, &omega)
            } else {
                0.0
            };
            let alpha = Vector3::new(0.8 * (2.0 * t).cos(), -0.6 * (1.1 * t).sin(), alpha_z);
            let dv = Vector6::new(alpha.x, alpha.y, alpha.z, a_roll.x, a_roll.y, a_roll.z);
            let qdd = kin.qddot(&rates, &omega, &dv).unwrap();
            let mut dy = [0.0f64; 10];
            dy[..5].copy_from_slice(&y[5..]);
            dy[5..].copy_from_slice(qdd.as_slice());
            dy
        };
        let h = 1e-4;
        let mut t = 0.0;
        let mut max_wz: f64 = 0.0;
        let add = |a: &[f64; 10], b: &[f64; 10], s: f64| {
            let mut out = *a;
            for i in 0..10 {
                out[i] += s * b[i];
            }
            out
        };
        for _ in 0..10_000 {
            let k1v = f(t, &y);
            let k2v = f(t + h / 2.0, &add(&y, &k1v, h / 2.0));
            let k3v = f(t + h / 2.0, &add(&y, &k2v, h / 2.0));
            let k4v = f(t + h, &add(&y, &k3v, h));
            for i in 0..10 {
                y[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
            }
            t += h;
            let q = ContactConfig::from_vector(&Vector5::from_column_slice(&y[..5]));
            let rates = ContactRates::from_vector(&Vector5::from_column_slice(&y[5..]));
            let kin = ContactKinematics::new(&pair, &q).unwrap();
            max_wz = max_wz.max(kin.spin_velocity(&rates).abs());
        }
        max_wz
    };

    let drift_consistent = run(true);
    let drift_zero = run(false);
    assert!(
        drift_consistent < 1e-8,
        "consistent alpha_z lets w_z drift to {drift_consistent:e}"
    );
    assert!(
        drift_zero > 100.0 * drift_consistent.max(1e-12),
        "alpha_z = 0 unexpectedly holds w_z at {drift_zero:e}"
    );
}

/// Kinematics are invariant under a full-turn spin offset.
#[test]
fn spin_wrap_invariance() {
    let pair = ball_in_bowl();
    let q = bowl_q();
    let mut q_wrapped = q;
    q_wrapped.spin += 2.0 * core::f64::consts::PI;
    let m0 = k1(&pair, &q).unwrap();
    let m1 = k1(&pair, &q_wrapped).unwrap();
    assert!((m0 - m1).abs().max() < 1e-12);

    let kin = ContactKinematics::new(&pair, &q).unwrap();
    let rates = kin.rates_from_omega(&Vector3::new(0.3, 0.7, -0.2));
    let a0 = rolling_accel_constraint(&pair, &q, &rates).unwrap();
    let a1 = rolling_accel_constraint(&pair, &q_wrapped, &rates).unwrap();
    assert!((a0 - a1).abs().max() < 1e-12);

    assert!((ContactConfig::new(Vector2::zeros(), Vector2::zeros(), 3.0 * core::f64::consts::PI)
        .wrapped_spin()
        - core::f64::consts::PI)
        .abs()
        < 1e-12);
}

/// The spin row of the second-order kinematics reproduces the explicit
/// expression assembled independently from the geometry arrays.
#[test]
fn psi_ddot_row_matches_direct_expression() {
    let pair = ball_in_bowl();
    let q = bowl_q();
    let kin = ContactKinematics::new(&pair, &q).unwrap();
    let omega = Vector3::new(0.5, -1.1, 0.8);
    let rates = kin.rates_from_omega(&omega);
    let a_roll = kin.rolling_accel(&rates, &omega);
    let alpha = Vector3::new(0.3, -0.7, 0.25);
    let dv = Vector6::new(alpha.x, alpha.y, alpha.z, a_roll.x, a_roll.y, a_roll.z);
    let qdd = kin.qddot(&rates, &omega, &dv).unwrap();

    // Independent assembly of the psi row from the geometry fields.
    let e1 = nalgebra::Matrix2::new(0.0, -1.0, 1.0, 0.0);
    let w_vec = nalgebra::RowVector2::new(omega.y, -omega.x);
    let l_term = (w_vec
        * (kin.spin_reflection * e1 * kin.object.inv_sqrt_metric())
        * kin.object.second_fundamental
        * rates.object)[0];
    let quad = |u: &Vector2<f64>| Vector3::new(u.x * u.x, u.x * u.y, u.y * u.y);
    let gbb = (kin.object.sigma * kin.object.gamma_bbar * quad(&rates.object))[0]
        + (kin.hand.sigma * kin.hand.gamma_bbar * quad(&rates.hand))[0];
    let couple = (kin.object.sigma * kin.object.gamma * Vector2::new(qdd[0], qdd[1]))[0]
        + (kin.hand.sigma * kin.hand.gamma * Vector2::new(qdd[2], qdd[3]))[0];
    let psi_direct = l_term - gbb - couple + alpha.z;
    assert!(
        (qdd[4] - psi_direct).abs() < 1e-10,
        "psi row {} vs direct {psi_direct}",
        qdd[4]
    );
}
