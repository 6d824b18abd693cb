use nalgebra::{Vector2, Vector3, Vector5, Vector6};
use rolling_core::contact::*;
use rolling_core::surface::{make_ellipsoid_bowl, make_sphere};

fn main() {
    let pair = SurfacePair { object: make_sphere(0.05).unwrap(), hand: make_ellipsoid_bowl(Vector3::new(0.3,0.3,0.2)).unwrap() };
    let q0 = ContactConfig::new(Vector2::new(1.1, 0.4), Vector2::new(core::f64::consts::PI - 0.6, 0.2), 0.3);
    let omega = |t: f64| Vector3::new(0.9 - 0.5*t + 0.3*(3.0*t).sin(), -0.4 + 0.8*t, 1.2*(2.0*t).cos());
    let domega = |t: f64| Vector3::new(-0.5 + 0.9*(3.0*t).cos(), 0.8, -2.4*(2.0*t).sin());

    let f = |t: f64, q: &Vector5<f64>| -> Vector5<f64> {
        let cfg = ContactConfig::from_vector(q);
        first_order_qdot(&pair, &cfg, &omega(t)).unwrap().to_vector()
    };
    let h = 1e-5;
    let mut q = q0.to_vector();
    let mut t = 0.0;
    let mut path = vec![(t, q)];
    for _ in 0..40 {
        let k1v = f(t, &q); let k2v = f(t+h/2.0, &(q+h/2.0*k1v));
        let k3v = f(t+h/2.0, &(q+h/2.0*k2v)); let k4v = f(t+h, &(q+h*k3v));
        q += h/6.0*(k1v+2.0*k2v+2.0*k3v+k4v); t += h;
        path.push((t, q));
    }
    let mid = 20;
    let (tm, qm) = path[mid];
    let qm_cfg = ContactConfig::from_vector(&qm);
    let rates_at = |i: usize| { let (t, q) = path[i]; f(t, &q) };
    let qdd_fd = (rates_at(mid+1) - rates_at(mid-1)) / (2.0*h);

    let kin = ContactKinematics::new(&pair, &qm_cfg).unwrap();
    let rates = ContactRates::from_vector(&rates_at(mid));
    let w = kin.omega_from_rates(&rates).unwrap();
    let a_roll = kin.rolling_accel(&rates, &w);
    let w_surf = kin.hand_frame_transport_rate(&rates);
    let alpha = domega(tm) + w_surf.cross(&w);
    let dv = Vector6::new(alpha.x, alpha.y, alpha.z, a_roll.x, a_roll.y, a_roll.z);
    let qdd = kin.qddot(&rates, &w, &dv).unwrap();
    println!("fd  = {:?}", qdd_fd.transpose());
    println!("kin = {:?}", qdd.transpose());
    println!("max diff = {:e}", (qdd_fd - qdd).abs().max());
}
