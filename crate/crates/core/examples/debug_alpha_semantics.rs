use nalgebra::{Matrix2, Matrix4, Vector2, Vector3, Vector4, Vector5, Vector6};
use rolling_core::contact::*;
use rolling_core::geom3d::Transform;
use rolling_core::surface::{make_plane, make_sphere};

fn main() {
    let pair = SurfacePair { object: make_sphere(0.2).unwrap(), hand: make_plane() };
    let q0 = ContactConfig::new(Vector2::new(core::f64::consts::FRAC_PI_2, 0.0), Vector2::zeros(), 0.0);
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
    println!("qdd_fd = {:?}", qdd_fd.transpose());

    let kin = ContactKinematics::new(&pair, &qm_cfg).unwrap();
    let rates = ContactRates::from_vector(&rates_at(mid));
    let w = kin.omega_from_rates(&rates).unwrap();
    println!("omega(tm) prescribed = {:?}, recovered = {:?}", omega(tm).transpose(), w.transpose());
    let a_roll = kin.rolling_accel(&rates, &w);

    // K2a alone: qddot with dv_rel = (0, a_roll)? no: qddot(alpha=0, a=0) = K2 only
    let k2 = kin.qddot(&rates, &w, &Vector6::zeros()).unwrap();
    // required accel contribution in uddot rows:
    let need = Vector4::new(qdd_fd[0]-k2[0], qdd_fd[1]-k2[1], qdd_fd[2]-k2[2], qdd_fd[3]-k2[3]);
    // M * need = (-ax, -ay, ax_, ay_)
    // Rebuild M from kin pieces:
    let e1 = Matrix2::new(0.0,-1.0,1.0,0.0);
    let a_blk = kin.spin_reflection * kin.object.sqrt_metric();
    let b_blk = -kin.hand.sqrt_metric();
    let c_blk = kin.spin_reflection * e1 * kin.object.curvature * kin.object.sqrt_metric();
    let d_blk = -(e1 * kin.hand.curvature * kin.hand.sqrt_metric());
    let mut m = Matrix4::<f64>::zeros();
    m.fixed_view_mut::<2,2>(0,0).copy_from(&a_blk);
    m.fixed_view_mut::<2,2>(0,2).copy_from(&b_blk);
    m.fixed_view_mut::<2,2>(2,0).copy_from(&c_blk);
    m.fixed_view_mut::<2,2>(2,2).copy_from(&d_blk);
    let chan = m * need;
    println!("required (-ax,-ay,ax,ay) = {:?}", chan.transpose());
    println!("a_roll                  = {:?}", a_roll.transpose());
    println!("domega(tm) (component)  = {:?}", domega(tm).transpose());
}
