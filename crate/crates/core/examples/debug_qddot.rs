use nalgebra::{Vector2, Vector3, Vector6};
use rolling_core::contact::*;
use rolling_core::surface::{make_plane, make_sphere};

fn main() {
    let pair = SurfacePair { object: make_sphere(0.2).unwrap(), hand: make_plane() };
    let q = ContactConfig::new(Vector2::new(core::f64::consts::FRAC_PI_2, 0.0), Vector2::zeros(), 0.0);
    let kin = ContactKinematics::new(&pair, &q).unwrap();
    let omega = Vector3::new(1.0, 0.0, -7.0);
    let rates = kin.rates_from_omega(&omega);
    println!("rates = {:?}", rates.to_vector().transpose());
    // moving-frame alpha for the true turntable motion, and a_roll
    let alpha = Vector3::new(0.0, -12.0, 0.0);
    let a_roll = kin.rolling_accel(&rates, &omega);
    println!("a_roll = {:?} (expect 1.4, 0, 0.2)", a_roll.transpose());
    let dv = Vector6::new(alpha.x, alpha.y, alpha.z, a_roll.x, a_roll.y, a_roll.z);
    let qdd = kin.qddot(&rates, &omega, &dv).unwrap();
    println!("qddot  = {:?}", qdd.transpose());
    println!("expect = (-5, 0, -2.4, 0, 0)");
}
