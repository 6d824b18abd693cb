//! Closed-form reference solutions and finite-difference utilities used by
//! tests and validation runs.
//!
//! The turntable family covers a solid homogeneous sphere rolling without
//! slip on a plate spinning at constant rate: on a horizontal plate the
//! contact point orbits a circle at `(2/7)` of the plate rate; tilting the
//! plate adds a uniform drift `(5/2)(g / w_plate) sin(theta)` perpendicular
//! to the in-plane gravity component.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector, Vector2, Vector3};

use crate::dynamics::ObjectModel;
#[allow(unused_imports)]
use crate::real::FloatExt as _;

/// Errors from oracle construction.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// A parameter was outside the oracle's validity domain.
    Parameter(&'static str),
    /// Function evaluation failed inside a finite-difference stencil.
    Evaluation,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Parameter(s) => write!(f, "invalid oracle parameter: {s}"),
            OracleError::Evaluation => write!(f, "function evaluation failed in stencil"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for OracleError {}

/// The analytic circular orbit of the ball-on-turntable solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurntableOrbit {
    /// Angular rate of the contact point about the orbit center, rad/s.
    pub orbit_rate: f64,
    /// Orbit center in the plate plane, m.
    pub center: Vector2<f64>,
    /// Orbit radius, m.
    pub radius: f64,
}

impl TurntableOrbit {
    /// Orbit period, s.
    pub fn period(&self) -> f64 {
        2.0 * core::f64::consts::PI / self.orbit_rate.abs()
    }

    /// Contact-point position at time `t` given its position at `t = 0`.
    pub fn contact_at(&self, contact0: &Vector2<f64>, t: f64) -> Vector2<f64> {
        let r = contact0 - self.center;
        let (s, c) = ((self.orbit_rate * t).sin(), (self.orbit_rate * t).cos());
        self.center + Vector2::new(c * r.x - s * r.y, s * r.x + c * r.y)
    }
}

/// Relative inertia tolerance for [`require_homogeneous_sphere`].
pub const SPHERE_INERTIA_TOL: f64 = 1e-9;

/// The turntable solutions assume a solid homogeneous sphere
/// (`J = (2/5) m rho^2 I`); anything else silently breaks the 2/7 and 5/2
/// factors, so validation refuses it.
pub fn require_homogeneous_sphere(
    model: &ObjectModel,
    radius: f64,
) -> Result<(), OracleError> {
    let expected = 0.4 * model.mass * radius * radius;
    for j in [model.inertia.x, model.inertia.y, model.inertia.z] {
        if ((j - expected) / expected).abs() > SPHERE_INERTIA_TOL {
            return Err(OracleError::Parameter(
                "turntable oracle requires a solid homogeneous sphere (J = 2/5 m rho^2)",
            ));
        }
    }
    Ok(())
}

/// Circular orbit of a homogeneous sphere on a horizontal plate spinning at
/// `omega_plate`, from the initial contact position and ball center
/// velocity (both in the plate plane at `t = 0`).
pub fn horizontal_orbit(
    omega_plate: f64,
    contact0: &Vector2<f64>,
    velocity0: &Vector2<f64>,
) -> Result<TurntableOrbit, OracleError> {
    if omega_plate == 0.0 {
        return Err(OracleError::Parameter("plate rate must be nonzero"));
    }
    let orbit_rate = 2.0 / 7.0 * omega_plate;
    // center = contact0 - v0 x (0, 0, 1/w_c)
    let v3 = Vector3::new(velocity0.x, velocity0.y, 0.0);
    let offset = v3.cross(&Vector3::new(0.0, 0.0, 1.0 / orbit_rate));
    let center = contact0 - Vector2::new(offset.x, offset.y);
    Ok(TurntableOrbit {
        orbit_rate,
        center,
        radius: (contact0 - center).norm(),
    })
}

/// Uniform drift speed of the orbit center on a plate tilted by `theta`:
/// `(5/2)(g / omega_plate) sin(theta)`.
pub fn tilted_drift(omega_plate: f64, theta: f64, gravity: f64) -> Result<f64, OracleError> {
    if omega_plate == 0.0 {
        return Err(OracleError::Parameter("plate rate must be nonzero"));
    }
    Ok(2.5 * gravity / omega_plate * theta.sin())
}

/// Central-difference Jacobian of `f` at `x0` with the given step,
/// `O(step^2)` accurate.
pub fn finite_difference_jacobian(
    f: &mut dyn FnMut(&DVector<f64>) -> Option<DVector<f64>>,
    x0: &DVector<f64>,
    step: f64,
) -> Result<DMatrix<f64>, OracleError> {
    let n = x0.len();
    let probe = f(x0).ok_or(OracleError::Evaluation)?;
    let m = probe.len();
    let mut jac = DMatrix::zeros(m, n);
    for j in 0..n {
        let mut xp = x0.clone();
        let mut xm = x0.clone();
        xp[j] += step;
        xm[j] -= step;
        let fp = f(&xp).ok_or(OracleError::Evaluation)?;
        let fm = f(&xm).ok_or(OracleError::Evaluation)?;
        jac.set_column(j, &((fp - fm) / (2.0 * step)));
    }
    Ok(jac)
}

/// Least-squares circle fit to planar points (algebraic / Kasa fit).
/// Returns `(center, radius)`.
pub fn fit_circle(points: &[Vector2<f64>]) -> Option<(Vector2<f64>, f64)> {
    if points.len() < 3 {
        return None;
    }
    // Minimize |p|^2 + b . p + c over (b, c); center = -b/2,
    // radius^2 = |center|^2 - c.
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut atb = Vector3::zeros();
    for p in points {
        let row = Vector3::new(p.x, p.y, 1.0);
        let rhs = -(p.x * p.x + p.y * p.y);
        ata += row * row.transpose();
        atb += row * rhs;
    }
    let sol = ata.lu().solve(&atb)?;
    let center = Vector2::new(-sol.x / 2.0, -sol.y / 2.0);
    let r2 = center.norm_squared() - sol.z;
    if r2 < 0.0 {
        return None;
    }
    Some((center, r2.sqrt()))
}

/// Linear least-squares slope and intercept of `y(t)`; used to estimate
/// orbit periods from unwrapped phase angles.
pub fn fit_line(ts: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    if ts.len() != ys.len() || ts.len() < 2 {
        return None;
    }
    let n = ts.len() as f64;
    let st: f64 = ts.iter().sum();
    let sy: f64 = ys.iter().sum();
    let stt: f64 = ts.iter().map(|t| t * t).sum();
    let sty: f64 = ts.iter().zip(ys).map(|(t, y)| t * y).sum();
    let denom = n * stt - st * st;
    if denom.abs() < 1e-30 {
        return None;
    }
    let slope = (n * sty - st * sy) / denom;
    let intercept = (sy - slope * st) / n;
    Some((slope, intercept))
}

/// Unwraps a sequence of angles so consecutive samples never jump by more
/// than pi.
pub fn unwrap_angles(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len());
    let mut offset = 0.0;
    for (i, &a) in angles.iter().enumerate() {
        if i > 0 {
            let prev = out[i - 1] - offset;
            let mut d = a - prev;
            while d > core::f64::consts::PI {
                d -= 2.0 * core::f64::consts::PI;
                offset -= 2.0 * core::f64::consts::PI;
            }
            while d < -core::f64::consts::PI {
                d += 2.0 * core::f64::consts::PI;
                offset += 2.0 * core::f64::consts::PI;
            }
        }
        out.push(a + offset);
    }
    out
}
