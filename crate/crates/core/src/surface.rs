//! Orthogonally parameterized smooth surfaces and their local geometry.
//!
//! A chart maps `(u, v)` to a point of the body surface expressed in the body
//! frame and supplies closed-form partial derivatives through third order,
//! which is what the second-order contact kinematics needs (contact frame
//! from first derivatives, curvature from second, curvature derivative from
//! third). Charts must be orthogonal: the coordinate tangents `F_u` and `F_v`
//! are perpendicular everywhere; construction samples the domain to enforce
//! this.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;

use nalgebra::{Matrix2, Matrix2x3, Matrix3, RowVector2, RowVector3, Vector2, Vector3};

use crate::geom3d::Rotation;
#[allow(unused_imports)]
use crate::real::FloatExt as _;

/// Relative orthogonality tolerance `|g12| / ||G||` accepted at construction.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;

/// Default margin (in chart units) kept away from domain boundaries.
pub const DEFAULT_SINGULARITY_MARGIN: f64 = 1e-3;

/// Errors from chart construction and geometry queries.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceError {
    /// A query landed outside the admissible (margin-shrunk) domain.
    Domain {
        coord: Vector2<f64>,
        detail: String,
    },
    /// The chart failed a geometric validity check.
    Geometry(String),
    /// A constructor was handed invalid dimensions.
    Parameter(String),
}

impl fmt::Display for SurfaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceError::Domain { coord, detail } => {
                write!(f, "({}, {}) outside chart domain: {detail}", coord.x, coord.y)
            }
            SurfaceError::Geometry(s) => write!(f, "invalid surface geometry: {s}"),
            SurfaceError::Parameter(s) => write!(f, "invalid surface parameter: {s}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SurfaceError {}

/// Value and partial derivatives of a chart at one point, through third
/// order.
#[derive(Debug, Clone, Copy)]
pub struct ChartJet {
    pub f: Vector3<f64>,
    pub fu: Vector3<f64>,
    pub fv: Vector3<f64>,
    pub fuu: Vector3<f64>,
    pub fuv: Vector3<f64>,
    pub fvv: Vector3<f64>,
    pub fuuu: Vector3<f64>,
    pub fuuv: Vector3<f64>,
    pub fuvv: Vector3<f64>,
    pub fvvv: Vector3<f64>,
}

/// One chart axis: either a bounded interval (excluding endpoints) or the
/// whole real line (periodic or unbounded coordinates).
#[derive(Debug, Clone, Copy)]
pub enum AxisDomain {
    Interval { lo: f64, hi: f64 },
    Unbounded,
}

impl AxisDomain {
    fn contains(&self, x: f64, margin: f64) -> bool {
        match *self {
            AxisDomain::Interval { lo, hi } => x >= lo + margin && x <= hi - margin,
            AxisDomain::Unbounded => x.is_finite(),
        }
    }

    /// Margin-shrunk bounds, if the axis is bounded.
    pub fn bounds(&self, margin: f64) -> Option<(f64, f64)> {
        match *self {
            AxisDomain::Interval { lo, hi } => Some((lo + margin, hi - margin)),
            AxisDomain::Unbounded => None,
        }
    }
}

/// The chart evaluation interface implemented by each analytic surface.
pub trait ChartMap: Send + Sync {
    fn jet(&self, u: &Vector2<f64>) -> ChartJet;
    fn domain(&self) -> [AxisDomain; 2];
    /// A short human-readable description (used in diagnostics).
    fn describe(&self) -> String;
}

/// A validated, immutable orthogonal chart.
#[derive(Clone)]
pub struct SurfaceChart {
    map: Arc<dyn ChartMap>,
    domain: [AxisDomain; 2],
    margin: f64,
}

impl fmt::Debug for SurfaceChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SurfaceChart({})", self.map.describe())
    }
}

impl SurfaceChart {
    /// Wraps a chart map, sampling a 32x32 grid of the domain to verify
    /// orthogonality and nondegenerate tangents.
    pub fn new(map: Box<dyn ChartMap>, margin: f64) -> Result<Self, SurfaceError> {
        let domain = map.domain();
        let chart = SurfaceChart {
            map: Arc::from(map),
            domain,
            margin,
        };
        chart.validate_orthogonality()?;
        Ok(chart)
    }

    fn sample_axis(&self, axis: usize, i: usize, n: usize) -> f64 {
        let frac = (i as f64 + 0.5) / n as f64;
        match self.domain[axis] {
            AxisDomain::Interval { lo, hi } => {
                let lo = lo + self.margin;
                let hi = hi - self.margin;
                lo + frac * (hi - lo)
            }
            // Periodic/unbounded axes: sample one full turn.
            AxisDomain::Unbounded => -core::f64::consts::PI + frac * 2.0 * core::f64::consts::PI,
        }
    }

    fn validate_orthogonality(&self) -> Result<(), SurfaceError> {
        const N: usize = 32;
        for i in 0..N {
            for j in 0..N {
                let u = Vector2::new(self.sample_axis(0, i, N), self.sample_axis(1, j, N));
                let jet = self.map.jet(&u);
                let g11 = jet.fu.dot(&jet.fu);
                let g22 = jet.fv.dot(&jet.fv);
                let g12 = jet.fu.dot(&jet.fv);
                let scale = g11.max(g22);
                if g11.sqrt() <= 1e-9 || g22.sqrt() <= 1e-9 {
                    return Err(SurfaceError::Geometry(format!(
                        "degenerate tangent at ({}, {}) in {}",
                        u.x,
                        u.y,
                        self.map.describe()
                    )));
                }
                if g12.abs() / scale > ORTHOGONALITY_TOL {
                    return Err(SurfaceError::Geometry(format!(
                        "chart {} is not orthogonal: g12/||G|| = {:e} at ({}, {})",
                        self.map.describe(),
                        g12 / scale,
                        u.x,
                        u.y
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn domain(&self) -> &[AxisDomain; 2] {
        &self.domain
    }

    pub fn describe(&self) -> String {
        self.map.describe()
    }

    /// True when `u` lies inside the margin-shrunk domain.
    pub fn contains(&self, u: &Vector2<f64>) -> bool {
        self.domain[0].contains(u.x, self.margin) && self.domain[1].contains(u.y, self.margin)
    }

    fn check_domain(&self, u: &Vector2<f64>) -> Result<(), SurfaceError> {
        if self.contains(u) {
            Ok(())
        } else {
            Err(SurfaceError::Domain {
                coord: *u,
                detail: self.map.describe(),
            })
        }
    }

    /// Chart point in the body frame.
    pub fn point(&self, u: &Vector2<f64>) -> Result<Vector3<f64>, SurfaceError> {
        self.check_domain(u)?;
        Ok(self.map.jet(u).f)
    }

    /// Raw jet without a domain check (used by finite-difference oracles that
    /// probe just past the margin).
    pub fn jet_unchecked(&self, u: &Vector2<f64>) -> ChartJet {
        self.map.jet(u)
    }

    /// The normalized Gauss frame at `u`: columns are the unit tangents along
    /// increasing `u` and `v` and the unit normal `x_c cross y_c`.
    pub fn gauss_frame(&self, u: &Vector2<f64>) -> Result<Rotation, SurfaceError> {
        self.check_domain(u)?;
        let jet = self.map.jet(u);
        Ok(gauss_frame_from_jet(&jet))
    }

    /// All local-geometry quantities at `u`.
    pub fn local_geometry(&self, u: &Vector2<f64>) -> Result<LocalGeometry, SurfaceError> {
        self.check_domain(u)?;
        LocalGeometry::from_jet(&self.map.jet(u))
    }

    /// [`Self::local_geometry`] without the margin check. Integration
    /// internals use this so that transient stage evaluations just past the
    /// margin do not abort a step; admissibility is enforced on accepted
    /// states instead.
    pub fn local_geometry_unchecked(&self, u: &Vector2<f64>) -> Result<LocalGeometry, SurfaceError> {
        LocalGeometry::from_jet(&self.map.jet(u))
    }

    /// [`Self::gauss_frame`] without the margin check.
    pub fn gauss_frame_unchecked(&self, u: &Vector2<f64>) -> Rotation {
        gauss_frame_from_jet(&self.map.jet(u))
    }
}

fn gauss_frame_from_jet(jet: &ChartJet) -> Rotation {
    let xc = jet.fu / jet.fu.norm();
    let yc = jet.fv / jet.fv.norm();
    let n = jet.fu.cross(&jet.fv);
    let n = n / n.norm();
    Rotation::from_matrix_unchecked(Matrix3::from_columns(&[xc, yc, n]))
}

/// First- and second-order surface descriptors plus the third-order arrays
/// used by the second-order kinematics.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    /// Gauss frame `R_{i c_i}` (chart axes and outward normal, body frame).
    pub gauss_rotation: Rotation,
    /// Metric tensor (diagonal for orthogonal charts), m^2.
    pub metric: Matrix2<f64>,
    /// Second fundamental form, m.
    pub second_fundamental: Matrix2<f64>,
    /// Normalized curvature `H = sqrt(G)^-1 L sqrt(G)^-1`, 1/m.
    pub curvature: Matrix2<f64>,
    /// `sigma = sqrt(g22 / g11)`.
    pub sigma: f64,
    /// `[Gamma^2_11, Gamma^2_12]`.
    pub gamma: RowVector2<f64>,
    /// `[[G^1_11, 2 G^1_12, G^1_22], [G^2_11, 2 G^2_12, G^2_22]]`.
    pub gamma_bar: Matrix2x3<f64>,
    /// `[L11, 2 L12, L22]`.
    pub ell_bar: RowVector3<f64>,
    /// Quadratic-velocity coefficients of `d/dt (sigma Gamma u_dot)`.
    pub gamma_bbar: RowVector3<f64>,
    /// Quadratic-velocity coefficients of the curvature transport terms.
    pub ell_bbar: Matrix2x3<f64>,
}

impl LocalGeometry {
    /// Computes every field from a chart jet.
    pub fn from_jet(jet: &ChartJet) -> Result<Self, SurfaceError> {
        let xc = jet.fu;
        let yc = jet.fv;
        let g11 = xc.dot(&xc);
        let g22 = yc.dot(&yc);
        let g12 = xc.dot(&yc);
        if !(g11 > 0.0 && g22 > 0.0) || g11 * g22 - g12 * g12 <= 0.0 {
            return Err(SurfaceError::Geometry(String::from(
                "metric tensor is not positive-definite",
            )));
        }
        let metric = Matrix2::new(g11, g12, g12, g22);

        // Unit normal and its partials. n = w/|w| with w = F_u x F_v.
        let w = xc.cross(&yc);
        let wn = w.norm();
        let n = w / wn;
        let wu = jet.fuu.cross(&yc) + xc.cross(&jet.fuv);
        let wv = jet.fuv.cross(&yc) + xc.cross(&jet.fvv);
        let nu = (wu - n * n.dot(&wu)) / wn;
        let nv = (wv - n * n.dot(&wv)) / wn;

        let l11 = jet.fuu.dot(&n);
        let l12 = jet.fuv.dot(&n);
        let l22 = jet.fvv.dot(&n);
        let second_fundamental = Matrix2::new(l11, l12, l12, l22);

        let s1 = g11.sqrt();
        let s2 = g22.sqrt();
        let inv_sqrt = Matrix2::new(1.0 / s1, 0.0, 0.0, 1.0 / s2);
        let curvature = inv_sqrt * second_fundamental * inv_sqrt;
        let sigma = (g22 / g11).sqrt();

        // Christoffel symbols of the second kind. chi = (x_c, y_c);
        // Gamma^l_jk = (d chi_j / d u_k) . chi_n g^{nl}.
        let ginv = metric
            .try_inverse()
            .ok_or_else(|| SurfaceError::Geometry(String::from("metric not invertible")))?;
        let dchi = |j: usize, k: usize| -> Vector3<f64> {
            match (j, k) {
                (0, 0) => jet.fuu,
                (0, 1) | (1, 0) => jet.fuv,
                (1, 1) => jet.fvv,
                _ => unreachable!(),
            }
        };
        let chi = [xc, yc];
        let christoffel = |l: usize, j: usize, k: usize| -> f64 {
            (0..2)
                .map(|nn| dchi(j, k).dot(&chi[nn]) * ginv[(nn, l)])
                .sum()
        };
        let g1 = [
            christoffel(0, 0, 0),
            christoffel(0, 0, 1),
            christoffel(0, 1, 1),
        ]; // Gamma^1_{11, 12, 22}
        let g2 = [
            christoffel(1, 0, 0),
            christoffel(1, 0, 1),
            christoffel(1, 1, 1),
        ]; // Gamma^2_{11, 12, 22}

        let gamma = RowVector2::new(g2[0], g2[1]);
        let gamma_bar = Matrix2x3::new(g1[0], 2.0 * g1[1], g1[2], g2[0], 2.0 * g2[1], g2[2]);
        let ell_bar = RowVector3::new(l11, 2.0 * l12, l22);

        // Partials of L entries: dL_jk/du_m = F_jk,m . n + F_jk . n_m.
        let dl = |jk: (usize, usize), m: usize| -> f64 {
            let (f2, f3u, f3v) = match jk {
                (0, 0) => (jet.fuu, jet.fuuu, jet.fuuv),
                (0, 1) | (1, 0) => (jet.fuv, jet.fuuv, jet.fuvv),
                (1, 1) => (jet.fvv, jet.fuvv, jet.fvvv),
                _ => unreachable!(),
            };
            match m {
                0 => f3u.dot(&n) + f2.dot(&nu),
                1 => f3v.dot(&n) + f2.dot(&nv),
                _ => unreachable!(),
            }
        };

        // Partials of the Christoffel symbols, from third-order jet terms:
        // d/du_m Gamma^l_jk = sum_n [ (d^2 chi_j / du_k du_m) . chi_n
        //   + (d chi_j / du_k) . (d chi_n / du_m) ] g^{nl}
        //   + (d chi_j / du_k) . chi_n dg^{nl}/du_m.
        let d2chi = |j: usize, k: usize, m: usize| -> Vector3<f64> {
            let mut idx = [j, k, m];
            idx.sort_unstable();
            match idx {
                [0, 0, 0] => jet.fuuu,
                [0, 0, 1] => jet.fuuv,
                [0, 1, 1] => jet.fuvv,
                [1, 1, 1] => jet.fvvv,
                _ => unreachable!(),
            }
        };
        let dmetric = |m: usize| -> Matrix2<f64> {
            let d = |j: usize, k: usize| dchi(j, m).dot(&chi[k]) + chi[j].dot(&dchi(k, m));
            Matrix2::new(d(0, 0), d(0, 1), d(0, 1), d(1, 1))
        };
        let dginv = |m: usize| -> Matrix2<f64> { -ginv * dmetric(m) * ginv };
        let dchristoffel = |l: usize, j: usize, k: usize, m: usize| -> f64 {
            let dgi = dginv(m);
            (0..2)
                .map(|nn| {
                    (d2chi(j, k, m).dot(&chi[nn]) + dchi(j, k).dot(&dchi(nn, m))) * ginv[(nn, l)]
                        + dchi(j, k).dot(&chi[nn]) * dgi[(nn, l)]
                })
                .sum()
        };

        // gamma_bbar per the corrected second-order kinematics:
        // [ (G^2_21 - G^1_11) G^2_11 + dG^2_11/du,
        //   (G^2_21 - G^1_11) G^2_12 + (G^2_22 - G^1_12) G^2_11
        //     + dG^2_12/du + dG^2_11/dv,
        //   (G^2_22 - G^1_12) G^2_12 + dG^2_12/dv ]
        let dg2_11_du = dchristoffel(1, 0, 0, 0);
        let dg2_11_dv = dchristoffel(1, 0, 0, 1);
        let dg2_12_du = dchristoffel(1, 0, 1, 0);
        let dg2_12_dv = dchristoffel(1, 0, 1, 1);
        let gamma_bbar = RowVector3::new(
            (g2[1] - g1[0]) * g2[0] + dg2_11_du,
            (g2[1] - g1[0]) * g2[1] + (g2[2] - g1[1]) * g2[0] + dg2_12_du + dg2_11_dv,
            (g2[2] - g1[1]) * g2[1] + dg2_12_dv,
        );

        // ell_bbar rows:
        // [ G^1_11 L11 - dL11/du,
        //   G^1_11 L12 + G^1_12 L11 - dL12/du - dL11/dv,
        //   G^1_12 L12 - dL12/dv ]
        // [ G^2_21 L21 - dL21/du,
        //   G^2_21 L22 + G^2_22 L21 - dL22/du - dL21/dv,
        //   G^2_22 L22 - dL22/dv ]
        let ell_bbar = Matrix2x3::new(
            g1[0] * l11 - dl((0, 0), 0),
            g1[0] * l12 + g1[1] * l11 - dl((0, 1), 0) - dl((0, 0), 1),
            g1[1] * l12 - dl((0, 1), 1),
            g2[1] * l12 - dl((1, 0), 0),
            g2[1] * l22 + g2[2] * l12 - dl((1, 1), 0) - dl((1, 0), 1),
            g2[2] * l22 - dl((1, 1), 1),
        );

        Ok(LocalGeometry {
            gauss_rotation: gauss_frame_from_jet(jet),
            metric,
            second_fundamental,
            curvature,
            sigma,
            gamma,
            gamma_bar,
            ell_bar,
            gamma_bbar,
            ell_bbar,
        })
    }

    /// Diagonal square root of the metric.
    pub fn sqrt_metric(&self) -> Matrix2<f64> {
        Matrix2::new(self.metric[(0, 0)].sqrt(), 0.0, 0.0, self.metric[(1, 1)].sqrt())
    }

    /// Inverse of [`Self::sqrt_metric`].
    pub fn inv_sqrt_metric(&self) -> Matrix2<f64> {
        Matrix2::new(
            1.0 / self.metric[(0, 0)].sqrt(),
            0.0,
            0.0,
            1.0 / self.metric[(1, 1)].sqrt(),
        )
    }
}

// ---------------------------------------------------------------------------
// Analytic charts
// ---------------------------------------------------------------------------

struct PlaneChart;

impl ChartMap for PlaneChart {
    fn jet(&self, u: &Vector2<f64>) -> ChartJet {
        ChartJet {
            f: Vector3::new(u.x, u.y, 0.0),
            fu: Vector3::x(),
            fv: Vector3::y(),
            fuu: Vector3::zeros(),
            fuv: Vector3::zeros(),
            fvv: Vector3::zeros(),
            fuuu: Vector3::zeros(),
            fuuv: Vector3::zeros(),
            fuvv: Vector3::zeros(),
            fvvv: Vector3::zeros(),
        }
    }

    fn domain(&self) -> [AxisDomain; 2] {
        [AxisDomain::Unbounded, AxisDomain::Unbounded]
    }

    fn describe(&self) -> String {
        String::from("plane (u, v, 0)")
    }
}

/// Shared implementation for the ellipsoid family. `flip_y` mirrors the
/// surface in the xz-plane, reversing orientation so the normal points into
/// the body: that variant is the "bowl" used as a dish-shaped hand.
struct EllipsoidChart {
    semi_axes: Vector3<f64>,
    flip_y: bool,
    label: &'static str,
}

impl ChartMap for EllipsoidChart {
    fn jet(&self, u: &Vector2<f64>) -> ChartJet {
        let (a, b, c) = (self.semi_axes.x, self.semi_axes.y, self.semi_axes.z);
        let b = if self.flip_y { -b } else { b };
        let (su, cu) = (u.x.sin(), u.x.cos());
        let (sv, cv) = (u.y.sin(), u.y.cos());
        let e = |su: f64, cu: f64, sv: f64, cv: f64| Vector3::new(a * su * cv, b * su * sv, c * cu);
        // Derivatives of (sin u, cos u) cycle with period 4.
        ChartJet {
            f: e(su, cu, sv, cv),
            fu: e(cu, -su, sv, cv),
            fv: Vector3::new(-a * su * sv, b * su * cv, 0.0),
            fuu: e(-su, -cu, sv, cv),
            fuv: Vector3::new(-a * cu * sv, b * cu * cv, 0.0),
            fvv: Vector3::new(-a * su * cv, -b * su * sv, 0.0),
            fuuu: e(-cu, su, sv, cv),
            fuuv: Vector3::new(a * su * sv, -b * su * cv, 0.0),
            fuvv: Vector3::new(-a * cu * cv, -b * cu * sv, 0.0),
            fvvv: Vector3::new(a * su * sv, -b * su * cv, 0.0),
        }
    }

    fn domain(&self) -> [AxisDomain; 2] {
        [
            AxisDomain::Interval {
                lo: 0.0,
                hi: core::f64::consts::PI,
            },
            AxisDomain::Unbounded,
        ]
    }

    fn describe(&self) -> String {
        format!(
            "{} ({}, {}, {})",
            self.label, self.semi_axes.x, self.semi_axes.y, self.semi_axes.z
        )
    }
}

/// A plane `(u, v) -> (u, v, 0)` with outward normal `+z`.
pub fn make_plane() -> SurfaceChart {
    SurfaceChart::new(Box::new(PlaneChart), 0.0).expect("plane chart is always valid")
}

/// A sphere of the given radius, parameterized by latitude `u in (0, pi)`
/// (from the +z pole) and longitude `v`, outward normal.
pub fn make_sphere(radius: f64) -> Result<SurfaceChart, SurfaceError> {
    make_sphere_with_margin(radius, DEFAULT_SINGULARITY_MARGIN)
}

/// [`make_sphere`] with an explicit pole margin (chart units).
pub fn make_sphere_with_margin(radius: f64, margin: f64) -> Result<SurfaceChart, SurfaceError> {
    if !(radius > 0.0) {
        return Err(SurfaceError::Parameter(format!(
            "sphere radius must be positive, got {radius}"
        )));
    }
    SurfaceChart::new(
        Box::new(EllipsoidChart {
            semi_axes: Vector3::new(radius, radius, radius),
            flip_y: false,
            label: "sphere",
        }),
        margin,
    )
}

/// An ellipsoid with the given semi-axes, same parameterization as the
/// sphere, outward normal.
///
/// Construction validates chart orthogonality on a sampled grid, so triaxial
/// shapes (all axes distinct) are rejected; spheroids pass. General triaxial
/// bodies must be supplied through a custom orthogonal [`ChartMap`].
pub fn make_ellipsoid(semi_axes: Vector3<f64>) -> Result<SurfaceChart, SurfaceError> {
    make_ellipsoid_with_margin(semi_axes, DEFAULT_SINGULARITY_MARGIN)
}

/// [`make_ellipsoid`] with an explicit pole margin (chart units).
pub fn make_ellipsoid_with_margin(
    semi_axes: Vector3<f64>,
    margin: f64,
) -> Result<SurfaceChart, SurfaceError> {
    if !(semi_axes.x > 0.0 && semi_axes.y > 0.0 && semi_axes.z > 0.0) {
        return Err(SurfaceError::Parameter(format!(
            "ellipsoid semi-axes must be positive, got ({}, {}, {})",
            semi_axes.x, semi_axes.y, semi_axes.z
        )));
    }
    SurfaceChart::new(
        Box::new(EllipsoidChart {
            semi_axes,
            flip_y: false,
            label: "ellipsoid",
        }),
        margin,
    )
}

/// The same ellipsoid surface with reversed orientation (normal pointing
/// into the body). Used as a dish-shaped hand: an object resting inside the
/// lower half (u near pi) sees the bowl normal pointing up at it.
pub fn make_ellipsoid_bowl(semi_axes: Vector3<f64>) -> Result<SurfaceChart, SurfaceError> {
    if !(semi_axes.x > 0.0 && semi_axes.y > 0.0 && semi_axes.z > 0.0) {
        return Err(SurfaceError::Parameter(format!(
            "bowl semi-axes must be positive, got ({}, {}, {})",
            semi_axes.x, semi_axes.y, semi_axes.z
        )));
    }
    SurfaceChart::new(
        Box::new(EllipsoidChart {
            semi_axes,
            flip_y: true,
            label: "ellipsoid bowl",
        }),
        DEFAULT_SINGULARITY_MARGIN,
    )
}

/// Wraps any chart map and rebuilds its derivative jet by central finite
/// differences of the position map only.
///
/// Test fixture: lets derivative-hungry code be checked against charts whose
/// analytic partials are suspect. Not for simulation use — the noise floor
/// of second and third differences is far above integrator tolerances.
pub struct FiniteDifferenceChart<M: ChartMap> {
    pub inner: M,
    pub step: f64,
}

impl<M: ChartMap> ChartMap for FiniteDifferenceChart<M> {
    fn jet(&self, u: &Vector2<f64>) -> ChartJet {
        let h = self.step;
        let f = |du: f64, dv: f64| self.inner.jet(&Vector2::new(u.x + du, u.y + dv)).f;
        let fu = (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h);
        let fv = (f(0.0, h) - f(0.0, -h)) / (2.0 * h);
        let fuu = (f(h, 0.0) - 2.0 * f(0.0, 0.0) + f(-h, 0.0)) / (h * h);
        let fvv = (f(0.0, h) - 2.0 * f(0.0, 0.0) + f(0.0, -h)) / (h * h);
        let fuv = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
        let fuuu = (f(2.0 * h, 0.0) - 2.0 * f(h, 0.0) + 2.0 * f(-h, 0.0) - f(-2.0 * h, 0.0))
            / (2.0 * h * h * h);
        let fvvv = (f(0.0, 2.0 * h) - 2.0 * f(0.0, h) + 2.0 * f(0.0, -h) - f(0.0, -2.0 * h))
            / (2.0 * h * h * h);
        let fuuv = ((f(h, h) - 2.0 * f(0.0, h) + f(-h, h))
            - (f(h, -h) - 2.0 * f(0.0, -h) + f(-h, -h)))
            / (2.0 * h * h * h);
        let fuvv = ((f(h, h) - 2.0 * f(h, 0.0) + f(h, -h))
            - (f(-h, h) - 2.0 * f(-h, 0.0) + f(-h, -h)))
            / (2.0 * h * h * h);
        ChartJet {
            f: f(0.0, 0.0),
            fu,
            fv,
            fuu,
            fuv,
            fvv,
            fuuu,
            fuuv,
            fuvv,
            fvvv,
        }
    }

    fn domain(&self) -> [AxisDomain; 2] {
        self.inner.domain()
    }

    fn describe(&self) -> String {
        format!("finite-difference wrapper of {}", self.inner.describe())
    }
}
