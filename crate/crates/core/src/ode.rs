//! Adaptive Dormand-Prince 5(4) integration with dense output.
//!
//! One embedded Runge-Kutta pair serves the whole crate: trajectory
//! simulation, fine rollouts inside the planner, and the backward Riccati
//! sweep. Steps are accepted against a mixed absolute/relative error norm
//! and a quartic interpolant provides solution values between steps.
//!
//! Integration always returns whatever prefix of the solution was computed;
//! early termination (observer stop, right-hand-side failure, step collapse,
//! budget exhaustion) is reported through [`DenseSolution::stop`].

use alloc::vec::Vec;

use nalgebra::DVector;

#[allow(unused_imports)]
use crate::real::FloatExt as _;

/// Integration tolerances and step-size limits.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Hard floor on the step size; collapsing below it stops the run.
    pub min_step: f64,
    pub max_step: f64,
    /// Cap on accepted + rejected steps.
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            min_step: 1e-10,
            max_step: f64::INFINITY,
            max_steps: 50_000_000,
        }
    }
}

/// Why integration ended before the requested end time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    /// The observer callback requested a stop.
    Observer,
    /// The right-hand side failed; the caller holds the error detail.
    RhsFailure,
    /// The controller pushed the step below `min_step`.
    StepSizeCollapse { step: f64 },
    /// `max_steps` exhausted.
    BudgetExhausted,
}

/// One accepted step together with its dense-output coefficients.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    rcont: [DVector<f64>; 5],
}

impl DenseStep {
    /// Evaluates the quartic interpolant at `t` (clamped to the step span).
    pub fn eval(&self, t: f64) -> DVector<f64> {
        let theta = if self.h == 0.0 {
            0.0
        } else {
            ((t - self.t0) / self.h).clamp(0.0, 1.0)
        };
        let th1 = 1.0 - theta;
        &self.rcont[0]
            + theta
                * (&self.rcont[1]
                    + th1 * (&self.rcont[2] + theta * (&self.rcont[3] + th1 * &self.rcont[4])))
    }
}

/// Piecewise-polynomial solution over `[t_start, t_end]`.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    steps: Vec<DenseStep>,
    pub t_start: f64,
    /// Last time reached (equals the requested end time when `stop` is
    /// `None`).
    pub t_end: f64,
    /// State at `t_end`.
    pub y_end: DVector<f64>,
    pub n_accepted: usize,
    pub n_rejected: usize,
    /// `None` when the requested end time was reached.
    pub stop: Option<StopReason>,
}

impl DenseSolution {
    /// Evaluates the solution at `t`, clamped to the covered span.
    pub fn eval(&self, t: f64) -> DVector<f64> {
        if self.steps.is_empty() {
            return self.y_end.clone();
        }
        let idx = self.steps.partition_point(|s| s.t0 + s.h < t);
        self.steps[idx.min(self.steps.len() - 1)].eval(t)
    }

    pub fn step_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps
            .iter()
            .map(|s| s.t0)
            .chain(core::iter::once(self.t_end))
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fourth-order embedded weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
// Dense-output coefficients (Hairer & Wanner's DOPRI5 interpolant).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integrates `dy/dt = f(t, y)` from `t0` forward to `t_end`, retaining
/// dense output.
///
/// `project` may adjust each accepted state in place (constraint
/// stabilization); `observer` sees each accepted step and may stop the run
/// by returning `false`. If `f` returns `Err(())`, the run stops with
/// [`StopReason::RhsFailure`] at the last accepted state; the caller is
/// expected to have recorded the error detail itself.
pub fn integrate_dense(
    f: &mut dyn FnMut(f64, &DVector<f64>, &mut DVector<f64>) -> Result<(), ()>,
    t0: f64,
    y0: DVector<f64>,
    t_end: f64,
    opts: &OdeOptions,
    project: &mut dyn FnMut(f64, &mut DVector<f64>),
    observer: &mut dyn FnMut(&DenseStep, &DVector<f64>) -> bool,
) -> DenseSolution {
    let dim = y0.len();
    let span = t_end - t0;
    debug_assert!(span >= 0.0);

    let mut t = t0;
    let mut y = y0;
    let mut k: [DVector<f64>; 7] = core::array::from_fn(|_| DVector::zeros(dim));
    let mut work = DVector::zeros(dim);

    let mut steps = Vec::new();
    let mut n_accepted = 0usize;
    let mut n_rejected = 0usize;
    let mut stop = None;

    let finish = |steps: Vec<DenseStep>, t: f64, y: DVector<f64>, na, nr, stop| DenseSolution {
        steps,
        t_start: t0,
        t_end: t,
        y_end: y,
        n_accepted: na,
        n_rejected: nr,
        stop,
    };

    if f(t, &y, &mut k[0]).is_err() {
        return finish(steps, t, y, 0, 0, Some(StopReason::RhsFailure));
    }
    if span == 0.0 {
        return finish(steps, t, y, 0, 0, None);
    }

    // Initial step size from the scale of y and f.
    let mut h = {
        let d0 = y.abs().max().max(1e-8);
        let d1 = k[0].abs().max().max(1e-8);
        (0.01 * (d0 / d1)).min(span) .clamp(opts.min_step * 10.0, opts.max_step.min(span))
    };

    let mut total = 0usize;
    'outer: while t < t_end {
        total += 1;
        if total > opts.max_steps {
            stop = Some(StopReason::BudgetExhausted);
            break;
        }
        if h < opts.min_step {
            stop = Some(StopReason::StepSizeCollapse { step: h });
            break;
        }
        let h_eff = h.min(t_end - t);

        for stage in 1..7 {
            work.copy_from(&y);
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = A[stage][j];
                if a != 0.0 {
                    work.axpy(h_eff * a, kj, 1.0);
                }
            }
            let (head, tail) = k.split_at_mut(stage);
            let _ = head;
            if f(t + C[stage] * h_eff, &work, &mut tail[0]).is_err() {
                stop = Some(StopReason::RhsFailure);
                break 'outer;
            }
        }
        // FSAL: stage 7 is evaluated at (t + h, y1); `work` holds y1 because
        // row A[6] equals the 5th-order weights.
        let y1 = work.clone();

        // Embedded error: the 5th-order weights are A[6] (zero weight on
        // stage 7), so err = h * sum_j (b5_j - b4_j) k_j.
        let mut err_vec = DVector::zeros(dim);
        for j in 0..7 {
            let b5 = if j < 6 { A[6][j] } else { 0.0 };
            let coeff = b5 - B4[j];
            if coeff != 0.0 {
                err_vec.axpy(h_eff * coeff, &k[j], 1.0);
            }
        }

        let mut err = 0.0f64;
        for i in 0..dim {
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y1[i].abs());
            let e = err_vec[i] / sc;
            err += e * e;
        }
        err = (err / dim as f64).sqrt();
        if !err.is_finite() {
            err = f64::INFINITY;
        }

        if err <= 1.0 {
            // Accept: dense coefficients are built from the unprojected
            // states (projection shifts are below integration error).
            let ydiff = &y1 - &y;
            let bspl = h_eff * &k[0] - &ydiff;
            let rcont4 = &ydiff - h_eff * &k[6] - &bspl;
            let mut rcont5 = DVector::zeros(dim);
            for j in 0..7 {
                if D[j] != 0.0 {
                    rcont5.axpy(h_eff * D[j], &k[j], 1.0);
                }
            }
            let step = DenseStep {
                t0: t,
                h: h_eff,
                rcont: [y.clone(), ydiff, bspl, rcont4, rcont5],
            };

            t += h_eff;
            let mut y_next = y1;
            project(t, &mut y_next);
            let keep_going = observer(&step, &y_next);
            steps.push(step);
            n_accepted += 1;
            y = y_next;

            if !keep_going {
                stop = Some(StopReason::Observer);
                break;
            }
            if t < t_end && f(t, &y, &mut k[0]).is_err() {
                stop = Some(StopReason::RhsFailure);
                break;
            }

            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h_eff * factor).min(opts.max_step);
        } else {
            n_rejected += 1;
            let factor = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.2, 1.0)
            } else {
                0.2
            };
            h = h_eff * factor;
        }
    }

    finish(steps, t, y, n_accepted, n_rejected, stop)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_scalar_exponential() {
        let mut f = |_t: f64, y: &DVector<f64>, dy: &mut DVector<f64>| {
            dy[0] = -y[0];
            Ok(())
        };
        let opts = OdeOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            ..Default::default()
        };
        let sol = integrate_dense(
            &mut f,
            0.0,
            DVector::from_element(1, 1.0),
            2.0,
            &opts,
            &mut |_, _| {},
            &mut |_, _| true,
        );
        assert!(sol.stop.is_none());
        assert!((sol.y_end[0] - (-2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn dense_output_matches_harmonic_oscillator() {
        let mut f = |_t: f64, y: &DVector<f64>, dy: &mut DVector<f64>| {
            dy[0] = y[1];
            dy[1] = -y[0];
            Ok(())
        };
        let opts = OdeOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            ..Default::default()
        };
        let sol = integrate_dense(
            &mut f,
            0.0,
            DVector::from_vec(vec![1.0, 0.0]),
            10.0,
            &opts,
            &mut |_, _| {},
            &mut |_, _| true,
        );
        assert!(sol.stop.is_none());
        for i in 0..=200 {
            let t = 10.0 * (i as f64) / 200.0;
            let y = sol.eval(t);
            assert!(
                (y[0] - t.cos()).abs() < 1e-7,
                "dense output off at t={t}: {} vs {}",
                y[0],
                t.cos()
            );
            assert!((y[1] + t.sin()).abs() < 1e-7);
        }
    }

    #[test]
    fn observer_can_stop_early() {
        let mut f = |_t: f64, _y: &DVector<f64>, dy: &mut DVector<f64>| {
            dy[0] = 1.0;
            Ok(())
        };
        let sol = integrate_dense(
            &mut f,
            0.0,
            DVector::zeros(1),
            100.0,
            &OdeOptions::default(),
            &mut |_, _| {},
            &mut |step, _| step.t0 + step.h < 1.0,
        );
        assert_eq!(sol.stop, Some(StopReason::Observer));
        assert!(sol.t_end < 100.0);
    }

    #[test]
    fn reports_step_collapse_on_nan() {
        let mut f = |t: f64, _y: &DVector<f64>, dy: &mut DVector<f64>| {
            dy[0] = if t < 0.5 { 0.0 } else { f64::NAN };
            Ok(())
        };
        let sol = integrate_dense(
            &mut f,
            0.0,
            DVector::zeros(1),
            1.0,
            &OdeOptions::default(),
            &mut |_, _| {},
            &mut |_, _| true,
        );
        assert!(matches!(sol.stop, Some(StopReason::StepSizeCollapse { .. })));
    }

    #[test]
    fn rhs_failure_keeps_prefix() {
        let mut f = |t: f64, _y: &DVector<f64>, dy: &mut DVector<f64>| {
            if t > 0.5 {
                return Err(());
            }
            dy[0] = 1.0;
            Ok(())
        };
        let sol = integrate_dense(
            &mut f,
            0.0,
            DVector::zeros(1),
            1.0,
            &OdeOptions::default(),
            &mut |_, _| {},
            &mut |_, _| true,
        );
        assert_eq!(sol.stop, Some(StopReason::RhsFailure));
        assert!((sol.eval(sol.t_end * 0.5)[0] - sol.t_end * 0.5).abs() < 1e-9);
    }
}
