//! Adaptive propagation of complex trajectories `dz/dt = v_bar(z, t)` and
//! real Bohmian trajectories `dx/dt = v(x, t)`.
//!
//! A single Dormand-Prince 5(4) driver with PI step-size control serves
//! both flows and both time directions. Output is sampled on the grid
//! `t0 + k * dense_dt` by cubic Hermite interpolation of accepted steps,
//! plus the exact endpoint. A stage that lands on (or next to) a node of
//! the wave function counts as a failed step: the step is halved, and once
//! it falls below `min_step` the propagation stops with
//! [`PathStatus::AbortedPole`] and returns the partial path.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::wavemodel::WaveModel;

/// Step-control parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// Output sampling interval.
    pub dense_dt: f64,
    /// Accepted plus rejected steps before giving up.
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.05,
            min_step: 1e-12,
            dense_dt: 0.02,
            max_steps: 2_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return bad(format!("rel_tol must be > 0, got {}", self.rel_tol));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return bad(format!("abs_tol must be > 0, got {}", self.abs_tol));
        }
        if !(self.min_step > 0.0 && self.min_step < self.max_step && self.max_step.is_finite()) {
            return bad(format!(
                "need 0 < min_step < max_step, got {} and {}",
                self.min_step, self.max_step
            ));
        }
        if !(self.dense_dt > 0.0 && self.dense_dt.is_finite()) {
            return bad(format!("dense_dt must be > 0, got {}", self.dense_dt));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathKind {
    Complex,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathStatus {
    Completed,
    AbortedPole,
    AbortedNonFinite,
}

impl PathStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            PathStatus::Completed => "completed",
            PathStatus::AbortedPole => "aborted_pole",
            PathStatus::AbortedNonFinite => "aborted_nonfinite",
        }
    }

    pub fn is_completed(&self) -> bool {
        *self == PathStatus::Completed
    }
}

impl fmt::Display for PathStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathStats {
    pub steps: usize,
    pub rejected: usize,
    /// Smallest `|psi|` met by any successful field evaluation, relative to
    /// the largest single-packet term at that point.
    pub min_psi_ratio: f64,
    /// Sum of the absolute local error estimates of the accepted steps.
    pub error_estimate: f64,
}

impl Default for PathStats {
    fn default() -> Self {
        Self { steps: 0, rejected: 0, min_psi_ratio: f64::INFINITY, error_estimate: 0.0 }
    }
}

impl PathStats {
    fn merge(&mut self, other: &PathStats) {
        self.steps += other.steps;
        self.rejected += other.rejected;
        self.min_psi_ratio = self.min_psi_ratio.min(other.min_psi_ratio);
        self.error_estimate += other.error_estimate;
    }
}

/// Time-stamped positions of one trajectory. Real trajectories store
/// their positions with a zero imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPath {
    pub kind: PathKind,
    pub samples: Vec<(f64, Complex64)>,
    pub t0: f64,
    pub t1: f64,
    pub status: PathStatus,
    pub initial: Complex64,
    pub stats: PathStats,
}

impl TrajectoryPath {
    pub fn last(&self) -> (f64, Complex64) {
        *self.samples.last().expect("a path always holds its initial sample")
    }

    pub fn is_completed(&self) -> bool {
        self.status.is_completed()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.0)
    }

    /// Position at a sample time, matched to within `1e-9`.
    pub fn at(&self, t: f64) -> Option<Complex64> {
        self.samples.iter().find(|s| (s.0 - t).abs() <= 1e-9).map(|s| s.1)
    }

    /// Appends `next`, which must start where `self` ends.
    pub(crate) fn extend_with(&mut self, next: TrajectoryPath) {
        debug_assert!((self.last().0 - next.t0).abs() < 1e-12);
        self.samples.extend(next.samples.into_iter().skip(1));
        self.t1 = next.t1;
        self.status = next.status;
        self.stats.merge(&next.stats);
    }
}

/// Why a field evaluation failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Failure {
    Pole,
    NonFinite,
}

impl Failure {
    fn status(self) -> PathStatus {
        match self {
            Failure::Pole => PathStatus::AbortedPole,
            Failure::NonFinite => PathStatus::AbortedNonFinite,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::PoleProximity { .. } | Error::NodeAtX { .. } => Failure::Pole,
            _ => Failure::NonFinite,
        }
    }
}

/// Right-hand side of an `N`-component complex ODE. Returns the derivative
/// and the node ratio at the evaluation point.
pub(crate) trait Flow<const N: usize> {
    fn eval(&self, t: f64, y: &[Complex64; N]) -> Result<([Complex64; N], f64), Failure>;
}

pub(crate) struct ComplexFlow<'a>(pub &'a WaveModel);

impl Flow<1> for ComplexFlow<'_> {
    fn eval(&self, t: f64, y: &[Complex64; 1]) -> Result<([Complex64; 1], f64), Failure> {
        let (v, _, ratio) = self.0.v_bar_with_slope(y[0], t)?;
        Ok(([v], ratio))
    }
}

pub(crate) struct RealFlow<'a>(pub &'a WaveModel);

impl Flow<1> for RealFlow<'_> {
    fn eval(&self, t: f64, y: &[Complex64; 1]) -> Result<([Complex64; 1], f64), Failure> {
        let x = y[0].re;
        let v = self.0.real_velocity(x, t)?;
        Ok(([Complex64::new(v, 0.0)], self.0.node_ratio(y[0], t)))
    }
}

/// Trajectory plus its first variation `J = dz/dz0`.
pub(crate) struct VariationalFlow<'a>(pub &'a WaveModel);

impl Flow<2> for VariationalFlow<'_> {
    fn eval(&self, t: f64, y: &[Complex64; 2]) -> Result<([Complex64; 2], f64), Failure> {
        let (v, slope, ratio) = self.0.v_bar_with_slope(y[0], t)?;
        Ok(([v, slope * y[1]], ratio))
    }
}

pub(crate) struct Solution<const N: usize> {
    pub samples: Vec<(f64, [Complex64; N])>,
    pub status: PathStatus,
    pub stats: PathStats,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// b - b_hat
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn scaled_norm<const N: usize>(v: &[Complex64; N], y: &[Complex64; N], cfg: &IntegratorConfig) -> f64 {
    let sum: f64 = v
        .iter()
        .zip(y)
        .map(|(d, y)| {
            let sc = cfg.abs_tol + cfg.rel_tol * y.norm();
            (d.norm() / sc).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

fn axpy<const N: usize>(y: &[Complex64; N], h: f64, ks: &[[Complex64; N]], coef: &[f64]) -> [Complex64; N] {
    let mut out = *y;
    for (k, &c) in ks.iter().zip(coef) {
        if c != 0.0 {
            for i in 0..N {
                out[i] += k[i] * (h * c);
            }
        }
    }
    out
}

fn hermite<const N: usize>(
    y0: &[Complex64; N],
    f0: &[Complex64; N],
    y1: &[Complex64; N],
    f1: &[Complex64; N],
    h: f64,
    theta: f64,
) -> [Complex64; N] {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + theta;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let mut out = [Complex64::new(0.0, 0.0); N];
    for i in 0..N {
        out[i] = y0[i] * h00 + f0[i] * (h * h10) + y1[i] * h01 + f1[i] * (h * h11);
    }
    out
}

fn initial_step<const N: usize, F: Flow<N>>(
    flow: &F,
    t0: f64,
    y0: &[Complex64; N],
    f0: &[Complex64; N],
    dir: f64,
    span: f64,
    cfg: &IntegratorConfig,
) -> f64 {
    let d0 = scaled_norm(y0, y0, cfg);
    let d1 = scaled_norm(f0, y0, cfg);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(cfg.max_step).min(span);
    let y1 = axpy(y0, dir * h0, &[*f0], &[1.0]);
    let h1 = match flow.eval(t0 + dir * h0, &y1) {
        Ok((f1, _)) => {
            let mut diff = f1;
            for i in 0..N {
                diff[i] -= f0[i];
            }
            let d2 = scaled_norm(&diff, y0, cfg) / h0;
            let dm = d1.max(d2);
            if dm <= 1e-15 {
                (h0 * 1e-3).max(1e-6)
            } else {
                (0.01 / dm).powf(0.2)
            }
        }
        Err(_) => h0,
    };
    (100.0 * h0).min(h1).min(cfg.max_step).min(span).max(cfg.min_step)
}

/// Integrates `flow` from `t0` to `t1` (either direction).
pub(crate) fn solve<const N: usize, F: Flow<N>>(
    flow: &F,
    y0: [Complex64; N],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Solution<N> {
    let mut stats = PathStats::default();
    let mut samples = vec![(t0, y0)];
    let done = |samples, status, stats| Solution { samples, status, stats };

    let (mut f, ratio) = match flow.eval(t0, &y0) {
        Ok(v) => v,
        Err(e) => return done(samples, e.status(), stats),
    };
    stats.min_psi_ratio = ratio;
    if t1 == t0 {
        return done(samples, PathStatus::Completed, stats);
    }

    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    // grid samples closer than this to t1 are replaced by the exact endpoint
    let end_gap = 1e-9 * span.max(1.0);
    let grid_time = |k: usize| t0 + dir * k as f64 * cfg.dense_dt;

    let mut t = t0;
    let mut y = y0;
    let mut h = initial_step(flow, t0, &y0, &f, dir, span, cfg);
    let mut next_k = 1usize;
    let mut fac_old = 1e-4f64;
    let mut last_rejected = false;

    loop {
        if stats.steps + stats.rejected >= cfg.max_steps {
            return abort(samples, t, y, PathStatus::AbortedPole, stats);
        }
        let remaining = (t1 - t) * dir;
        let finishing = h >= remaining * (1.0 - 1e-12);
        if finishing {
            h = remaining;
        }
        let hs = dir * h;

        let mut k = [[Complex64::new(0.0, 0.0); N]; 7];
        k[0] = f;
        let mut failure = None;
        let mut step_min_ratio = f64::INFINITY;
        let mut y_new = y;
        for s in 1..7 {
            let ys = axpy(&y, hs, &k[..s], &A[s][..s]);
            if s == 6 {
                y_new = ys;
            }
            let ts = if s >= 5 && finishing { t1 } else { t + C[s] * hs };
            match flow.eval(ts, &ys) {
                Ok((d, r)) => {
                    k[s] = d;
                    step_min_ratio = step_min_ratio.min(r);
                }
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }

        if let Some(e) = failure {
            stats.rejected += 1;
            h *= 0.5;
            last_rejected = true;
            if h < cfg.min_step {
                return abort(samples, t, y, e.status(), stats);
            }
            continue;
        }
        let bad = y_new.iter().any(|v| !v.is_finite());
        if bad {
            stats.rejected += 1;
            h *= 0.5;
            if h < cfg.min_step {
                return abort(samples, t, y, PathStatus::AbortedNonFinite, stats);
            }
            continue;
        }

        let mut err_vec = [Complex64::new(0.0, 0.0); N];
        for (kk, &e) in k.iter().zip(&E) {
            for i in 0..N {
                err_vec[i] += kk[i] * (hs * e);
            }
        }
        let mut scale_ref = y;
        for i in 0..N {
            if y_new[i].norm() > scale_ref[i].norm() {
                scale_ref[i] = y_new[i];
            }
        }
        let err = scaled_norm(&err_vec, &scale_ref, cfg);

        let fac11 = err.powf(0.2 - BETA * 0.75);
        if err <= 1.0 {
            let t_new = if finishing { t1 } else { t + hs };
            let f_new = k[6];
            // dense output on the grid
            loop {
                let tk = grid_time(next_k);
                if (tk - t_new) * dir > 0.0 || (t1 - tk) * dir <= end_gap {
                    break;
                }
                let yk = if (tk - t_new).abs() <= 1e-14 * tk.abs().max(1.0) {
                    y_new
                } else {
                    hermite(&y, &f, &y_new, &f_new, hs, (tk - t) / hs)
                };
                samples.push((tk, yk));
                next_k += 1;
            }
            stats.steps += 1;
            stats.min_psi_ratio = stats.min_psi_ratio.min(step_min_ratio);
            stats.error_estimate += err_vec.iter().map(|e| e.norm()).fold(0.0, f64::max);

            t = t_new;
            y = y_new;
            f = f_new;
            if finishing {
                samples.push((t1, y));
                return done(samples, PathStatus::Completed, stats);
            }

            let mut fac = fac11 / fac_old.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            fac_old = err.max(1e-4);
            last_rejected = false;
            h = h_new.min(cfg.max_step);
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            if h < cfg.min_step {
                return abort(samples, t, y, PathStatus::AbortedPole, stats);
            }
        }
    }
}

fn abort<const N: usize>(
    mut samples: Vec<(f64, [Complex64; N])>,
    t: f64,
    y: [Complex64; N],
    status: PathStatus,
    stats: PathStats,
) -> Solution<N> {
    if samples.last().map(|s| s.0) != Some(t) {
        samples.push((t, y));
    }
    Solution { samples, status, stats }
}

fn into_path(sol: Solution<1>, kind: PathKind, z0: Complex64, t0: f64, t1: f64) -> TrajectoryPath {
    TrajectoryPath {
        kind,
        samples: sol.samples.into_iter().map(|(t, y)| (t, y[0])).collect(),
        t0,
        t1,
        status: sol.status,
        initial: z0,
        stats: sol.stats,
    }
}

fn check_times(t0: f64, t1: f64) -> Result<()> {
    if t0.is_finite() && t1.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time span [{t0}, {t1}] must be finite")))
    }
}

/// Complex quantum trajectory from `z0` at `t0` to `t1`.
///
/// Pole and overflow aborts are reported through the path status, not as
/// errors; `Err` is returned only for an invalid configuration.
pub fn propagate_complex(
    w: &WaveModel,
    z0: Complex64,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<TrajectoryPath> {
    cfg.validate()?;
    check_times(t0, t1)?;
    let sol = solve(&ComplexFlow(w), [z0], t0, t1, cfg);
    Ok(into_path(sol, PathKind::Complex, z0, t0, t1))
}

/// Real Bohmian trajectory from `x0` at `t0` to `t1`.
pub fn propagate_real(
    w: &WaveModel,
    x0: f64,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<TrajectoryPath> {
    cfg.validate()?;
    check_times(t0, t1)?;
    let z0 = Complex64::new(x0, 0.0);
    let sol = solve(&RealFlow(w), [z0], t0, t1, cfg);
    Ok(into_path(sol, PathKind::Real, z0, t0, t1))
}

/// End point of a complex trajectory and its sensitivity to the start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivity {
    pub z: Complex64,
    /// `dz(t1)/dz0`.
    pub jacobian: Complex64,
}

/// Integrates the variational equation `dJ/dt = (dv_bar/dz) J`, `J(t0) = 1`,
/// alongside the trajectory. `v_bar` is analytic in `z` away from nodes, so
/// one complex number carries the full sensitivity.
pub fn variational_jacobian(
    w: &WaveModel,
    z0: Complex64,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Sensitivity> {
    cfg.validate()?;
    check_times(t0, t1)?;
    let sol = solve(&VariationalFlow(w), [z0, Complex64::new(1.0, 0.0)], t0, t1, cfg);
    let (t, y) = *sol.samples.last().expect("initial sample");
    if !sol.status.is_completed() {
        return Err(Error::Aborted { status: sol.status, t });
    }
    Ok(Sensitivity { z: y[0], jacobian: y[1] })
}
