//! Isochrone families: complex trajectories that all cross the real axis at
//! a shared time `t_c`.
//!
//! Each member is found by integrating backward from `x + 0i` at `t_c` to
//! `t = 0`, then forward over `[0, T]`. When the forward leg misses the
//! target by more than [`CROSS_EPS`], the launch point is polished by
//! Newton iteration on `z(t_c; z0) = x` using the variational sensitivity.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrate::{
    propagate_complex, variational_jacobian, IntegratorConfig, PathStatus, TrajectoryPath,
};
use crate::wavemodel::WaveModel;

/// Crossing tolerance on `|z(t_c) - x|`.
pub const CROSS_EPS: f64 = 1e-8;

const MAX_POLISH: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct IsochroneMember {
    pub x_cross: f64,
    /// Launch point at `t = 0`; `None` when the backward leg aborted.
    pub z0: Option<Complex64>,
    /// Path over `[0, T]`, or the partial backward leg when it aborted.
    pub path: TrajectoryPath,
    /// `|Im z(t_c)|` of the forward leg.
    pub residual: Option<f64>,
    /// Newton polish iterations applied to `z0`.
    pub polish_iterations: usize,
}

impl IsochroneMember {
    pub fn status(&self) -> PathStatus {
        self.path.status
    }

    /// True when the member crosses the real axis within tolerance.
    pub fn crosses(&self) -> bool {
        self.residual.is_some_and(|r| r < CROSS_EPS)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsochroneFamily {
    pub t_c: f64,
    pub horizon: f64,
    pub members: Vec<IsochroneMember>,
}

impl IsochroneFamily {
    /// Largest crossing residual among members that did not abort.
    pub fn max_residual(&self) -> Option<f64> {
        self.members.iter().filter_map(|m| m.residual).reduce(f64::max)
    }

    /// Member paths spanning the whole horizon, in target order.
    pub fn completed_paths(&self) -> Vec<&TrajectoryPath> {
        self.members
            .iter()
            .filter(|m| m.path.is_completed() && m.path.t0 == 0.0)
            .map(|m| &m.path)
            .collect()
    }
}

/// Locates the launch point of the complex trajectory through `x + 0i` at
/// `t_c`, returning `(z0, residual, polish iterations)` or the aborted
/// backward path.
pub(crate) fn crossing_launch(
    w: &WaveModel,
    x: f64,
    t_c: f64,
    cfg: &IntegratorConfig,
) -> Result<std::result::Result<(Complex64, TrajectoryPath, usize), TrajectoryPath>> {
    let target = Complex64::new(x, 0.0);
    if t_c == 0.0 {
        let path = propagate_complex(w, target, 0.0, 0.0, cfg)?;
        return Ok(if path.is_completed() { Ok((target, path, 0)) } else { Err(path) });
    }
    let back = propagate_complex(w, target, t_c, 0.0, cfg)?;
    if !back.is_completed() {
        return Ok(Err(back));
    }
    let mut z0 = back.last().1;
    let mut leg = propagate_complex(w, z0, 0.0, t_c, cfg)?;
    let mut iterations = 0;
    while leg.is_completed() && (leg.last().1 - target).norm() >= 0.1 * CROSS_EPS {
        if iterations == MAX_POLISH {
            break;
        }
        let Ok(sens) = variational_jacobian(w, z0, 0.0, t_c, cfg) else {
            break;
        };
        let step = (sens.z - target) / sens.jacobian;
        if !step.is_finite() {
            break;
        }
        let candidate = z0 - step;
        let trial = propagate_complex(w, candidate, 0.0, t_c, cfg)?;
        iterations += 1;
        if trial.is_completed()
            && (trial.last().1 - target).norm() < (leg.last().1 - target).norm()
        {
            z0 = candidate;
            leg = trial;
        } else {
            break;
        }
    }
    if !leg.is_completed() {
        return Ok(Err(leg));
    }
    Ok(Ok((z0, leg, iterations)))
}

fn build_member(
    w: &WaveModel,
    x: f64,
    t_c: f64,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<IsochroneMember> {
    let (z0, mut path, polish_iterations) = match crossing_launch(w, x, t_c, cfg)? {
        Ok(found) => found,
        Err(aborted) => {
            return Ok(IsochroneMember {
                x_cross: x,
                z0: None,
                path: aborted,
                residual: None,
                polish_iterations: 0,
            })
        }
    };
    let residual = path.last().1.im.abs();
    if horizon > t_c {
        let rest = propagate_complex(w, path.last().1, t_c, horizon, cfg)?;
        path.extend_with(rest);
    }
    path.initial = z0;
    Ok(IsochroneMember { x_cross: x, z0: Some(z0), path, residual: Some(residual), polish_iterations })
}

/// Builds the isochrone family crossing the real axis at `t_c` through each
/// of `x_targets`, with every member propagated over `[0, horizon]`.
///
/// Per-target failures are kept as aborted members.
pub fn build_isochrone(
    w: &WaveModel,
    t_c: f64,
    x_targets: &[f64],
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<IsochroneFamily> {
    cfg.validate()?;
    if !(t_c >= 0.0 && t_c <= horizon && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "crossing time {t_c} must lie in [0, {horizon}]"
        )));
    }
    if let Some(x) = x_targets.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("crossing target {x} is not finite")));
    }
    let members = x_targets
        .par_iter()
        .map(|&x| build_member(w, x, t_c, horizon, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(IsochroneFamily { t_c, horizon, members })
}

/// One sample of a real trajectory traced back to the complex trajectory
/// that crosses the real axis there.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingSample {
    pub t: f64,
    pub x: f64,
    pub z0: Option<Complex64>,
    pub residual: Option<f64>,
    pub status: PathStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingReport {
    pub samples: Vec<CrossingSample>,
}

impl CrossingReport {
    pub fn max_residual(&self) -> Option<f64> {
        self.samples.iter().filter_map(|s| s.residual).reduce(f64::max)
    }

    /// Smallest distance between launch points of distinct samples.
    pub fn min_launch_separation(&self) -> Option<f64> {
        let z0s: Vec<_> = self.samples.iter().filter_map(|s| s.z0).collect();
        let mut best: Option<f64> = None;
        for (i, a) in z0s.iter().enumerate() {
            for b in &z0s[i + 1..] {
                let d = (a - b).norm();
                best = Some(best.map_or(d, |m| m.min(d)));
            }
        }
        best
    }
}

/// For each sample `(t_k, x_k)` of a real trajectory, finds the complex
/// trajectory crossing the real axis at `x_k` at time `t_k`.
pub fn real_from_crossings(
    w: &WaveModel,
    real_path: &TrajectoryPath,
    cfg: &IntegratorConfig,
) -> Result<CrossingReport> {
    if !real_path.is_completed() {
        return Err(Error::InvalidParameter("real trajectory must be completed".into()));
    }
    cfg.validate()?;
    let samples = real_path
        .samples
        .par_iter()
        .map(|&(t, z)| {
            let x = z.re;
            Ok(match crossing_launch(w, x, t, cfg)? {
                Ok((z0, leg, _)) => CrossingSample {
                    t,
                    x,
                    z0: Some(z0),
                    residual: Some(leg.last().1.im.abs()),
                    status: leg.status,
                },
                Err(aborted) => CrossingSample {
                    t,
                    x,
                    z0: None,
                    residual: None,
                    status: aborted.status,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CrossingReport { samples })
}
