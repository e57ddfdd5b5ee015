use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad;
use crate::wavemodel::{WaveModel, POLE_EPS};

/// Starting sample count for circle windings.
pub const WINDING_SAMPLES: usize = 64;
const MAX_SAMPLES: usize = 4096;
const REFINE_ROUNDS: usize = 3;
// Largest phase step accepted between consecutive contour samples.
const MAX_PHASE_STEP: f64 = PI / 2.0;

/// `n` points on a circle, counter-clockwise from angle 0.
pub fn circle_contour(center: Complex64, radius: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| center + Complex64::from_polar(radius, TAU * k as f64 / n as f64))
        .collect()
}

// Unscaled psi values are not needed: the phase of psi equals the phase of
// the shifted sum, and the node ratio decides closeness to a node.
fn phase_and_ratio(w: &WaveModel, z: Complex64, t: f64) -> Result<(Complex64, f64)> {
    let ratio = w.node_ratio(z, t);
    if !ratio.is_finite() {
        return Err(Error::NonFinite { z, t });
    }
    let psi = w.psi_bar(z, t)?;
    Ok((psi, ratio))
}

/// Winding number of `psi_bar` around a circle, by unwrapping the phase
/// over `n_samples` points (doubled until every step is below pi/2, capped
/// at 4096).
pub fn winding_number(
    w: &WaveModel,
    center: Complex64,
    radius: f64,
    t: f64,
    n_samples: usize,
) -> Result<i32> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be > 0, got {radius}")));
    }
    let mut n = n_samples.max(8);
    let mut near_node_rounds = 0;
    loop {
        let mut values = Vec::with_capacity(n);
        let mut touches = false;
        for z in circle_contour(center, radius, n) {
            let (psi, ratio) = phase_and_ratio(w, z, t)?;
            touches |= ratio < POLE_EPS;
            values.push(psi);
        }
        if touches {
            near_node_rounds += 1;
            if near_node_rounds >= REFINE_ROUNDS || n >= MAX_SAMPLES {
                return Err(Error::ContourThroughNode { center, t });
            }
            n *= 2;
            continue;
        }
        let mut total = 0.0;
        let mut smooth = true;
        for k in 0..n {
            let step = (values[(k + 1) % n] / values[k]).arg();
            smooth &= step.abs() < MAX_PHASE_STEP;
            total += step;
        }
        if smooth || n >= MAX_SAMPLES {
            return Ok((total / TAU).round() as i32);
        }
        n *= 2;
    }
}

/// Winding number of `psi_bar` along a closed polygon (the last vertex
/// joins the first). Edges are bisected until each phase step is below
/// pi/2.
pub fn contour_winding(w: &WaveModel, polygon: &[Complex64], t: f64) -> Result<i32> {
    if polygon.len() < 3 {
        return Err(Error::InvalidParameter("contour needs at least 3 vertices".into()));
    }
    let center = polygon.iter().sum::<Complex64>() / polygon.len() as f64;
    let eval = |z: Complex64| -> Result<Complex64> {
        let (psi, ratio) = phase_and_ratio(w, z, t)?;
        if ratio < POLE_EPS {
            return Err(Error::ContourThroughNode { center, t });
        }
        Ok(psi)
    };
    let mut total = 0.0;
    let n = polygon.len();
    for k in 0..n {
        let (a, b) = (polygon[k], polygon[(k + 1) % n]);
        total += edge_phase(&eval, a, b, eval(a)?, eval(b)?, 0, center, t)?;
    }
    Ok((total / TAU).round() as i32)
}

#[allow(clippy::too_many_arguments)]
fn edge_phase<F: Fn(Complex64) -> Result<Complex64>>(
    eval: &F,
    a: Complex64,
    b: Complex64,
    fa: Complex64,
    fb: Complex64,
    depth: usize,
    center: Complex64,
    t: f64,
) -> Result<f64> {
    let step = (fb / fa).arg();
    if step.abs() < MAX_PHASE_STEP && depth > 0 {
        return Ok(step);
    }
    if depth >= 24 {
        return Err(Error::ContourThroughNode { center, t });
    }
    let mid = 0.5 * (a + b);
    let fm = eval(mid)?;
    Ok(edge_phase(eval, a, mid, fa, fm, depth + 1, center, t)?
        + edge_phase(eval, mid, b, fm, fb, depth + 1, center, t)?)
}

/// Circulation `closed integral of m v_bar dz` along a closed polygon, by
/// adaptive Gauss-Legendre quadrature on each edge. The value is
/// `2 pi hbar` times the enclosed winding.
pub fn circulation(contour: &[Complex64], w: &WaveModel, t: f64) -> Result<f64> {
    if contour.len() < 3 {
        return Err(Error::InvalidParameter("contour needs at least 3 vertices".into()));
    }
    let center = contour.iter().sum::<Complex64>() / contour.len() as f64;
    let m = w.mass();
    let momentum = |z: Complex64| -> Result<Complex64> {
        match w.v_bar(z, t) {
            Ok(v) => Ok(m * v),
            Err(Error::PoleProximity { .. }) => Err(Error::ContourThroughNode { center, t }),
            Err(e) => Err(e),
        }
    };
    let n = contour.len();
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let (a, b) = (contour[k], contour[(k + 1) % n]);
        let whole = segment_integral(&momentum, a, b)?;
        total += adaptive_segment(&momentum, a, b, whole, 0)?;
    }
    Ok(total.re)
}

fn segment_integral<F: Fn(Complex64) -> Result<Complex64>>(
    f: &F,
    a: Complex64,
    b: Complex64,
) -> Result<Complex64> {
    let rule = quad::gl16();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = Complex64::new(0.0, 0.0);
    for (x, wgt) in rule.nodes.iter().zip(&rule.weights) {
        sum += f(mid + half * *x)? * *wgt;
    }
    Ok(sum * half)
}

fn adaptive_segment<F: Fn(Complex64) -> Result<Complex64>>(
    f: &F,
    a: Complex64,
    b: Complex64,
    whole: Complex64,
    depth: usize,
) -> Result<Complex64> {
    let mid = 0.5 * (a + b);
    let left = segment_integral(f, a, mid)?;
    let right = segment_integral(f, mid, b)?;
    let refined = left + right;
    if (refined - whole).norm() <= 1e-13 * refined.norm().max(1.0) || depth >= 30 {
        return Ok(refined);
    }
    Ok(adaptive_segment(f, a, mid, left, depth + 1)? + adaptive_segment(f, mid, b, right, depth + 1)?)
}
