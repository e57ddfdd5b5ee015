use num_complex::Complex64;
use rayon::prelude::*;

use super::{winding_number, NodeRecord, Rect, WINDING_SAMPLES};
use crate::error::{Error, Result};
use crate::wavemodel::WaveModel;

/// Node acceptance threshold on `|psi_bar|`, relative to the peak of
/// `|psi_bar|` over the search grid.
pub const NODE_FIND_EPS: f64 = 1e-10;

const DEDUP_DIST: f64 = 1e-6;
const MAX_NEWTON: usize = 50;
const MAX_WINDING_RADIUS: f64 = 0.2;

/// Finds the zeros of `psi_bar(., t)` inside `region`.
///
/// Cells of a `grid_n x grid_n` mesh on which both the real and imaginary
/// parts change sign seed a damped complex Newton iteration. Converged
/// points are merged, then kept only if the phase winds around them.
/// The result is sorted by real part, then imaginary part.
pub fn find_nodes(w: &WaveModel, t: f64, region: Rect, grid_n: usize) -> Result<Vec<NodeRecord>> {
    if grid_n < 16 {
        return Err(Error::InvalidParameter(format!("grid_n must be >= 16, got {grid_n}")));
    }
    if !region.is_valid() {
        return Err(Error::InvalidParameter(format!("invalid search region {region:?}")));
    }
    let dx = (region.re_max - region.re_min) / grid_n as f64;
    let dy = (region.im_max - region.im_min) / grid_n as f64;
    let vertex = |i: usize, j: usize| {
        Complex64::new(region.re_min + i as f64 * dx, region.im_min + j as f64 * dy)
    };

    let values = (0..=grid_n)
        .into_par_iter()
        .map(|i| (0..=grid_n).map(|j| w.psi_bar(vertex(i, j), t)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let peak = values.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    let tol = NODE_FIND_EPS * peak;

    let straddles = |f: &dyn Fn(Complex64) -> f64, corners: &[Complex64; 4]| {
        let lo = corners.iter().map(|c| f(*c)).fold(f64::INFINITY, f64::min);
        let hi = corners.iter().map(|c| f(*c)).fold(f64::NEG_INFINITY, f64::max);
        lo <= 0.0 && hi >= 0.0
    };
    let mut seeds = Vec::new();
    for i in 0..grid_n {
        for j in 0..grid_n {
            let corners = [values[i][j], values[i + 1][j], values[i][j + 1], values[i + 1][j + 1]];
            if straddles(&|c| c.re, &corners) && straddles(&|c| c.im, &corners) {
                seeds.push(vertex(i, j) + Complex64::new(0.5 * dx, 0.5 * dy));
            }
        }
    }

    let converged: Vec<(Complex64, f64)> = seeds
        .par_iter()
        .filter_map(|&seed| newton(w, seed, t))
        .filter(|&(z, r)| r < tol && region.contains(z))
        .collect();

    let mut candidates: Vec<(Complex64, f64)> = Vec::new();
    for (z, r) in converged {
        match candidates.iter_mut().find(|(c, _)| (c - z).norm() < DEDUP_DIST) {
            Some(existing) if r < existing.1 => *existing = (z, r),
            Some(_) => {}
            None => candidates.push((z, r)),
        }
    }

    let mut nodes: Vec<NodeRecord> = candidates
        .par_iter()
        .enumerate()
        .filter_map(|(k, &(z, residual))| {
            let nearest = candidates
                .iter()
                .enumerate()
                .filter(|(m, _)| *m != k)
                .map(|(_, (c, _))| (c - z).norm())
                .fold(f64::INFINITY, f64::min);
            let radius = (0.5 * nearest).min(MAX_WINDING_RADIUS);
            match winding_number(w, z, radius, t, WINDING_SAMPLES) {
                Ok(winding) if winding != 0 => Some(NodeRecord { z_node: z, t, residual, winding }),
                _ => None,
            }
        })
        .collect();
    nodes.sort_by(|a, b| {
        a.z_node
            .re
            .total_cmp(&b.z_node.re)
            .then(a.z_node.im.total_cmp(&b.z_node.im))
    });
    Ok(nodes)
}

// Damped Newton on psi_bar; returns the last iterate and |psi_bar| there.
fn newton(w: &WaveModel, seed: Complex64, t: f64) -> Option<(Complex64, f64)> {
    let mut z = seed;
    let (mut f, mut g) = w.psi_and_gradient(z, t).ok()?;
    for _ in 0..MAX_NEWTON {
        if f.norm() == 0.0 {
            break;
        }
        let mut step = f / g;
        if !step.is_finite() {
            break;
        }
        let mut improved = None;
        for _ in 0..40 {
            let trial = z - step;
            if let Ok((ft, gt)) = w.psi_and_gradient(trial, t) {
                if ft.norm() < f.norm() {
                    improved = Some((trial, ft, gt));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((zn, fnew, gnew)) = improved else {
            break;
        };
        let moved = (zn - z).norm();
        z = zn;
        f = fnew;
        g = gnew;
        if moved <= 1e-15 * z.norm().max(1.0) {
            break;
        }
    }
    Some((z, f.norm()))
}

/// Orientation of the line fitted (total least squares) through the
/// `count` nodes nearest the centroid of `nodes`, as an angle on
/// (-pi/2, pi/2] measured counter-clockwise from the real axis.
pub fn node_line_angle(nodes: &[NodeRecord], count: usize) -> Option<f64> {
    if nodes.len() < 2 || count < 2 {
        return None;
    }
    let centroid = nodes.iter().map(|n| n.z_node).sum::<Complex64>() / nodes.len() as f64;
    let mut sorted: Vec<Complex64> = nodes.iter().map(|n| n.z_node).collect();
    sorted.sort_by(|a, b| (a - centroid).norm().total_cmp(&(b - centroid).norm()));
    sorted.truncate(count);
    let mean = sorted.iter().sum::<Complex64>() / sorted.len() as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for z in &sorted {
        let d = z - mean;
        sxx += d.re * d.re;
        syy += d.im * d.im;
        sxy += d.re * d.im;
    }
    let mut angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    if angle <= -std::f64::consts::FRAC_PI_2 {
        angle += std::f64::consts::PI;
    }
    Some(angle)
}
