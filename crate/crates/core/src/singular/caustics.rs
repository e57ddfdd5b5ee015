use num_complex::Complex64;

use super::CausticPoint;
use crate::error::{Error, Result};
use crate::integrate::TrajectoryPath;

/// Acceptance threshold on the normalized tangency cross product.
pub const CAUSTIC_EPS: f64 = 1e-6;

const BISECTIONS: usize = 80;

/// Cubic Lagrange interpolant of one member through four samples.
struct Local {
    t: [f64; 4],
    z: [Complex64; 4],
}

impl Local {
    fn new(samples: &[(f64, Complex64)], start: usize) -> Self {
        let mut t = [0.0; 4];
        let mut z = [Complex64::new(0.0, 0.0); 4];
        for k in 0..4 {
            t[k] = samples[start + k].0;
            z[k] = samples[start + k].1;
        }
        Self { t, z }
    }

    fn value(&self, x: f64) -> Complex64 {
        let mut out = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            let mut l = 1.0;
            for j in 0..4 {
                if j != i {
                    l *= (x - self.t[j]) / (self.t[i] - self.t[j]);
                }
            }
            out += self.z[i] * l;
        }
        out
    }

    fn derivative(&self, x: f64) -> Complex64 {
        let mut out = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            let mut dl = 0.0;
            for m in 0..4 {
                if m == i {
                    continue;
                }
                let mut term = 1.0 / (self.t[i] - self.t[m]);
                for j in 0..4 {
                    if j != i && j != m {
                        term *= (x - self.t[j]) / (self.t[i] - self.t[j]);
                    }
                }
                dl += term;
            }
            out += self.z[i] * dl;
        }
        out
    }
}

fn normalized_cross(along_t: Complex64, along_s: Complex64) -> f64 {
    let denom = along_t.norm() * along_s.norm();
    if denom == 0.0 {
        return 0.0;
    }
    (along_t.conj() * along_s).im / denom
}

/// Envelope points of a family of trajectories ordered by a family
/// parameter `s` (their index) and sampled on a common time grid.
///
/// The Jacobian `dz/dt x dz/ds` of the map `(t, s) -> z` is estimated by
/// central differences; where it changes sign along `t` for a fixed member
/// the neighbouring trajectories are tangent, and the crossing is refined by
/// bisection on cubic interpolants of the three members involved.
pub fn detect_caustics(paths: &[&TrajectoryPath]) -> Result<Vec<CausticPoint>> {
    if paths.len() < 3 {
        return Err(Error::InsufficientFamily(paths.len()));
    }
    let len = paths.iter().map(|p| p.samples.len()).min().unwrap_or(0);
    let grid: Vec<f64> = paths[0].samples[..len].iter().map(|s| s.0).collect();
    for p in paths {
        let same = p.samples[..len].iter().zip(&grid).all(|(s, t)| (s.0 - t).abs() <= 1e-9);
        if !same {
            return Err(Error::InvalidParameter(
                "family members must share a common time grid".into(),
            ));
        }
    }
    if len < 4 {
        return Ok(Vec::new());
    }

    let mut points = Vec::new();
    for s in 1..paths.len() - 1 {
        let (prev, cur, next) = (&paths[s - 1].samples, &paths[s].samples, &paths[s + 1].samples);
        let cross_at = |k: usize| {
            let dt = (cur[k + 1].1 - cur[k - 1].1) / (grid[k + 1] - grid[k - 1]);
            let ds = 0.5 * (next[k].1 - prev[k].1);
            normalized_cross(dt, ds)
        };
        // Index and value of the last sample with a nonzero cross product,
        // so that a zero landing exactly on a grid time is still bracketed.
        let mut last: Option<(usize, f64)> = None;
        for k in 1..len - 1 {
            let value = cross_at(k);
            if value == 0.0 {
                continue;
            }
            if let Some((j, prev_value)) = last {
                if prev_value.signum() != value.signum() {
                    if let Some(p) = refine(prev, cur, next, j, k, len, s) {
                        points.push(p);
                    }
                }
            }
            last = Some((k, value));
        }
    }
    Ok(points)
}

fn refine(
    prev: &[(f64, Complex64)],
    cur: &[(f64, Complex64)],
    next: &[(f64, Complex64)],
    lo: usize,
    hi: usize,
    len: usize,
    member_index: usize,
) -> Option<CausticPoint> {
    let start = lo.saturating_sub(1).min(len - 4);
    let (lp, lc, ln) = (Local::new(prev, start), Local::new(cur, start), Local::new(next, start));
    let cross = |t: f64| normalized_cross(lc.derivative(t), 0.5 * (ln.value(t) - lp.value(t)));

    // The interpolant's zero can sit just outside the flagged interval when
    // it falls on a grid time; widen by one sample on each side if needed.
    let bracket = [(lo, hi), (lo.saturating_sub(1), hi), (lo, (hi + 1).min(len - 1))]
        .into_iter()
        .filter(|&(i, j)| i >= start && j <= start + 3 && i < j)
        .map(|(i, j)| (cur[i].0, cur[j].0))
        .find(|&(a, b)| {
            let (fa, fb) = (cross(a), cross(b));
            fa == 0.0 || fb == 0.0 || fa.signum() != fb.signum()
        })?;
    let (mut a, mut b) = bracket;
    let mut fa = cross(a);
    if fa == 0.0 {
        b = a;
    }
    for _ in 0..BISECTIONS {
        if a == b {
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = cross(mid);
        if fm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let t = 0.5 * (a + b);
    let residual = cross(t).abs();
    (residual < CAUSTIC_EPS).then(|| CausticPoint {
        z: lc.value(t),
        t,
        member_index,
        tangency_residual: residual,
    })
}
