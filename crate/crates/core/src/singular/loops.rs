use num_complex::Complex64;

use super::contour_winding;
use crate::integrate::TrajectoryPath;
use crate::wavemodel::WaveModel;

/// A closed loop cut out of a trajectory by one of its self-intersections.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLoop {
    /// Self-intersection point.
    pub point: Complex64,
    pub t_start: f64,
    pub t_end: f64,
    /// +1 for a counter-clockwise loop, -1 for clockwise.
    pub orientation: i32,
    /// Winding of `psi_bar` along the loop boundary at the loop's mid-time;
    /// `None` when the boundary runs through a node.
    pub winding: Option<i32>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoopReport {
    pub loops: Vec<TrajectoryLoop>,
}

impl LoopReport {
    pub fn count(&self) -> usize {
        self.loops.len()
    }
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

// Parameters (s, u) in (0, 1) of a proper crossing of segments p0p1, q0q1.
fn intersect(p0: Complex64, p1: Complex64, q0: Complex64, q1: Complex64) -> Option<(f64, f64)> {
    let r = p1 - p0;
    let s = q1 - q0;
    let denom = cross(r, s);
    if denom == 0.0 {
        return None;
    }
    let qp = q0 - p0;
    let a = cross(qp, s) / denom;
    let b = cross(qp, r) / denom;
    (a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0).then_some((a, b))
}

/// Finds the closed loops of a complex trajectory's polyline. Works on
/// partial (aborted) paths as well.
pub fn detect_loops(path: &TrajectoryPath, w: &WaveModel) -> LoopReport {
    let pts = &path.samples;
    let n = pts.len();
    let mut loops = Vec::new();
    if n < 4 {
        return LoopReport { loops };
    }
    let bbox = |i: usize| {
        let (a, b) = (pts[i].1, pts[i + 1].1);
        (a.re.min(b.re), a.re.max(b.re), a.im.min(b.im), a.im.max(b.im))
    };
    for i in 0..n - 1 {
        let bi = bbox(i);
        for j in i + 2..n - 1 {
            let bj = bbox(j);
            if bi.1 < bj.0 || bj.1 < bi.0 || bi.3 < bj.2 || bj.3 < bi.2 {
                continue;
            }
            let Some((a, b)) = intersect(pts[i].1, pts[i + 1].1, pts[j].1, pts[j + 1].1) else {
                continue;
            };
            let point = pts[i].1 + a * (pts[i + 1].1 - pts[i].1);
            let t_start = pts[i].0 + a * (pts[i + 1].0 - pts[i].0);
            let t_end = pts[j].0 + b * (pts[j + 1].0 - pts[j].0);
            let mut polygon = Vec::with_capacity(j - i + 1);
            polygon.push(point);
            polygon.extend(pts[i + 1..=j].iter().map(|s| s.1));
            let area: f64 = (0..polygon.len())
                .map(|k| cross(polygon[k], polygon[(k + 1) % polygon.len()]))
                .sum();
            let orientation = if area >= 0.0 { 1 } else { -1 };
            let winding = if polygon.len() >= 3 {
                contour_winding(w, &polygon, 0.5 * (t_start + t_end)).ok()
            } else {
                None
            };
            loops.push(TrajectoryLoop { point, t_start, t_end, orientation, winding });
        }
    }
    LoopReport { loops }
}
