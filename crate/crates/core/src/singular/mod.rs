//! Singularities of the complex dynamics: nodes of `psi_bar` (poles of the
//! complex velocity, carrying quantized vortices), self-intersection loops
//! of trajectories, and caustic envelopes of trajectory families.

mod caustics;
mod loops;
mod nodes;
mod winding;

use num_complex::Complex64;

pub use caustics::{detect_caustics, CAUSTIC_EPS};
pub use loops::{detect_loops, LoopReport, TrajectoryLoop};
pub use nodes::{find_nodes, node_line_angle, NODE_FIND_EPS};
pub use winding::{circle_contour, circulation, contour_winding, winding_number, WINDING_SAMPLES};

/// Axis-aligned rectangle of the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self { re_min, re_max, im_min, im_max }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    pub fn is_valid(&self) -> bool {
        [self.re_min, self.re_max, self.im_min, self.im_max].iter().all(|v| v.is_finite())
            && self.re_min < self.re_max
            && self.im_min < self.im_max
    }
}

/// A located zero of `psi_bar` at a fixed time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeRecord {
    pub z_node: Complex64,
    pub t: f64,
    /// `|psi_bar(z_node, t)|`.
    pub residual: f64,
    /// Phase winding of `psi_bar` on a small circle around the node.
    pub winding: i32,
}

/// A point where neighbouring members of a trajectory family are tangent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausticPoint {
    pub z: Complex64,
    pub t: f64,
    /// Index of the member whose neighbours `member - 1`, `member + 1`
    /// bracket the tangency.
    pub member_index: usize,
    /// `|sin|` of the angle between the time and family tangents.
    pub tangency_residual: f64,
}

/// Interference fraction (see [`crate::WaveModel::interference_fraction`]) above
/// which a point belongs to the node band.
pub const NODE_BAND_FRACTION: f64 = 0.5;

/// Largest interference fraction met along a path's samples.
pub fn peak_interference(path: &crate::TrajectoryPath, w: &crate::WaveModel) -> f64 {
    path.samples
        .iter()
        .map(|&(t, z)| w.interference_fraction(z, t))
        .fold(0.0, f64::max)
}

/// True when a path never enters the node band.
pub fn avoids_node_band(path: &crate::TrajectoryPath, w: &crate::WaveModel) -> bool {
    peak_interference(path, w) < NODE_BAND_FRACTION
}
