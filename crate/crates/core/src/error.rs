use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("packets must share mass and hbar (packet {index} differs)")]
    MixedParameters { index: usize },

    #[error("non-finite result at z = {z}, t = {t}")]
    NonFinite { z: Complex64, t: f64 },

    #[error("z = {z} at t = {t} is within the pole tolerance of a node (|psi| ratio {ratio:.3e})")]
    PoleProximity { z: Complex64, t: f64, ratio: f64 },

    #[error("x = {x} at t = {t} is at a node of the density (rho = {rho:.3e})")]
    NodeAtX { x: f64, t: f64, rho: f64 },

    #[error("contour around {center} passes through a node at t = {t}")]
    ContourThroughNode { center: Complex64, t: f64 },

    #[error("caustic detection needs at least 3 member paths, got {0}")]
    InsufficientFamily(usize),

    #[error("trajectory aborted ({status}) at t = {t}")]
    Aborted { status: crate::PathStatus, t: f64 },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
