//! Complex quantum Hamilton-Jacobi dynamics of colliding Gaussian wave packets.
//!
//! The crate evaluates the analytically continued wave function of a
//! superposition of free Gaussian packets on the complex (Argand) plane,
//! propagates complex and real (Bohmian) quantum trajectories, builds
//! isochrone families, and locates the singularities that organise the
//! complex dynamics: nodes carrying quantized vortices, and caustics.
//!
//! Modules:
//!
//! * [`wavemodel`] analytic wave function, velocity and hydrodynamic fields
//! * [`integrate`] adaptive Dormand-Prince propagation of trajectories
//! * [`isochrone`] families of trajectories crossing the real axis together
//! * [`singular`] nodes, winding numbers, circulation, loops and caustics
//! * [`gridio`] field sampling, conservation diagnostics and CSV output

pub mod error;
pub mod gridio;
pub mod integrate;
pub mod isochrone;
pub mod quad;
pub mod singular;
pub mod wavemodel;

pub use error::{Error, Result};
pub use integrate::{IntegratorConfig, PathKind, PathStatus, TrajectoryPath};
pub use isochrone::{IsochroneFamily, IsochroneMember};
pub use num_complex::Complex64;
pub use singular::{CausticPoint, NodeRecord, Rect};

pub use wavemodel::{ComplexFieldSample, GaussianPacket, RealFields, WaveModel};
