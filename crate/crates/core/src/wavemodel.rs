//! Analytic free Gaussian packets and their normalized superposition,
//! continued to complex position `z`.
//!
//! Every packet is nodeless, so all evaluations are carried out on the
//! logarithm of each term and the superposition is formed after shifting by
//! the largest real exponent. Ratios such as the log-derivative and the
//! complex velocity therefore stay finite far from the real axis, where the
//! wave function itself grows like `exp(|Im z|^2)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad;

/// Relative size of `|psi|` (against the largest single-packet term) below
/// which a point is treated as a node for velocity evaluation.
pub const POLE_EPS: f64 = 1e-12;

/// Node threshold on the density, the square of [`POLE_EPS`].
pub const NODE_EPS: f64 = 1e-24;

// exp(709) is the largest power that stays finite in f64.
const MAX_EXPONENT: f64 = 709.0;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// One free Gaussian wave packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    /// Initial center.
    pub a: f64,
    /// Group velocity.
    pub v0: f64,
    /// Initial width.
    pub sigma0: f64,
    pub m: f64,
    pub hbar: f64,
}

impl GaussianPacket {
    pub fn new(a: f64, v0: f64, sigma0: f64, m: f64, hbar: f64) -> Result<Self> {
        let p = Self { a, v0, sigma0, m, hbar };
        p.validate()?;
        Ok(p)
    }

    /// Packet in units with `m = hbar = 1`.
    pub fn unit(a: f64, v0: f64, sigma0: f64) -> Result<Self> {
        Self::new(a, v0, sigma0, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("v0", self.v0)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, v) in [("sigma0", self.sigma0), ("m", self.m), ("hbar", self.hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn p0(&self) -> f64 {
        self.m * self.v0
    }

    pub fn energy(&self) -> f64 {
        let p = self.p0();
        p * p / (2.0 * self.m)
    }

    /// Center of the packet at time `t`.
    pub fn center(&self, t: f64) -> f64 {
        self.a + self.v0 * t
    }

    /// Complex spreading `sigma0 (1 + i hbar t / (2 m sigma0^2))`.
    pub fn complex_spreading(&self, t: f64) -> Complex64 {
        let s = self.sigma0;
        Complex64::new(s, self.hbar * t / (2.0 * self.m * s))
    }

    /// Real spreading, the modulus of [`Self::complex_spreading`].
    pub fn real_spreading(&self, t: f64) -> f64 {
        let tau = self.hbar * t / (2.0 * self.m * self.sigma0 * self.sigma0);
        self.sigma0 * (1.0 + tau * tau).sqrt()
    }

    /// `ln psi(z, t)` on the principal branch of the prefactor.
    pub fn log_value(&self, z: Complex64, t: f64) -> Complex64 {
        let st = self.complex_spreading(t);
        let d = z - self.center(t);
        let prefactor = -0.25 * (2.0 * PI).ln() - 0.5 * st.ln();
        prefactor - d * d / (4.0 * st * self.sigma0) + I * (self.p0() * z / self.hbar)
            - I * (self.energy() * t / self.hbar)
    }

    /// `psi(z, t)`; errors instead of overflowing.
    pub fn value(&self, z: Complex64, t: f64) -> Result<Complex64> {
        let l = self.log_value(z, t);
        if !(l.re <= MAX_EXPONENT && l.im.is_finite()) {
            return Err(Error::NonFinite { z, t });
        }
        let v = l.exp();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { z, t })
        }
    }

    /// Exact `psi'/psi`. The packet has no zeros so this is entire in `z`.
    pub fn log_derivative(&self, z: Complex64, t: f64) -> Complex64 {
        let st = self.complex_spreading(t);
        -(z - self.center(t)) / (2.0 * st * self.sigma0) + I * (self.p0() / self.hbar)
    }

    /// `d/dz` of [`Self::log_derivative`]; constant in `z`.
    fn log_derivative_slope(&self, t: f64) -> Complex64 {
        -1.0 / (2.0 * self.complex_spreading(t) * self.sigma0)
    }
}

/// Polar form `(modulus, phase)` with the phase on (-pi, pi] and the phase
/// of zero defined as zero.
pub fn polar_decompose(value: Complex64) -> (f64, f64) {
    let r = value.norm();
    if r == 0.0 {
        return (0.0, 0.0);
    }
    let mut phase = value.im.atan2(value.re);
    if phase <= -PI {
        phase = PI;
    }
    (r, phase)
}

/// A complex field value with its polar decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexFieldSample {
    pub z: Complex64,
    pub t: f64,
    pub value: Complex64,
    pub modulus: f64,
    pub phase: f64,
}

impl ComplexFieldSample {
    pub fn new(z: Complex64, t: f64, value: Complex64) -> Self {
        let (modulus, phase) = polar_decompose(value);
        Self { z, t, value, modulus, phase }
    }
}

/// Hydrodynamic fields on the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealFields {
    pub rho: f64,
    /// Phase action on (-pi hbar, pi hbar].
    pub s: f64,
    pub v: f64,
}

// Shifted partial sums of the superposition at one (z, t):
//   psi   = norm * exp(shift) * sum
//   psi'  = norm * exp(shift) * sum_g
//   psi'' = norm * exp(shift) * sum_gg
#[derive(Debug, Clone, Copy)]
struct Terms {
    shift: f64,
    sum: Complex64,
    sum_g: Complex64,
    sum_gg: Complex64,
    max_term: f64,
}

impl Terms {
    /// `|psi|` relative to the largest single-packet term.
    fn ratio(&self) -> f64 {
        self.sum.norm() / self.max_term
    }
}

/// Normalized superposition of free Gaussian packets.
#[derive(Debug, Clone)]
pub struct WaveModel {
    packets: Vec<GaussianPacket>,
    norm: f64,
}

impl WaveModel {
    /// Builds the superposition and fixes its normalizing prefactor by
    /// quadrature of `|sum psi_j(x, 0)|^2` on the real axis.
    pub fn new(packets: Vec<GaussianPacket>) -> Result<Self> {
        let first = *packets
            .first()
            .ok_or_else(|| Error::InvalidParameter("at least one packet is required".into()))?;
        for (index, p) in packets.iter().enumerate() {
            p.validate()?;
            if p.m != first.m || p.hbar != first.hbar {
                return Err(Error::MixedParameters { index });
            }
        }
        let mut model = Self { packets, norm: 1.0 };
        let integral = model.unnormalized_norm_integral();
        let norm = 1.0 / integral.sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "superposition cannot be normalized (integral {integral})"
            )));
        }
        model.norm = norm;
        Ok(model)
    }

    /// Single packet model.
    pub fn single(packet: GaussianPacket) -> Result<Self> {
        Self::new(vec![packet])
    }

    /// Two identical packets launched towards each other from `a = -8, 8`
    /// with `v0 = 2, -2`, `sigma0 = 1`, unit mass and `hbar = 1`.
    pub fn head_on_collision() -> Self {
        let packets = vec![
            GaussianPacket::unit(-8.0, 2.0, 1.0).expect("valid packet"),
            GaussianPacket::unit(8.0, -2.0, 1.0).expect("valid packet"),
        ];
        Self::new(packets).expect("valid model")
    }

    pub fn packets(&self) -> &[GaussianPacket] {
        &self.packets
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn mass(&self) -> f64 {
        self.packets[0].m
    }

    pub fn hbar(&self) -> f64 {
        self.packets[0].hbar
    }

    fn unnormalized_norm_integral(&self) -> f64 {
        let smax = self.packets.iter().map(|p| p.sigma0).fold(0.0, f64::max);
        let smin = self.packets.iter().map(|p| p.sigma0).fold(f64::INFINITY, f64::min);
        let amin = self.packets.iter().map(|p| p.a).fold(f64::INFINITY, f64::min);
        let amax = self.packets.iter().map(|p| p.a).fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = (amin - 12.0 * smax, amax + 12.0 * smax);

        let hbar = self.hbar();
        let kmax = self
            .packets
            .iter()
            .flat_map(|p| self.packets.iter().map(move |q| (p.p0() - q.p0()).abs() / hbar))
            .fold(0.0, f64::max);
        let mut h = 0.5 * smin;
        if kmax > 0.0 {
            h = h.min(2.0 * PI / kmax);
        }
        let panels = ((hi - lo) / h).ceil().max(1.0) as usize;
        quad::gl20().integrate_composite(lo, hi, panels, |x| {
            let terms = self.terms(Complex64::new(x, 0.0), 0.0);
            (2.0 * terms.shift).exp() * terms.sum.norm_sqr()
        })
    }

    fn terms(&self, z: Complex64, t: f64) -> Terms {
        let zero = Complex64::new(0.0, 0.0);
        let mut terms = Terms {
            shift: f64::NEG_INFINITY,
            sum: zero,
            sum_g: zero,
            sum_gg: zero,
            max_term: 0.0,
        };
        // streaming log-sum-exp: rescale the running sums whenever a larger
        // exponent shows up
        for p in &self.packets {
            let l = p.log_value(z, t);
            if l.re > terms.shift {
                let scale = (terms.shift - l.re).exp();
                terms.sum *= scale;
                terms.sum_g *= scale;
                terms.sum_gg *= scale;
                terms.max_term *= scale;
                terms.shift = l.re;
            }
            let w = (l - terms.shift).exp();
            let g = p.log_derivative(z, t);
            terms.sum += w;
            terms.sum_g += w * g;
            terms.sum_gg += w * (g * g + p.log_derivative_slope(t));
            terms.max_term = terms.max_term.max(w.norm());
        }
        terms
    }

    fn scaled(&self, terms: &Terms, v: Complex64, z: Complex64, t: f64) -> Result<Complex64> {
        if terms.shift > MAX_EXPONENT || !terms.shift.is_finite() {
            return Err(Error::NonFinite { z, t });
        }
        let out = v * (self.norm * terms.shift.exp());
        if out.is_finite() {
            Ok(out)
        } else {
            Err(Error::NonFinite { z, t })
        }
    }

    /// The continued wave function `N * sum_j psi_j(z, t)`.
    pub fn psi_bar(&self, z: Complex64, t: f64) -> Result<Complex64> {
        let terms = self.terms(z, t);
        self.scaled(&terms, terms.sum, z, t)
    }

    /// `(psi, dpsi/dz)`, both analytic.
    pub fn psi_and_gradient(&self, z: Complex64, t: f64) -> Result<(Complex64, Complex64)> {
        let terms = self.terms(z, t);
        Ok((self.scaled(&terms, terms.sum, z, t)?, self.scaled(&terms, terms.sum_g, z, t)?))
    }

    /// `|psi|` divided by the largest single-packet magnitude at `(z, t)`;
    /// finite even where `psi` itself overflows.
    pub fn node_ratio(&self, z: Complex64, t: f64) -> f64 {
        self.terms(z, t).ratio()
    }

    /// Sum of the non-dominant packet magnitudes relative to the dominant
    /// one. Zeros of the superposition need this to reach 1, so nodes only
    /// occur where it is of order one.
    pub fn interference_fraction(&self, z: Complex64, t: f64) -> f64 {
        let logs: Vec<f64> = self.packets.iter().map(|p| p.log_value(z, t).re).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        logs.iter().map(|l| (l - top).exp()).sum::<f64>() - 1.0
    }

    /// Polar sample of `psi_bar`.
    pub fn sample(&self, z: Complex64, t: f64) -> Result<ComplexFieldSample> {
        Ok(ComplexFieldSample::new(z, t, self.psi_bar(z, t)?))
    }

    fn checked_log_derivative(&self, terms: &Terms, z: Complex64, t: f64) -> Result<Complex64> {
        if !z.is_finite() || !terms.shift.is_finite() {
            return Err(Error::NonFinite { z, t });
        }
        let ratio = terms.ratio();
        if !(ratio >= POLE_EPS) {
            return Err(Error::PoleProximity { z, t, ratio });
        }
        let l = terms.sum_g / terms.sum;
        if l.is_finite() {
            Ok(l)
        } else {
            Err(Error::NonFinite { z, t })
        }
    }

    /// `psi'/psi` of the superposition.
    pub fn log_derivative(&self, z: Complex64, t: f64) -> Result<Complex64> {
        let terms = self.terms(z, t);
        self.checked_log_derivative(&terms, z, t)
    }

    /// Complex velocity `(hbar / i m) psi'/psi`.
    pub fn v_bar(&self, z: Complex64, t: f64) -> Result<Complex64> {
        let l = self.log_derivative(z, t)?;
        Ok(-I * (self.hbar() / self.mass()) * l)
    }

    /// Complex velocity together with its `z`-derivative and the node ratio.
    pub fn v_bar_with_slope(&self, z: Complex64, t: f64) -> Result<(Complex64, Complex64, f64)> {
        let terms = self.terms(z, t);
        let l = self.checked_log_derivative(&terms, z, t)?;
        let second = terms.sum_gg / terms.sum;
        let k = -I * (self.hbar() / self.mass());
        let slope = k * (second - l * l);
        if !slope.is_finite() {
            return Err(Error::NonFinite { z, t });
        }
        Ok((k * l, slope, terms.ratio()))
    }

    /// Probability density on the real axis; zero at nodes, no error.
    pub fn density(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.psi_bar(Complex64::new(x, 0.0), t)?.norm_sqr())
    }

    /// Probability current `(hbar/m) Im(psi* psi')`, smooth through nodes.
    pub fn current(&self, x: f64, t: f64) -> Result<f64> {
        let (psi, grad) = self.psi_and_gradient(Complex64::new(x, 0.0), t)?;
        Ok(self.hbar() / self.mass() * (psi.conj() * grad).im)
    }

    fn real_terms(&self, x: f64, t: f64) -> Result<(Terms, f64)> {
        let z = Complex64::new(x, 0.0);
        let terms = self.terms(z, t);
        let rho = self.scaled(&terms, terms.sum, z, t)?.norm_sqr();
        let r = terms.ratio();
        if !(r * r >= NODE_EPS) {
            return Err(Error::NodeAtX { x, t, rho });
        }
        Ok((terms, rho))
    }

    /// `(rho, S, v)` with `S = hbar arg psi` and `v = (hbar/m) Im(psi'/psi)`.
    pub fn real_fields(&self, x: f64, t: f64) -> Result<RealFields> {
        let (terms, rho) = self.real_terms(x, t)?;
        let (_, phase) = polar_decompose(terms.sum);
        let l = terms.sum_g / terms.sum;
        Ok(RealFields {
            rho,
            s: self.hbar() * phase,
            v: self.hbar() / self.mass() * l.im,
        })
    }

    /// Real Bohmian velocity; equal to `Re v_bar` on the real axis.
    pub fn real_velocity(&self, x: f64, t: f64) -> Result<f64> {
        let l = self.log_derivative(Complex64::new(x, 0.0), t)?;
        Ok(self.hbar() / self.mass() * l.im)
    }

    /// Quantum potential `-(hbar^2/2m) (rho^1/2)''/rho^1/2` from the analytic
    /// first and second log-derivatives.
    pub fn quantum_potential(&self, x: f64, t: f64) -> Result<f64> {
        let (terms, _) = self.real_terms(x, t)?;
        let l = terms.sum_g / terms.sum;
        let second = terms.sum_gg / terms.sum;
        // (ln R)' = Re L, (ln R)'' = Re(psi''/psi - L^2)
        let lap_over_r = (second - l * l).re + l.re * l.re;
        let hbar = self.hbar();
        Ok(-hbar * hbar / (2.0 * self.mass()) * lap_over_r)
    }
}
