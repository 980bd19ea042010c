//! 2x2 complex matrices over the (theta, phi) polarization basis, used for
//! per-ray phase/XPR coupling and for polarimetric target responses.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A 2x2 complex matrix indexed by (origin, arrival) polarization: `tt`
/// couples theta to theta, `tp` theta to phi, and so on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarMatrix {
    pub tt: Complex64,
    pub tp: Complex64,
    pub pt: Complex64,
    pub pp: Complex64,
}

impl PolarMatrix {
    pub fn new(tt: Complex64, tp: Complex64, pt: Complex64, pp: Complex64) -> Self {
        Self { tt, tp, pt, pp }
    }

    pub fn identity() -> Self {
        Self::diagonal(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn diagonal(a: Complex64, b: Complex64) -> Self {
        Self {
            tt: a,
            tp: Complex64::new(0.0, 0.0),
            pt: Complex64::new(0.0, 0.0),
            pp: b,
        }
    }

    /// Per-ray coupling matrix: unit-modulus random phases on the diagonal,
    /// cross terms attenuated by 1/sqrt(xpr). An infinite XPR yields zero
    /// cross-polar leakage.
    pub fn from_phases_xpr(phases: &[f64; 4], xpr_linear: f64) -> Self {
        let cross = (1.0 / xpr_linear).sqrt();
        Self {
            tt: Complex64::from_polar(1.0, phases[0]),
            tp: cross * Complex64::from_polar(1.0, phases[1]),
            pt: cross * Complex64::from_polar(1.0, phases[2]),
            pp: Complex64::from_polar(1.0, phases[3]),
        }
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self {
            tt: self.tt * k,
            tp: self.tp * k,
            pt: self.pt * k,
            pp: self.pp * k,
        }
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &PolarMatrix) -> Self {
        Self {
            tt: self.tt * rhs.tt + self.tp * rhs.pt,
            tp: self.tt * rhs.tp + self.tp * rhs.pp,
            pt: self.pt * rhs.tt + self.pp * rhs.pt,
            pp: self.pt * rhs.tp + self.pp * rhs.pp,
        }
    }

    /// Quadratic form rx^T * M * tx with 2-element field vectors.
    pub fn bilinear(&self, rx: (Complex64, Complex64), tx: (Complex64, Complex64)) -> Complex64 {
        rx.0 * (self.tt * tx.0 + self.tp * tx.1) + rx.1 * (self.pt * tx.0 + self.pp * tx.1)
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.tt.norm_sqr() + self.tp.norm_sqr() + self.pt.norm_sqr() + self.pp.norm_sqr()
    }
}
