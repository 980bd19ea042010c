//! Antenna array layouts, element radiation patterns, and array phase terms.
//!
//! Arrays are explicit element position lists relative to a reference point,
//! with helpers for uniform linear/planar layouts. Broadside is fixed along
//! +x: linear arrays extend along +y, planar arrays span the y-z plane.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{Point3, SphericalAngles};

/// Element radiation pattern family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    /// Unit gain in every direction.
    Isotropic,
    /// The standard directional sector element: 65 deg half-power beamwidth
    /// in both cuts, 30 dB floor, 8 dBi peak gain.
    Sector38901,
}

/// A dual-polarized antenna element: pattern family plus polarization slant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementPattern {
    pub kind: PatternKind,
    /// Polarization slant angle in radians; 0 is pure vertical (theta)
    /// polarization, pi/2 pure horizontal (phi).
    pub polarization_slant: f64,
}

impl ElementPattern {
    pub fn isotropic() -> Self {
        Self {
            kind: PatternKind::Isotropic,
            polarization_slant: 0.0,
        }
    }

    pub fn sector(polarization_slant: f64) -> Self {
        Self {
            kind: PatternKind::Sector38901,
            polarization_slant,
        }
    }

    /// Scalar element power gain (linear) in the given direction.
    pub fn power_gain(&self, angles: &SphericalAngles) -> f64 {
        match self.kind {
            PatternKind::Isotropic => 1.0,
            PatternKind::Sector38901 => {
                let theta_deg = angles.zenith_deg();
                let phi_deg = angles.azimuth_deg();
                let att_v = (12.0 * ((theta_deg - 90.0) / 65.0).powi(2)).min(30.0);
                let att_h = (12.0 * (phi_deg / 65.0).powi(2)).min(30.0);
                let att = (att_v + att_h).min(30.0);
                10f64.powf((8.0 - att) / 10.0)
            }
        }
    }

    /// Theta- and phi-polarized field components in the given direction.
    ///
    /// The element gain envelope is applied before the polarization
    /// decomposition, so |f_theta|^2 + |f_phi|^2 equals the scalar gain.
    pub fn field_response(&self, angles: &SphericalAngles) -> (Complex64, Complex64) {
        let amplitude = self.power_gain(angles).sqrt();
        let (s, c) = self.polarization_slant.sin_cos();
        (
            Complex64::new(amplitude * c, 0.0),
            Complex64::new(amplitude * s, 0.0),
        )
    }
}

/// Antenna element positions relative to an array reference point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub reference_point: Point3,
    /// Element location vectors in meters, relative to the reference point.
    pub element_positions: Vec<Point3>,
}

impl ArrayGeometry {
    /// A single element at the reference point.
    pub fn single(reference_point: Point3) -> Self {
        Self {
            reference_point,
            element_positions: vec![Point3::default()],
        }
    }

    /// Uniform linear array along +y (broadside +x), centered on the
    /// reference point.
    pub fn uniform_linear(reference_point: Point3, count: usize, spacing_m: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::Config("array must have at least one element".into()));
        }
        let mid = (count as f64 - 1.0) / 2.0;
        let element_positions = (0..count)
            .map(|i| Point3::new(0.0, (i as f64 - mid) * spacing_m, 0.0))
            .collect();
        Ok(Self {
            reference_point,
            element_positions,
        })
    }

    /// Uniform planar array in the y-z plane (broadside +x), centered on the
    /// reference point. `rows` counts along z, `cols` along y.
    pub fn uniform_planar(
        reference_point: Point3,
        rows: usize,
        cols: usize,
        spacing_m: f64,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Config("array must have at least one element".into()));
        }
        let mid_r = (rows as f64 - 1.0) / 2.0;
        let mid_c = (cols as f64 - 1.0) / 2.0;
        let mut element_positions = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                element_positions.push(Point3::new(
                    0.0,
                    (c as f64 - mid_c) * spacing_m,
                    (r as f64 - mid_r) * spacing_m,
                ));
            }
        }
        Ok(Self {
            reference_point,
            element_positions,
        })
    }

    /// An array from explicit element offsets.
    pub fn explicit(reference_point: Point3, element_positions: Vec<Point3>) -> Result<Self> {
        if element_positions.is_empty() {
            return Err(Error::Config("array must have at least one element".into()));
        }
        Ok(Self {
            reference_point,
            element_positions,
        })
    }

    pub fn count(&self) -> usize {
        self.element_positions.len()
    }
}

/// Array phase term exp(j 2 pi (r_hat . d) / lambda) for one element offset
/// and one ray direction. Always unit modulus.
pub fn array_phase(
    element_offset: &Point3,
    direction: &SphericalAngles,
    wavelength: f64,
) -> Result<Complex64> {
    if !(wavelength > 0.0) || !wavelength.is_finite() {
        return Err(Error::InvalidCarrier(format!(
            "wavelength must be positive and finite, got {wavelength}"
        )));
    }
    let r_hat = direction.unit_vector();
    let phase = TAU * r_hat.dot(element_offset) / wavelength;
    Ok(Complex64::from_polar(1.0, phase))
}
