//! Coordinate arithmetic for TX/RX/target geometry: 3D distances, LoS angles,
//! spherical unit vectors, and cascade delay conversion.
//!
//! All angles are stored in radians; degrees appear only at the config and
//! report boundaries. The global coordinate system is right-handed Cartesian
//! with zenith measured from +z and azimuth measured from +x toward +y.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Propagation speed used for all delay conversion, in m/s (exact SI value).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// A point in the global Cartesian coordinate system, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Component-wise difference `self - other`, reused as a free vector.
    pub fn sub(&self, other: &Point3) -> Point3 {
        Point3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn add(&self, other: &Point3) -> Point3 {
        Point3::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    pub fn dot(&self, other: &Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// A velocity vector in m/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Velocity3 {
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
}

impl Velocity3 {
    pub fn new(vx: f64, vy: f64, vz: f64) -> Self {
        Self { vx, vy, vz }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Projection of the velocity onto a direction vector.
    pub fn dot(&self, dir: &Point3) -> f64 {
        self.vx * dir.x + self.vy * dir.y + self.vz * dir.z
    }

    pub fn is_zero(&self) -> bool {
        self.vx == 0.0 && self.vy == 0.0 && self.vz == 0.0
    }
}

/// Wraps an azimuth angle into (-pi, pi].
pub fn wrap_azimuth(azimuth: f64) -> f64 {
    let a = azimuth.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

/// Folds a zenith angle into [0, pi] by wrapping mod 2*pi and reflecting.
pub fn fold_zenith(zenith: f64) -> f64 {
    let z = zenith.rem_euclid(TAU);
    if z > PI {
        TAU - z
    } else {
        z
    }
}

/// A direction described by zenith (from +z, in [0, pi]) and azimuth
/// (from +x toward +y, in (-pi, pi]) angles, both in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalAngles {
    pub zenith: f64,
    pub azimuth: f64,
}

impl SphericalAngles {
    /// Builds a direction, folding zenith into [0, pi] and wrapping azimuth
    /// into (-pi, pi].
    pub fn new(zenith: f64, azimuth: f64) -> Self {
        Self {
            zenith: fold_zenith(zenith),
            azimuth: wrap_azimuth(azimuth),
        }
    }

    pub fn from_degrees(zenith_deg: f64, azimuth_deg: f64) -> Self {
        Self::new(zenith_deg.to_radians(), azimuth_deg.to_radians())
    }

    pub fn zenith_deg(&self) -> f64 {
        self.zenith.to_degrees()
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.azimuth.to_degrees()
    }

    /// The unit vector pointing along this direction.
    pub fn unit_vector(&self) -> Point3 {
        spherical_unit_vector(self)
    }
}

/// Euclidean distance between two points, in meters.
pub fn distance_3d(a: &Point3, b: &Point3) -> f64 {
    a.sub(b).norm()
}

/// LoS departure angles from `from` toward `to` in the global frame.
///
/// For a purely vertical leg the azimuth limit is undefined; it is defined
/// as 0 by convention.
pub fn los_angles(from: &Point3, to: &Point3) -> Result<SphericalAngles> {
    let delta = to.sub(from);
    let d = delta.norm();
    if d == 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "coincident points at ({}, {}, {})",
            from.x, from.y, from.z
        )));
    }
    let zenith = (delta.z / d).clamp(-1.0, 1.0).acos();
    let azimuth = if delta.x == 0.0 && delta.y == 0.0 {
        0.0
    } else {
        delta.y.atan2(delta.x)
    };
    Ok(SphericalAngles::new(zenith, azimuth))
}

/// Unit vector (sin z cos a, sin z sin a, cos z) for the given direction.
pub fn spherical_unit_vector(angles: &SphericalAngles) -> Point3 {
    let (sz, cz) = angles.zenith.sin_cos();
    let (sa, ca) = angles.azimuth.sin_cos();
    Point3::new(sz * ca, sz * sa, cz)
}

/// LoS delay of a TX -> target -> RX cascade: (d(tx,target) + d(target,rx)) / c.
pub fn los_cascade_delay(tx: &Point3, target: &Point3, rx: &Point3) -> Result<f64> {
    let d1 = distance_3d(tx, target);
    let d2 = distance_3d(target, rx);
    if d1 == 0.0 || d2 == 0.0 {
        return Err(Error::DegenerateGeometry(
            "cascade leg has zero length".into(),
        ));
    }
    Ok((d1 + d2) / SPEED_OF_LIGHT)
}

/// A radio node: where it sits and how it moves.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NodeDescriptor {
    pub position: Point3,
    pub velocity: Velocity3,
}

impl NodeDescriptor {
    pub fn fixed(position: Point3) -> Self {
        Self {
            position,
            velocity: Velocity3::zero(),
        }
    }
}

/// LoS description of one link: departure/arrival angles, 3D distance, and
/// the carrier wavelength the link is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    /// LoS angles at the transmit end, pointing toward the receive end.
    pub departure: SphericalAngles,
    /// LoS angles at the receive end, pointing back toward the transmit end.
    pub arrival: SphericalAngles,
    /// 3D distance between the endpoints, meters.
    pub distance: f64,
    /// Carrier wavelength, meters.
    pub wavelength: f64,
}

impl LinkGeometry {
    /// Builds the LoS geometry between two endpoints.
    pub fn between(tx: &Point3, rx: &Point3, wavelength: f64) -> Result<Self> {
        if !(wavelength > 0.0) || !wavelength.is_finite() {
            return Err(Error::InvalidCarrier(format!(
                "wavelength must be positive and finite, got {wavelength}"
            )));
        }
        Ok(Self {
            departure: los_angles(tx, rx)?,
            arrival: los_angles(rx, tx)?,
            distance: distance_3d(tx, rx),
            wavelength,
        })
    }

    /// One-way LoS delay over this link.
    pub fn los_delay(&self) -> f64 {
        self.distance / SPEED_OF_LIGHT
    }
}
