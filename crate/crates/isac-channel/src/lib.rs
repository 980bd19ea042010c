//! Joint communication and sensing channel simulator.
//!
//! A geometry-based stochastic channel generator that produces communication
//! and sensing channel impulse responses together, with a configurable
//! sharing feature: sensing targets can double as communication scatterers,
//! in which case the affected communication clusters reuse the deterministic
//! target geometry and both channels decompose into shared and non-shared
//! components.
//!
//! Module map:
//!
//! - [`geometry`]: distances, LoS angles, spherical unit vectors, delays.
//! - [`antenna`]: array layouts, element patterns, array phase terms.
//! - [`stochastic`]: indoor-office large-scale parameters and cluster/ray
//!   generation with seeded, named substreams ([`rng`]).
//! - [`sensing`]: TX-target-RX cascade channels with a polarimetric radar
//!   cross section, assembled into CIR tensors ([`cir`]).
//! - [`sharing`]: shared-pair selection, parameter feedback, shared /
//!   non-shared decomposition, and the sharing-degree metric.
//! - [`communication`]: communication CIR assembly from stochastic plus
//!   fed-back clusters.
//! - [`harness`]: declarative scenario configs, the Monte-Carlo drop driver,
//!   sweep campaigns, and result export (JSON records, CSV tables, binary
//!   CIR tensors).

pub mod antenna;
pub mod cir;
pub mod communication;
pub mod error;
pub mod geometry;
pub mod polar;
pub mod harness;
pub mod rng;
pub mod sensing;
pub mod sharing;
pub mod stats;
pub mod stochastic;

pub use cir::{ChannelKind, CirTensor, ComponentKind, PathMeta};
pub use error::{Error, Result};
pub use geometry::{
    distance_3d, los_angles, los_cascade_delay, spherical_unit_vector, LinkGeometry, Point3,
    SphericalAngles, Velocity3, SPEED_OF_LIGHT,
};
pub use rng::SeedSpace;
pub use stochastic::{Cluster, ClusterSet, LargeScaleParams, Ray, ScenarioTables};
