//! Sensing channel construction: TX-target and target-RX sub-channels, the
//! polarimetric target response, cascade path formation, and CIR assembly.
//!
//! Each target's channel is a cascade of the two sub-channels through a 2x2
//! radar-cross-section matrix. Sub-channels are either the single geometric
//! LoS cluster (positions drive angles and delays exactly) or full stochastic
//! cluster sets drawn per leg. Cascade paths take the Cartesian product of
//! the legs' rays: delays add, Doppler contributions add, amplitudes multiply
//! under the configured path-loss rule, and each cascade path receives fresh
//! joint phases for the two-leg combination.

use std::f64::consts::{PI, TAU};

use ndarray::Array4;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::antenna::{array_phase, ArrayGeometry, ElementPattern};
use crate::cir::{ChannelKind, CirTensor, ComponentKind, PathMeta};
use crate::error::{Error, Result};
use crate::geometry::{LinkGeometry, NodeDescriptor, Point3, SphericalAngles, Velocity3};
use crate::polar::PolarMatrix;
use crate::stochastic::{
    generate_clusters, prune_clusters, Cluster, ClusterSet, Ray, RayOffsets, ScenarioTables,
};

/// A sensing target: identity, kinematics, and scattering response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub id: usize,
    pub position: Point3,
    pub velocity: Velocity3,
    pub rcs: RcsSpec,
}

/// Radar cross section specification. Matrix entries are complex field
/// coefficients; |entry|^2 is the RCS contribution in m^2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RcsSpec {
    /// A fixed polarimetric matrix, independent of angle.
    Fixed { matrix: PolarMatrix },
    /// Magnitude drawn uniformly in [min_m2, max_m2] (square meters) per
    /// drop, applied to a polarization template.
    StochasticUniform {
        min_m2: f64,
        max_m2: f64,
        template: PolarMatrix,
    },
}

/// Evaluates the target response matrix for the given scattering angles.
///
/// Both modes are angle-independent in this release; the angle arguments are
/// kept so angle-dependent tables can slot in behind the same signature.
/// Stochastic draws are expected to be made once per (target, drop) and held
/// constant within the drop.
pub fn evaluate_rcs(
    spec: &RcsSpec,
    _out_angles: &SphericalAngles,
    _in_angles: &SphericalAngles,
    rng: &mut impl Rng,
) -> PolarMatrix {
    match spec {
        RcsSpec::Fixed { matrix } => *matrix,
        RcsSpec::StochasticUniform {
            min_m2,
            max_m2,
            template,
        } => {
            let magnitude_m2 = min_m2 + (max_m2 - min_m2) * rng.gen::<f64>();
            template.scale(Complex64::new(magnitude_m2.sqrt(), 0.0))
        }
    }
}

/// How sensing sub-channels are populated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SensingClusterMode {
    /// Exactly the geometric LoS cluster per leg: angles from the node and
    /// target positions, delay from the leg distance.
    LosOnly,
    /// Full stochastic cluster sets per leg.
    Full {
        #[serde(default = "default_leg_los")]
        leg_los: bool,
        #[serde(default = "default_leg_prune_db")]
        prune_threshold_db: f64,
    },
}

fn default_leg_los() -> bool {
    true
}

fn default_leg_prune_db() -> f64 {
    25.0
}

/// Path-loss rule applied to cascade amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathlossMode {
    /// Product of the two legs' indoor path losses.
    #[serde(rename = "two_stage_38901")]
    TwoStage38901,
    /// Free-space radar-equation normalization
    /// sqrt(lambda^2 / ((4 pi)^3 d_tx^2 d_rx^2)); the RCS magnitude enters
    /// through the target response matrix.
    RadarEquation,
}

/// Indoor-office path loss in dB. The formula is specified for 1..150 m;
/// shorter distances are clamped to 1 m.
pub fn inh_pathloss_db(distance_m: f64, carrier_ghz: f64, los: bool) -> f64 {
    let d = distance_m.max(1.0);
    let pl_los = 32.4 + 17.3 * d.log10() + 20.0 * carrier_ghz.log10();
    if los {
        pl_los
    } else {
        let pl_nlos = 38.3 * d.log10() + 17.30 + 24.9 * carrier_ghz.log10();
        pl_los.max(pl_nlos)
    }
}

/// Linear amplitude scale applied to every cascade path of one target.
pub fn cascade_amplitude_scale(
    mode: PathlossMode,
    tx_leg: &ClusterSet,
    rx_leg: &ClusterSet,
) -> f64 {
    let lambda = tx_leg.geometry.wavelength;
    let d_tx = tx_leg.geometry.distance;
    let d_rx = rx_leg.geometry.distance;
    match mode {
        PathlossMode::TwoStage38901 => {
            let carrier_ghz = crate::geometry::SPEED_OF_LIGHT / lambda / 1e9;
            let pl = inh_pathloss_db(d_tx, carrier_ghz, tx_leg.los)
                + inh_pathloss_db(d_rx, carrier_ghz, rx_leg.los);
            10f64.powf(-pl / 20.0)
        }
        PathlossMode::RadarEquation => lambda / ((4.0 * PI).powi(3).sqrt() * d_tx * d_rx),
    }
}

/// Doppler shift of one ray on one leg from the velocities of its endpoints:
/// the receive end projects onto the arrival direction, the transmit end onto
/// the departure direction.
pub fn leg_doppler(
    ray: &Ray,
    tx_velocity: &Velocity3,
    rx_velocity: &Velocity3,
    wavelength: f64,
) -> f64 {
    let arrival = ray.arrival.unit_vector();
    let departure = ray.departure.unit_vector();
    (rx_velocity.dot(&arrival) + tx_velocity.dot(&departure)) / wavelength
}

fn annotate_leg_doppler(set: &mut ClusterSet, tx_velocity: &Velocity3, rx_velocity: &Velocity3) {
    let wavelength = set.geometry.wavelength;
    for cluster in set.clusters.iter_mut() {
        for ray in cluster.rays.iter_mut() {
            ray.doppler_hz = leg_doppler(ray, tx_velocity, rx_velocity, wavelength);
        }
    }
}

fn geometric_los_leg(
    geom: &LinkGeometry,
    link_id: &str,
    tx_velocity: &Velocity3,
    rx_velocity: &Velocity3,
) -> ClusterSet {
    let delay = geom.los_delay();
    let phase = crate::geometry::wrap_azimuth(-TAU * geom.distance / geom.wavelength);
    let mut ray = Ray {
        amplitude: 1.0,
        delay,
        departure: geom.departure,
        arrival: geom.arrival,
        xpr_linear: f64::INFINITY,
        phases: [phase, 0.0, 0.0, crate::geometry::wrap_azimuth(phase + PI)],
        doppler_hz: 0.0,
    };
    ray.doppler_hz = leg_doppler(&ray, tx_velocity, rx_velocity, geom.wavelength);
    ClusterSet {
        clusters: vec![Cluster {
            index: 0,
            power: 1.0,
            delay,
            centroid_departure: geom.departure,
            centroid_arrival: geom.arrival,
            rays: vec![ray],
            specular: true,
        }],
        los: true,
        link_id: link_id.to_string(),
        geometry: *geom,
        ray_offsets: RayOffsets {
            aod: 0.0,
            aoa: 0.0,
            zod: 0.0,
            zoa: 0.0,
        },
    }
}

/// Builds the TX-target and target-RX sub-channels for one target.
///
/// In LoS-only mode each leg is exactly the geometric LoS cluster; in full
/// mode each leg draws its own large-scale parameters and stochastic clusters
/// (independent across legs), then prunes weak clusters.
pub fn build_target_sub_channels(
    tx: &NodeDescriptor,
    target: &Target,
    rx: &NodeDescriptor,
    mode: &SensingClusterMode,
    tables: &ScenarioTables,
    wavelength: f64,
    rng: &mut impl Rng,
) -> Result<(ClusterSet, ClusterSet)> {
    let tx_geom = LinkGeometry::between(&tx.position, &target.position, wavelength)?;
    let rx_geom = LinkGeometry::between(&target.position, &rx.position, wavelength)?;
    let tx_id = format!("target{}/tx-leg", target.id);
    let rx_id = format!("target{}/rx-leg", target.id);

    match mode {
        SensingClusterMode::LosOnly => Ok((
            geometric_los_leg(&tx_geom, &tx_id, &tx.velocity, &target.velocity),
            geometric_los_leg(&rx_geom, &rx_id, &target.velocity, &rx.velocity),
        )),
        SensingClusterMode::Full {
            leg_los,
            prune_threshold_db,
        } => {
            let carrier_ghz = crate::geometry::SPEED_OF_LIGHT / wavelength / 1e9;
            let mut legs = Vec::with_capacity(2);
            for (geom, id) in [(tx_geom, &tx_id), (rx_geom, &rx_id)] {
                let lsp = crate::stochastic::draw_large_scale(tables, carrier_ghz, *leg_los, rng);
                let set = generate_clusters(tables, &lsp, &geom, id, rng);
                legs.push(prune_clusters(&set, *prune_threshold_db));
            }
            let mut rx_leg = legs.pop().expect("rx leg");
            let mut tx_leg = legs.pop().expect("tx leg");
            annotate_leg_doppler(&mut tx_leg, &tx.velocity, &target.velocity);
            annotate_leg_doppler(&mut rx_leg, &target.velocity, &rx.velocity);
            Ok((tx_leg, rx_leg))
        }
    }
}

/// One two-stage propagation path through a target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadePath {
    pub tx_ray: Ray,
    pub rx_ray: Ray,
    /// Cluster indices of the two rays within their legs.
    pub tx_cluster: usize,
    pub rx_cluster: usize,
    /// Angles incident on the target (arrival side of the TX leg).
    pub incident: SphericalAngles,
    /// Angles outgoing from the target (departure side of the RX leg).
    pub outgoing: SphericalAngles,
    /// Combined delay: TX-leg delay plus RX-leg delay.
    pub delay: f64,
    /// Combined Doppler: sum of the two legs' projections.
    pub doppler_hz: f64,
    /// Combined amplitude: leg amplitude product times the path-loss scale.
    pub amplitude: f64,
    /// Joint cross-polarization ratio (geometric mean of the leg XPRs).
    pub xpr_linear: f64,
    /// Fresh joint phases for the two-leg combination, in (-pi, pi].
    pub phases: [f64; 4],
}

/// All cascade paths of one target plus its response matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetCascade {
    pub target_id: usize,
    pub rcs: PolarMatrix,
    pub paths: Vec<CascadePath>,
}

/// Forms the Cartesian product of TX-leg and RX-leg rays.
///
/// Iteration is TX clusters/rays outer, RX clusters/rays inner; joint phases
/// are drawn in that fixed order.
pub fn cascade(
    target_id: usize,
    tx_leg: &ClusterSet,
    rcs: &PolarMatrix,
    rx_leg: &ClusterSet,
    pathloss_mode: PathlossMode,
    rng: &mut impl Rng,
) -> TargetCascade {
    let scale = cascade_amplitude_scale(pathloss_mode, tx_leg, rx_leg);
    let tx_rays: usize = tx_leg.clusters.iter().map(|c| c.rays.len()).sum();
    let rx_rays: usize = rx_leg.clusters.iter().map(|c| c.rays.len()).sum();
    let mut paths = Vec::with_capacity(tx_rays * rx_rays);
    for tx_cluster in &tx_leg.clusters {
        for tx_ray in &tx_cluster.rays {
            for rx_cluster in &rx_leg.clusters {
                for rx_ray in &rx_cluster.rays {
                    let phases = [
                        PI - TAU * rng.gen::<f64>(),
                        PI - TAU * rng.gen::<f64>(),
                        PI - TAU * rng.gen::<f64>(),
                        PI - TAU * rng.gen::<f64>(),
                    ];
                    paths.push(CascadePath {
                        tx_ray: *tx_ray,
                        rx_ray: *rx_ray,
                        tx_cluster: tx_cluster.index,
                        rx_cluster: rx_cluster.index,
                        incident: tx_ray.arrival,
                        outgoing: rx_ray.departure,
                        delay: tx_ray.delay + rx_ray.delay,
                        doppler_hz: tx_ray.doppler_hz + rx_ray.doppler_hz,
                        amplitude: tx_ray.amplitude * rx_ray.amplitude * scale,
                        xpr_linear: (tx_ray.xpr_linear * rx_ray.xpr_linear).sqrt(),
                        phases,
                    });
                }
            }
        }
    }
    TargetCascade {
        target_id,
        rcs: *rcs,
        paths,
    }
}

/// Assembles the sensing CIR tensor over all targets.
///
/// Per path the coefficient is
/// `[rx field]^T (phase/XPR matrix)(RCS matrix) [tx field]` times the array
/// phasors, the combined amplitude, and the Doppler phasor. Targets occupy
/// consecutive blocks along the path axis, so the per-target decomposition is
/// a block split of this tensor.
pub fn assemble_sensing_cir(
    cascades: &[TargetCascade],
    tx_array: &ArrayGeometry,
    tx_pattern: &ElementPattern,
    rx_array: &ArrayGeometry,
    rx_pattern: &ElementPattern,
    wavelength: f64,
    time_samples: &[f64],
    drop_id: u64,
) -> Result<CirTensor> {
    if time_samples.is_empty() {
        return Err(Error::Config("time_samples must not be empty".into()));
    }
    if !(wavelength > 0.0) || !wavelength.is_finite() {
        return Err(Error::InvalidCarrier(format!(
            "wavelength must be positive and finite, got {wavelength}"
        )));
    }
    let w = rx_array.count();
    let e = tx_array.count();
    let t = time_samples.len();
    let total_paths: usize = cascades.iter().map(|c| c.paths.len()).sum();

    let mut coefficients = Array4::zeros((w, e, total_paths, t));
    let mut path_delays = Vec::with_capacity(total_paths);
    let mut path_meta = Vec::with_capacity(total_paths);
    let mut path_idx = 0;
    for cascade in cascades {
        for path in &cascade.paths {
            let f_rx = rx_pattern.field_response(&path.rx_ray.arrival);
            let f_tx = tx_pattern.field_response(&path.tx_ray.departure);
            let coupling =
                PolarMatrix::from_phases_xpr(&path.phases, path.xpr_linear).mul(&cascade.rcs);
            let base = coupling.bilinear(f_rx, f_tx) * path.amplitude;

            for (wi, d_w) in rx_array.element_positions.iter().enumerate() {
                let ph_rx = array_phase(d_w, &path.rx_ray.arrival, wavelength)?;
                for (ei, d_e) in tx_array.element_positions.iter().enumerate() {
                    let ph_tx = array_phase(d_e, &path.tx_ray.departure, wavelength)?;
                    let static_part = base * ph_rx * ph_tx;
                    for (ti, &time) in time_samples.iter().enumerate() {
                        let doppler = Complex64::from_polar(1.0, TAU * path.doppler_hz * time);
                        coefficients[[wi, ei, path_idx, ti]] = static_part * doppler;
                    }
                }
            }
            path_delays.push(path.delay);
            path_meta.push(PathMeta {
                target: Some(cascade.target_id),
                cluster: None,
                shared: false,
            });
            path_idx += 1;
        }
    }

    Ok(CirTensor {
        coefficients,
        path_delays,
        path_meta,
        kind: ChannelKind::Sensing,
        component: ComponentKind::Total,
        drop_id,
    })
}
