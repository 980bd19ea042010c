//! Stochastic generation of large-scale parameters and cluster/ray
//! small-scale parameters for one link, indoor-office scenario.
//!
//! The generation flow follows the standard drop-based procedure: correlated
//! lognormal large-scale parameters, exponential cluster delays scaled by the
//! delay spread, per-cluster powers with shadowing, centroid angles from the
//! inverse-Gaussian (azimuth) and inverse-Laplacian (zenith) mappings centered
//! on the LoS direction, and a fixed 20-ray offset table inside each cluster.
//! A LoS link additionally gets a deterministic zero-delay specular cluster
//! whose power follows the Ricean K-factor.

pub mod tables;

use std::f64::consts::{PI, TAU};

use nalgebra::SMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::geometry::{LinkGeometry, SphericalAngles, SPEED_OF_LIGHT};

pub use tables::{ConditionParams, CrossCorrelations, FreqLogLinear, ScenarioTables};

/// Large-scale parameters of one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargeScaleParams {
    /// Delay spread, seconds.
    pub ds: f64,
    /// Azimuth spread of departure, radians.
    pub asd: f64,
    /// Azimuth spread of arrival, radians.
    pub asa: f64,
    /// Zenith spread of departure, radians.
    pub zsd: f64,
    /// Zenith spread of arrival, radians.
    pub zsa: f64,
    /// Shadow fading, dB.
    pub sf_db: f64,
    /// Ricean K-factor, dB. Meaningful only when `los` is set.
    pub k_db: f64,
    pub los: bool,
}

/// One ray (sub-path) within a cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    /// Linear amplitude; sqrt of the ray's share of link power.
    pub amplitude: f64,
    /// Absolute delay, seconds.
    pub delay: f64,
    /// Departure direction at the transmit end.
    pub departure: SphericalAngles,
    /// Arrival direction at the receive end.
    pub arrival: SphericalAngles,
    /// Cross-polarization power ratio, linear. The deterministic specular ray
    /// uses infinity (zero cross-polar leakage).
    pub xpr_linear: f64,
    /// Random initial phases for the tt, tp, pt, pp polarization pairs,
    /// each in (-pi, pi].
    pub phases: [f64; 4],
    /// Doppler shift, Hz. Zero until annotated with endpoint velocities.
    pub doppler_hz: f64,
}

/// A cluster: power/delay plus centroid angles and its rays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Position within the owning set.
    pub index: usize,
    /// Linear fraction of link power.
    pub power: f64,
    /// Absolute delay, seconds.
    pub delay: f64,
    pub centroid_departure: SphericalAngles,
    pub centroid_arrival: SphericalAngles,
    pub rays: Vec<Ray>,
    /// Deterministic LoS specular cluster (single ray, no angle offsets).
    pub specular: bool,
}

/// Per-dimension ray offset scales (radians) used when ray angles are laid
/// out around a cluster centroid; retained so centroids can be replaced and
/// rays regenerated later.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayOffsets {
    pub aod: f64,
    pub aoa: f64,
    pub zod: f64,
    pub zoa: f64,
}

/// All clusters of one link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
    pub los: bool,
    pub link_id: String,
    pub geometry: LinkGeometry,
    pub ray_offsets: RayOffsets,
}

impl ClusterSet {
    pub fn total_power(&self) -> f64 {
        self.clusters.iter().map(|c| c.power).sum()
    }

    /// Number of stochastic (non-specular) clusters.
    pub fn stochastic_count(&self) -> usize {
        self.clusters.iter().filter(|c| !c.specular).count()
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

/// Azimuth angle scaling factors keyed by cluster count.
const AZIMUTH_SCALING: &[(f64, f64)] = &[
    (4.0, 0.779),
    (5.0, 0.860),
    (8.0, 1.018),
    (10.0, 1.090),
    (11.0, 1.123),
    (12.0, 1.146),
    (14.0, 1.190),
    (15.0, 1.211),
    (16.0, 1.226),
    (19.0, 1.273),
    (20.0, 1.289),
    (25.0, 1.358),
];

/// Zenith angle scaling factors keyed by cluster count.
const ZENITH_SCALING: &[(f64, f64)] = &[
    (8.0, 0.889),
    (10.0, 0.957),
    (11.0, 1.031),
    (12.0, 1.104),
    (15.0, 1.1088),
    (19.0, 1.184),
    (20.0, 1.178),
    (25.0, 1.282),
];

/// Ray offset basis for 20 rays per cluster (unit RMS spread).
pub const RAY_OFFSETS_20: [f64; 20] = [
    0.0447, -0.0447, 0.1413, -0.1413, 0.2492, -0.2492, 0.3715, -0.3715, 0.5129, -0.5129, 0.6797,
    -0.6797, 0.8844, -0.8844, 1.1481, -1.1481, 1.5195, -1.5195, 2.1551, -2.1551,
];

fn lookup_scaling(table: &[(f64, f64)], n: usize) -> f64 {
    let n = n as f64;
    if n <= table[0].0 {
        return table[0].1;
    }
    for w in table.windows(2) {
        let (n0, v0) = w[0];
        let (n1, v1) = w[1];
        if n == n0 {
            return v0;
        }
        if n < n1 {
            return v0 + (v1 - v0) * (n - n0) / (n1 - n0);
        }
    }
    table[table.len() - 1].1
}

/// LoS correction applied to the azimuth scaling factor (k in dB).
fn azimuth_los_factor(k_db: f64) -> f64 {
    (1.1035 - 0.028 * k_db - 0.002 * k_db.powi(2) + 0.0001 * k_db.powi(3)).max(1e-3)
}

/// LoS correction applied to the zenith scaling factor (k in dB).
fn zenith_los_factor(k_db: f64) -> f64 {
    (1.3086 + 0.0339 * k_db - 0.0077 * k_db.powi(2) + 0.0002 * k_db.powi(3)).max(1e-3)
}

/// LoS compensation of delay spread (k in dB).
fn delay_los_factor(k_db: f64) -> f64 {
    (0.7705 - 0.0433 * k_db + 0.0002 * k_db.powi(2) + 0.000017 * k_db.powi(3)).max(1e-3)
}

/// Symmetric square root of the large-scale cross-correlation matrix, in the
/// parameter order SF, K, DS, ASD, ASA, ZSD, ZSA.
fn correlation_sqrt(c: &CrossCorrelations) -> SMatrix<f64, 7, 7> {
    const SF: usize = 0;
    const K: usize = 1;
    const DS: usize = 2;
    const ASD: usize = 3;
    const ASA: usize = 4;
    const ZSD: usize = 5;
    const ZSA: usize = 6;
    let mut m = SMatrix::<f64, 7, 7>::identity();
    let pairs = [
        (ASD, DS, c.asd_ds),
        (ASA, DS, c.asa_ds),
        (ASA, SF, c.asa_sf),
        (ASD, SF, c.asd_sf),
        (DS, SF, c.ds_sf),
        (ASD, ASA, c.asd_asa),
        (ASD, K, c.asd_k),
        (ASA, K, c.asa_k),
        (DS, K, c.ds_k),
        (SF, K, c.sf_k),
        (ZSD, SF, c.zsd_sf),
        (ZSA, SF, c.zsa_sf),
        (ZSD, K, c.zsd_k),
        (ZSA, K, c.zsa_k),
        (ZSD, DS, c.zsd_ds),
        (ZSA, DS, c.zsa_ds),
        (ZSD, ASD, c.zsd_asd),
        (ZSA, ASD, c.zsa_asd),
        (ZSD, ASA, c.zsd_asa),
        (ZSA, ASA, c.zsa_asa),
        (ZSD, ZSA, c.zsd_zsa),
    ];
    for (i, j, v) in pairs {
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    let eig = m.symmetric_eigen();
    let sqrt_diag = SMatrix::<f64, 7, 7>::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose()
}

/// Draws correlated large-scale parameters for one link.
///
/// Deterministic given the stream state: the same seeded stream always
/// produces the same parameters.
pub fn draw_large_scale(
    tables: &ScenarioTables,
    carrier_ghz: f64,
    los: bool,
    rng: &mut impl Rng,
) -> LargeScaleParams {
    let row = tables.condition(los);
    let sqrt = correlation_sqrt(&row.cross_correlations);
    let z = SMatrix::<f64, 7, 1>::from_fn(|_, _| StandardNormal.sample(rng));
    let x = sqrt * z;

    let ds = 10f64.powf(row.ds_log_mean.at(carrier_ghz) + row.ds_log_std.at(carrier_ghz) * x[2]);
    let asd_deg =
        10f64.powf(row.asd_log_mean.at(carrier_ghz) + row.asd_log_std.at(carrier_ghz) * x[3]);
    let asa_deg =
        10f64.powf(row.asa_log_mean.at(carrier_ghz) + row.asa_log_std.at(carrier_ghz) * x[4]);
    let zsd_deg =
        10f64.powf(row.zsd_log_mean.at(carrier_ghz) + row.zsd_log_std.at(carrier_ghz) * x[5]);
    let zsa_deg =
        10f64.powf(row.zsa_log_mean.at(carrier_ghz) + row.zsa_log_std.at(carrier_ghz) * x[6]);
    let k_db = match (row.k_mean_db, row.k_std_db) {
        (Some(mu), Some(sigma)) if los => mu + sigma * x[1],
        _ => 0.0,
    };

    // Azimuth spreads cap at 104 degrees, zenith spreads at 52.
    LargeScaleParams {
        ds,
        asd: asd_deg.min(104.0).to_radians(),
        asa: asa_deg.min(104.0).to_radians(),
        zsd: zsd_deg.min(52.0).to_radians(),
        zsa: zsa_deg.min(52.0).to_radians(),
        sf_db: row.sf_std_db * x[0],
        k_db,
        los,
    }
}

/// Draws one angle dimension for all clusters: the inverse-shape mapping plus
/// sign flip, Gaussian jitter, and LoS-direction centering.
struct AngleDraw {
    signs: Vec<f64>,
    jitter: Vec<f64>,
}

impl AngleDraw {
    fn draw(n: usize, spread: f64, rng: &mut impl Rng) -> Self {
        let signs = (0..n)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let jitter = (0..n)
            .map(|_| {
                let g: f64 = StandardNormal.sample(rng);
                g * spread / 7.0
            })
            .collect();
        Self { signs, jitter }
    }

    /// Applies the mapping to per-cluster prototype magnitudes, centering on
    /// `center`; in the LoS case the first cluster is pinned to `center`.
    fn apply(&self, prototype: &[f64], center: f64, los: bool) -> Vec<f64> {
        let correction = if los {
            self.signs[0] * prototype[0] + self.jitter[0]
        } else {
            0.0
        };
        prototype
            .iter()
            .enumerate()
            .map(|(n, p)| self.signs[n] * p + self.jitter[n] - correction + center)
            .collect()
    }
}

/// Generates the stochastic clusters (plus the deterministic specular cluster
/// for LoS links) for one link.
pub fn generate_clusters(
    tables: &ScenarioTables,
    lsp: &LargeScaleParams,
    geom: &LinkGeometry,
    link_id: &str,
    rng: &mut impl Rng,
) -> ClusterSet {
    let row = tables.condition(lsp.los);
    let n = row.num_clusters;
    let m = row.rays_per_cluster;
    let carrier_ghz = SPEED_OF_LIGHT / geom.wavelength / 1e9;

    // Cluster delays: exponential draws scaled by r_tau * DS, normalized to
    // start at zero and sorted ascending.
    let r_tau = row.delay_scaling;
    let mut delays: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
            -r_tau * lsp.ds * u.ln()
        })
        .collect();
    delays.sort_by(|a, b| a.partial_cmp(b).expect("finite delays"));
    let min_delay = delays[0];
    for d in delays.iter_mut() {
        *d -= min_delay;
    }

    // Cluster powers: exponential delay profile with per-cluster shadowing,
    // normalized to unit sum. Powers use the unscaled delays.
    let zeta = row.per_cluster_shadowing_db;
    let mut powers: Vec<f64> = delays
        .iter()
        .map(|&tau| {
            let shadow: f64 = StandardNormal.sample(rng);
            (-tau * (r_tau - 1.0) / (r_tau * lsp.ds)).exp() * 10f64.powf(-zeta * shadow / 10.0)
        })
        .collect();
    let sum: f64 = powers.iter().sum();
    for p in powers.iter_mut() {
        *p /= sum;
    }
    let max_power = powers.iter().cloned().fold(f64::MIN, f64::max);

    // LoS links compress stochastic delays to compensate the specular peak.
    if lsp.los {
        let c_tau = delay_los_factor(lsp.k_db);
        for d in delays.iter_mut() {
            *d /= c_tau;
        }
    }

    // Azimuth centroids: inverse-Gaussian mapping.
    let c_phi_nlos = lookup_scaling(AZIMUTH_SCALING, n);
    let c_phi = if lsp.los {
        c_phi_nlos * azimuth_los_factor(lsp.k_db)
    } else {
        c_phi_nlos
    };
    let az_prototype =
        |spread: f64| -> Vec<f64> {
            powers
                .iter()
                .map(|&p| 2.0 * (spread / 1.4) * (-(p / max_power).ln()).sqrt() / c_phi)
                .collect()
        };
    let aoa_proto = az_prototype(lsp.asa);
    let aoa_draw = AngleDraw::draw(n, lsp.asa, rng);
    let aoa = aoa_draw.apply(&aoa_proto, geom.arrival.azimuth, lsp.los);
    let aod_proto = az_prototype(lsp.asd);
    let aod_draw = AngleDraw::draw(n, lsp.asd, rng);
    let aod = aod_draw.apply(&aod_proto, geom.departure.azimuth, lsp.los);

    // Zenith centroids: inverse-Laplacian mapping.
    let c_theta_nlos = lookup_scaling(ZENITH_SCALING, n);
    let c_theta = if lsp.los {
        c_theta_nlos * zenith_los_factor(lsp.k_db)
    } else {
        c_theta_nlos
    };
    let zen_prototype = |spread: f64| -> Vec<f64> {
        powers
            .iter()
            .map(|&p| -spread * (p / max_power).ln() / c_theta)
            .collect()
    };
    let zoa_proto = zen_prototype(lsp.zsa);
    let zoa_draw = AngleDraw::draw(n, lsp.zsa, rng);
    let zoa = zoa_draw.apply(&zoa_proto, geom.arrival.zenith, lsp.los);
    let zod_proto = zen_prototype(lsp.zsd);
    let zod_draw = AngleDraw::draw(n, lsp.zsd, rng);
    let zod: Vec<f64> = zod_draw
        .apply(&zod_proto, geom.departure.zenith, lsp.los)
        .iter()
        .map(|v| v + row.zod_offset_deg.to_radians())
        .collect();

    // Ray offset scales: azimuth/zenith-of-arrival spreads from the table,
    // zenith-of-departure from 3/8 * 10^(mean lg ZSD).
    let ray_offsets = RayOffsets {
        aod: row.cluster_asd_deg.to_radians(),
        aoa: row.cluster_asa_deg.to_radians(),
        zod: (3.0 / 8.0) * 10f64.powf(row.zsd_log_mean.at(carrier_ghz)).to_radians(),
        zoa: row.cluster_zsa_deg.to_radians(),
    };

    // K-factor split between the specular cluster and the stochastic rest.
    let (stochastic_scale, specular_power) = if lsp.los {
        let k_lin = 10f64.powf(lsp.k_db / 10.0);
        (1.0 / (1.0 + k_lin), k_lin / (1.0 + k_lin))
    } else {
        (1.0, 0.0)
    };

    let mut clusters = Vec::with_capacity(n + 1);
    if lsp.los {
        // Deterministic specular cluster: zero delay offset, LoS angles, one
        // ray with distance-derived phase and no cross-polar leakage.
        let phase = crate::geometry::wrap_azimuth(-TAU * geom.distance / geom.wavelength);
        clusters.push(Cluster {
            index: 0,
            power: specular_power,
            delay: 0.0,
            centroid_departure: geom.departure,
            centroid_arrival: geom.arrival,
            rays: vec![Ray {
                amplitude: specular_power.sqrt(),
                delay: 0.0,
                departure: geom.departure,
                arrival: geom.arrival,
                xpr_linear: f64::INFINITY,
                phases: [
                    phase,
                    0.0,
                    0.0,
                    crate::geometry::wrap_azimuth(phase + PI),
                ],
                doppler_hz: 0.0,
            }],
            specular: true,
        });
    }

    let base_index = clusters.len();
    for i in 0..n {
        let power = powers[i] * stochastic_scale;
        let centroid_departure = SphericalAngles::new(zod[i], aod[i]);
        let centroid_arrival = SphericalAngles::new(zoa[i], aoa[i]);
        let ray_amplitude = (power / m as f64).sqrt();
        let mut rays = Vec::with_capacity(m);
        for ray_idx in 0..m {
            let alpha = RAY_OFFSETS_20[ray_idx];
            let xpr_db: f64 = {
                let g: f64 = StandardNormal.sample(rng);
                row.xpr_mean_db + row.xpr_std_db * g
            };
            let phases = [
                PI - TAU * rng.gen::<f64>(),
                PI - TAU * rng.gen::<f64>(),
                PI - TAU * rng.gen::<f64>(),
                PI - TAU * rng.gen::<f64>(),
            ];
            rays.push(Ray {
                amplitude: ray_amplitude,
                delay: delays[i],
                departure: SphericalAngles::new(
                    zod[i] + ray_offsets.zod * alpha,
                    aod[i] + ray_offsets.aod * alpha,
                ),
                arrival: SphericalAngles::new(
                    zoa[i] + ray_offsets.zoa * alpha,
                    aoa[i] + ray_offsets.aoa * alpha,
                ),
                xpr_linear: 10f64.powf(xpr_db / 10.0),
                phases,
                doppler_hz: 0.0,
            });
        }
        clusters.push(Cluster {
            index: base_index + i,
            power,
            delay: delays[i],
            centroid_departure,
            centroid_arrival,
            rays,
            specular: false,
        });
    }

    ClusterSet {
        clusters,
        los: lsp.los,
        link_id: link_id.to_string(),
        geometry: *geom,
        ray_offsets,
    }
}

/// Removes clusters whose power falls more than `threshold_db` below the
/// maximum cluster power, then renormalizes powers (and ray amplitudes) to
/// unit total. The maximum-power cluster always survives.
///
/// The removal floor is taken over the stochastic power profile: the
/// deterministic specular cluster is never a removal candidate and its
/// K-factor boost does not raise the floor for the stochastic clusters.
pub fn prune_clusters(set: &ClusterSet, threshold_db: f64) -> ClusterSet {
    if set.clusters.is_empty() {
        return set.clone();
    }
    let stochastic_max = set
        .clusters
        .iter()
        .filter(|c| !c.specular)
        .map(|c| c.power)
        .fold(f64::NEG_INFINITY, f64::max);
    let reference = if stochastic_max > f64::NEG_INFINITY {
        stochastic_max
    } else {
        set.clusters
            .iter()
            .map(|c| c.power)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let floor = reference * 10f64.powf(-threshold_db / 10.0);
    let mut kept: Vec<Cluster> = set
        .clusters
        .iter()
        .filter(|c| c.specular || c.power >= floor)
        .cloned()
        .collect();
    let total: f64 = kept.iter().map(|c| c.power).sum();
    let amp_scale = total.sqrt().recip();
    for (i, cluster) in kept.iter_mut().enumerate() {
        cluster.index = i;
        cluster.power /= total;
        for ray in cluster.rays.iter_mut() {
            ray.amplitude *= amp_scale;
        }
    }
    ClusterSet {
        clusters: kept,
        los: set.los,
        link_id: set.link_id.clone(),
        geometry: set.geometry,
        ray_offsets: set.ray_offsets,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use crate::rng::SeedSpace;
    use approx::assert_relative_eq;

    fn test_geometry() -> LinkGeometry {
        LinkGeometry::between(
            &Point3::new(0.0, 0.0, 1.5),
            &Point3::new(10.0, 0.0, 1.5),
            SPEED_OF_LIGHT / 28e9,
        )
        .unwrap()
    }

    fn tables() -> ScenarioTables {
        ScenarioTables::bundled_inh_office()
    }

    #[test]
    fn large_scale_is_deterministic() {
        let space = SeedSpace::new(99);
        let a = draw_large_scale(&tables(), 28.0, true, &mut space.stream(0, "lsp"));
        let b = draw_large_scale(&tables(), 28.0, true, &mut space.stream(0, "lsp"));
        assert_eq!(a, b);
    }

    #[test]
    fn large_scale_log_moments_match_table() {
        let t = tables();
        let space = SeedSpace::new(7);
        let mut rng = space.stream(0, "lsp-moments");
        let n = 10_000;
        let mut log_ds = Vec::with_capacity(n);
        let mut log_asa = Vec::with_capacity(n);
        for _ in 0..n {
            let lsp = draw_large_scale(&t, 28.0, true, &mut rng);
            log_ds.push(lsp.ds.log10());
            log_asa.push(lsp.asa.to_degrees().log10());
        }
        let mean_ds = log_ds.iter().sum::<f64>() / n as f64;
        let mu_ds = t.los.ds_log_mean.at(28.0);
        assert!(
            (mean_ds - mu_ds).abs() < 0.02,
            "mean lg DS {mean_ds} vs table {mu_ds}"
        );

        // Sample correlation of the paired DS/ASA log-values.
        let mean_asa = log_asa.iter().sum::<f64>() / n as f64;
        let mut cov = 0.0;
        let mut var_ds = 0.0;
        let mut var_asa = 0.0;
        for i in 0..n {
            let dd = log_ds[i] - mean_ds;
            let da = log_asa[i] - mean_asa;
            cov += dd * da;
            var_ds += dd * dd;
            var_asa += da * da;
        }
        let corr = cov / (var_ds.sqrt() * var_asa.sqrt());
        let expected = t.los.cross_correlations.asa_ds;
        assert!(
            (corr - expected).abs() < 0.05,
            "DS/ASA corr {corr} vs table {expected}"
        );
    }

    #[test]
    fn cluster_counts_match_table() {
        let t = tables();
        let space = SeedSpace::new(1);
        let geom = test_geometry();

        let lsp = draw_large_scale(&t, 28.0, true, &mut space.stream(0, "lsp"));
        let set = generate_clusters(&t, &lsp, &geom, "link", &mut space.stream(0, "clusters"));
        assert_eq!(set.stochastic_count(), 15);
        assert_eq!(set.len(), 16); // specular LoS cluster plus the table count
        assert!(set.clusters[0].specular);

        let lsp = draw_large_scale(&t, 28.0, false, &mut space.stream(1, "lsp"));
        let set = generate_clusters(&t, &lsp, &geom, "link", &mut space.stream(1, "clusters"));
        assert_eq!(set.stochastic_count(), 19);
        assert_eq!(set.len(), 19);
    }

    #[test]
    fn generation_is_deterministic() {
        let t = tables();
        let space = SeedSpace::new(5);
        let geom = test_geometry();
        let lsp = draw_large_scale(&t, 28.0, true, &mut space.stream(3, "lsp"));
        let a = generate_clusters(&t, &lsp, &geom, "link", &mut space.stream(3, "cl"));
        let b = generate_clusters(&t, &lsp, &geom, "link", &mut space.stream(3, "cl"));
        assert_eq!(a, b);
    }

    #[test]
    fn delays_normalized_and_sorted() {
        let t = tables();
        let space = SeedSpace::new(11);
        let geom = test_geometry();
        for drop in 0..20 {
            for los in [true, false] {
                let lsp = draw_large_scale(&t, 28.0, los, &mut space.stream(drop, "lsp"));
                let set = generate_clusters(&t, &lsp, &geom, "link", &mut space.stream(drop, "cl"));
                let delays: Vec<f64> = set.clusters.iter().map(|c| c.delay).collect();
                assert_eq!(delays.iter().cloned().fold(f64::MAX, f64::min), 0.0);
                let stochastic: Vec<f64> = set
                    .clusters
                    .iter()
                    .filter(|c| !c.specular)
                    .map(|c| c.delay)
                    .collect();
                assert!(stochastic.windows(2).all(|w| w[0] <= w[1]));
                assert!(delays.iter().all(|&d| d >= 0.0));
            }
        }
    }

    #[test]
    fn powers_sum_to_unity() {
        let t = tables();
        let space = SeedSpace::new(13);
        let geom = test_geometry();
        for drop in 0..20 {
            for los in [true, false] {
                let lsp = draw_large_scale(&t, 28.0, los, &mut space.stream(drop, "lsp"));
                let set = generate_clusters(&t, &lsp, &geom, "link", &mut space.stream(drop, "cl"));
                assert_relative_eq!(set.total_power(), 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn los_first_stochastic_cluster_aligned() {
        let t = tables();
        let space = SeedSpace::new(17);
        let geom = test_geometry();
        let lsp = draw_large_scale(&t, 28.0, true, &mut space.stream(0, "lsp"));
        let set = generate_clusters(&t, &lsp, &geom, "link", &mut space.stream(0, "cl"));
        let first = set.clusters.iter().find(|c| !c.specular).unwrap();
        assert_relative_eq!(
            first.centroid_arrival.azimuth,
            geom.arrival.azimuth,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            first.centroid_departure.azimuth,
            geom.departure.azimuth,
            epsilon = 1e-12
        );
        assert_eq!(first.delay, 0.0);
    }

    #[test]
    fn specular_cluster_follows_k_factor() {
        let t = tables();
        let space = SeedSpace::new(19);
        let geom = test_geometry();
        let lsp = draw_large_scale(&t, 28.0, true, &mut space.stream(0, "lsp"));
        let set = generate_clusters(&t, &lsp, &geom, "link", &mut space.stream(0, "cl"));
        let spec = &set.clusters[0];
        let k_lin = 10f64.powf(lsp.k_db / 10.0);
        assert_relative_eq!(spec.power, k_lin / (1.0 + k_lin), epsilon = 1e-12);
        assert_eq!(spec.rays.len(), 1);
        assert_eq!(spec.rays[0].xpr_linear, f64::INFINITY);
        assert_eq!(spec.centroid_departure, geom.departure);
    }

    #[test]
    fn ray_mean_tracks_centroid() {
        let t = tables();
        let space = SeedSpace::new(23);
        let geom = test_geometry();
        let lsp = draw_large_scale(&t, 28.0, false, &mut space.stream(0, "lsp"));
        let set = generate_clusters(&t, &lsp, &geom, "link", &mut space.stream(0, "cl"));
        // Offsets are symmetric, so ray azimuths average to the centroid for
        // clusters away from the wrap boundary.
        for cluster in &set.clusters {
            if cluster.centroid_arrival.azimuth.abs() < 2.0 {
                let mean: f64 = cluster
                    .rays
                    .iter()
                    .map(|r| r.arrival.azimuth)
                    .sum::<f64>()
                    / cluster.rays.len() as f64;
                assert_relative_eq!(mean, cluster.centroid_arrival.azimuth, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn ray_phases_uniform_ks() {
        let t = tables();
        let space = SeedSpace::new(29);
        let geom = test_geometry();
        let mut phases = Vec::new();
        let mut drop = 0u64;
        while phases.len() < 20_000 {
            let lsp = draw_large_scale(&t, 28.0, false, &mut space.stream(drop, "lsp"));
            let set = generate_clusters(&t, &lsp, &geom, "link", &mut space.stream(drop, "cl"));
            for c in &set.clusters {
                for r in &c.rays {
                    phases.extend_from_slice(&r.phases);
                }
            }
            drop += 1;
        }
        let d = crate::stats::ks_statistic_uniform(&phases, -PI, PI);
        let critical = crate::stats::ks_critical_value(phases.len(), 0.01);
        assert!(d < critical, "KS statistic {d} >= critical {critical}");
    }

    #[test]
    fn xpr_lognormal_moments() {
        let t = tables();
        let space = SeedSpace::new(31);
        let geom = test_geometry();
        let mut xpr_db = Vec::new();
        for drop in 0..40 {
            let lsp = draw_large_scale(&t, 28.0, false, &mut space.stream(drop, "lsp"));
            let set = generate_clusters(&t, &lsp, &geom, "link", &mut space.stream(drop, "cl"));
            for c in &set.clusters {
                for r in &c.rays {
                    xpr_db.push(10.0 * r.xpr_linear.log10());
                }
            }
        }
        let mean = xpr_db.iter().sum::<f64>() / xpr_db.len() as f64;
        assert!((mean - t.nlos.xpr_mean_db).abs() < 0.2, "XPR mean {mean}");
    }

    #[test]
    fn prune_removes_below_threshold() {
        let set = synthetic_set(&[1.0, 0.1, 0.001]);
        let pruned = prune_clusters(&set, 25.0);
        assert_eq!(pruned.len(), 2);
        assert_relative_eq!(pruned.total_power(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn prune_keeps_equal_powers() {
        let set = synthetic_set(&[0.25, 0.25, 0.25, 0.25]);
        let pruned = prune_clusters(&set, 25.0);
        assert_eq!(pruned.len(), 4);
    }

    #[test]
    fn prune_single_cluster_unchanged() {
        let set = synthetic_set(&[1.0]);
        let pruned = prune_clusters(&set, 25.0);
        assert_eq!(pruned.len(), 1);
        assert_relative_eq!(pruned.clusters[0].power, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn prune_never_removes_max() {
        // Both weak clusters fall below max * 10^-2.5; only the max survives
        // and renormalizes to unit power.
        let set = synthetic_set(&[1e-9, 1e-12, 1e-15]);
        let pruned = prune_clusters(&set, 25.0);
        assert_eq!(pruned.len(), 1);
        assert_relative_eq!(pruned.clusters[0].power, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn prune_rescales_ray_amplitudes() {
        let set = synthetic_set(&[0.9, 0.1, 1e-6]);
        let pruned = prune_clusters(&set, 25.0);
        for c in &pruned.clusters {
            let ray_power: f64 = c.rays.iter().map(|r| r.amplitude * r.amplitude).sum();
            assert_relative_eq!(ray_power, c.power, epsilon = 1e-12);
        }
    }

    #[test]
    fn prune_floor_ignores_specular_boost() {
        // A dominant specular cluster must not drag stochastic clusters
        // below the removal floor; the floor follows the stochastic maximum.
        let mut set = synthetic_set(&[0.30, 0.002, 0.0002]);
        set.clusters.insert(
            0,
            Cluster {
                index: 0,
                power: 0.6978,
                delay: 0.0,
                centroid_departure: set.geometry.departure,
                centroid_arrival: set.geometry.arrival,
                rays: vec![Ray {
                    amplitude: 0.6978f64.sqrt(),
                    delay: 0.0,
                    departure: set.geometry.departure,
                    arrival: set.geometry.arrival,
                    xpr_linear: f64::INFINITY,
                    phases: [0.0; 4],
                    doppler_hz: 0.0,
                }],
                specular: true,
            },
        );
        let pruned = prune_clusters(&set, 25.0);
        // Floor = 0.30 * 10^-2.5 ~ 9.5e-4: keeps specular, 0.30, and 0.002.
        assert_eq!(pruned.len(), 3);
        assert!(pruned.clusters[0].specular);
        assert_relative_eq!(pruned.total_power(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn scaling_lookup_exact_and_interpolated() {
        assert_eq!(lookup_scaling(AZIMUTH_SCALING, 15), 1.211);
        assert_eq!(lookup_scaling(AZIMUTH_SCALING, 19), 1.273);
        assert_eq!(lookup_scaling(ZENITH_SCALING, 15), 1.1088);
        assert_eq!(lookup_scaling(ZENITH_SCALING, 19), 1.184);
        // Between 8 and 10 the azimuth factor interpolates linearly.
        let v = lookup_scaling(AZIMUTH_SCALING, 9);
        assert_relative_eq!(v, (1.018 + 1.090) / 2.0, epsilon = 1e-12);
        // Out-of-range counts clamp to the table ends.
        assert_eq!(lookup_scaling(AZIMUTH_SCALING, 3), 0.779);
        assert_eq!(lookup_scaling(AZIMUTH_SCALING, 40), 1.358);
    }

    fn synthetic_set(powers: &[f64]) -> ClusterSet {
        let geom = test_geometry();
        let clusters = powers
            .iter()
            .enumerate()
            .map(|(i, &p)| Cluster {
                index: i,
                power: p,
                delay: i as f64 * 1e-9,
                centroid_departure: geom.departure,
                centroid_arrival: geom.arrival,
                rays: vec![Ray {
                    amplitude: p.sqrt(),
                    delay: i as f64 * 1e-9,
                    departure: geom.departure,
                    arrival: geom.arrival,
                    xpr_linear: 10.0,
                    phases: [0.0; 4],
                    doppler_hz: 0.0,
                }],
                specular: false,
            })
            .collect();
        ClusterSet {
            clusters,
            los: false,
            link_id: "test".into(),
            geometry: geom,
            ray_offsets: RayOffsets {
                aod: 0.0,
                aoa: 0.0,
                zod: 0.0,
                zoa: 0.0,
            },
        }
    }
}
