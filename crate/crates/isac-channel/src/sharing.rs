//! The sharing feature: selection of shared target/cluster pairs by angular
//! proximity, parameter feedback into the communication clusters, the binary
//! selection vector, shared / non-shared decomposition, and the sharing
//! degree metric.

use serde::{Deserialize, Serialize};

use crate::cir::{CirTensor, ComponentKind};
use crate::error::{Error, Result};
use crate::geometry::SphericalAngles;
use crate::stochastic::{Cluster, ClusterSet, RAY_OFFSETS_20};

use std::f64::consts::{PI, TAU};

/// Binary selection vector over targets: entry l is 1 when target l acts as
/// a scatterer in both channels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharingVector(pub Vec<u8>);

impl SharingVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_shared(&self, target: usize) -> bool {
        self.0.get(target).copied() == Some(1)
    }

    /// Number of shared targets.
    pub fn count_shared(&self) -> usize {
        self.0.iter().filter(|&&s| s == 1).count()
    }
}

/// One selected (target, communication cluster) pair with its score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharedPair {
    /// Target index (0-based position in the target list).
    pub target_index: usize,
    /// Communication cluster index (0-based position in the pruned set).
    pub comm_cluster_index: usize,
    /// Normalized angular-gap score in [0, 1]; lower is closer.
    pub score: f64,
}

/// Complete sharing bookkeeping for one drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharingState {
    pub vector: SharingVector,
    pub pairs: Vec<SharedPair>,
    /// Requested shared-scatterer ratio.
    pub target_ratio: f64,
}

/// Which cluster angles participate in pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleSide {
    Departure,
    Arrival,
}

/// Angular gaps and the combined pairing score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularGap {
    /// Azimuth gap, radians in [0, 2 pi].
    pub gap_azimuth: f64,
    /// Zenith gap, radians in [0, pi].
    pub gap_zenith: f64,
    /// (gap_az / 2 pi + gap_zen / pi) / 2, in [0, 1].
    pub score: f64,
}

/// Angular gap between a target's LoS direction and a cluster centroid.
///
/// Gaps are raw absolute differences by default; `circular_azimuth` folds the
/// azimuth gap across the +-pi seam instead.
pub fn angular_gap(
    target: &SphericalAngles,
    cluster: &SphericalAngles,
    circular_azimuth: bool,
) -> AngularGap {
    let mut gap_azimuth = (target.azimuth - cluster.azimuth).abs();
    if circular_azimuth && gap_azimuth > PI {
        gap_azimuth = TAU - gap_azimuth;
    }
    let gap_zenith = (target.zenith - cluster.zenith).abs();
    AngularGap {
        gap_azimuth,
        gap_zenith,
        score: 0.5 * (gap_azimuth / TAU + gap_zenith / PI),
    }
}

fn cluster_angles(cluster: &Cluster, side: AngleSide) -> &SphericalAngles {
    match side {
        AngleSide::Departure => &cluster.centroid_departure,
        AngleSide::Arrival => &cluster.centroid_arrival,
    }
}

/// Greedy sequential selection of shared (target, cluster) pairs.
///
/// Repeatedly takes the globally minimal-score pair over the remaining
/// targets and clusters, removing both indices each time. Ties break toward
/// the lower target index, then the lower cluster index. Sets s_l = 1 for
/// every selected target.
pub fn select_shared_pairs(
    target_angles: &[SphericalAngles],
    comm_clusters: &ClusterSet,
    side: AngleSide,
    n_shared: usize,
    circular_azimuth: bool,
) -> Result<(Vec<SharedPair>, SharingVector)> {
    let l = target_angles.len();
    let n = comm_clusters.len();
    if n_shared > l.min(n) {
        return Err(Error::Config(format!(
            "n_shared = {n_shared} exceeds min(targets = {l}, clusters = {n})"
        )));
    }
    let mut target_used = vec![false; l];
    let mut cluster_used = vec![false; n];
    let mut pairs = Vec::with_capacity(n_shared);
    for _ in 0..n_shared {
        let mut best: Option<SharedPair> = None;
        for (li, ta) in target_angles.iter().enumerate() {
            if target_used[li] {
                continue;
            }
            for (ni, cluster) in comm_clusters.clusters.iter().enumerate() {
                if cluster_used[ni] {
                    continue;
                }
                let gap = angular_gap(ta, cluster_angles(cluster, side), circular_azimuth);
                let candidate = SharedPair {
                    target_index: li,
                    comm_cluster_index: ni,
                    score: gap.score,
                };
                // Strict inequality keeps the first (lowest l, then lowest n)
                // candidate on ties.
                if best.map_or(true, |b| candidate.score < b.score) {
                    best = Some(candidate);
                }
            }
        }
        pairs.push(best.expect("feasible selection"));
        target_used[pairs.last().unwrap().target_index] = true;
        cluster_used[pairs.last().unwrap().comm_cluster_index] = true;
    }
    let mut vector = SharingVector::zeros(l);
    for pair in &pairs {
        vector.0[pair.target_index] = 1;
    }
    Ok((pairs, vector))
}

/// Node-integration layout that decides which parameters feed back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationCase {
    /// Communication TX doubles as a mono-static sensing node: departure
    /// angles feed back.
    TxIntegratedMonostatic,
    /// Communication RX doubles as the sensing receiver: arrival angles feed
    /// back.
    RxIntegrated,
    /// Both ends integrated with bi-static sensing: departure and arrival
    /// angles feed back and the cluster delay equals the cascade LoS delay.
    TxRxIntegratedBistatic,
}

/// Per-target LoS quantities available for feedback.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetLosFeedback {
    /// LoS departure angles at the communication TX toward the target.
    pub departure: SphericalAngles,
    /// LoS arrival angles at the communication RX toward the target.
    pub arrival: SphericalAngles,
    /// LoS delay of the TX-target-RX cascade, seconds.
    pub cascade_delay: f64,
}

fn regenerate_departures(cluster: &mut Cluster, offsets: &crate::stochastic::RayOffsets) {
    if cluster.specular {
        for ray in cluster.rays.iter_mut() {
            ray.departure = cluster.centroid_departure;
        }
        return;
    }
    for (m, ray) in cluster.rays.iter_mut().enumerate() {
        let alpha = RAY_OFFSETS_20[m % RAY_OFFSETS_20.len()];
        ray.departure = SphericalAngles::new(
            cluster.centroid_departure.zenith + offsets.zod * alpha,
            cluster.centroid_departure.azimuth + offsets.aod * alpha,
        );
    }
}

fn regenerate_arrivals(cluster: &mut Cluster, offsets: &crate::stochastic::RayOffsets) {
    if cluster.specular {
        for ray in cluster.rays.iter_mut() {
            ray.arrival = cluster.centroid_arrival;
        }
        return;
    }
    for (m, ray) in cluster.rays.iter_mut().enumerate() {
        let alpha = RAY_OFFSETS_20[m % RAY_OFFSETS_20.len()];
        ray.arrival = SphericalAngles::new(
            cluster.centroid_arrival.zenith + offsets.zoa * alpha,
            cluster.centroid_arrival.azimuth + offsets.aoa * alpha,
        );
    }
}

/// Replaces the paired communication clusters' parameters with the targets'
/// deterministic LoS values and rebuilds ray angles around the new centroids
/// with the standard offset layout. All other parameters stay untouched.
pub fn apply_feedback(
    pairs: &[SharedPair],
    comm_clusters: &ClusterSet,
    feedback: &[TargetLosFeedback],
    case: IntegrationCase,
) -> Result<ClusterSet> {
    let mut out = comm_clusters.clone();
    for pair in pairs {
        let cluster = out.clusters.get_mut(pair.comm_cluster_index).ok_or_else(|| {
            Error::Config(format!(
                "pair references unknown communication cluster {}",
                pair.comm_cluster_index
            ))
        })?;
        let fb = feedback.get(pair.target_index).ok_or_else(|| {
            Error::Config(format!(
                "pair references unknown target {}",
                pair.target_index
            ))
        })?;
        match case {
            IntegrationCase::TxIntegratedMonostatic => {
                cluster.centroid_departure = fb.departure;
                regenerate_departures(cluster, &out.ray_offsets);
            }
            IntegrationCase::RxIntegrated => {
                cluster.centroid_arrival = fb.arrival;
                regenerate_arrivals(cluster, &out.ray_offsets);
            }
            IntegrationCase::TxRxIntegratedBistatic => {
                cluster.centroid_departure = fb.departure;
                cluster.centroid_arrival = fb.arrival;
                regenerate_departures(cluster, &out.ray_offsets);
                regenerate_arrivals(cluster, &out.ray_offsets);
                cluster.delay = fb.cascade_delay;
                for ray in cluster.rays.iter_mut() {
                    ray.delay = fb.cascade_delay;
                }
            }
        }
    }
    Ok(out)
}

/// Splits per-target sensing CIRs into shared and non-shared sums as selected
/// by the sharing vector. Together the two outputs contain exactly the paths
/// of the per-target inputs.
pub fn decompose(
    target_cirs: &[CirTensor],
    vector: &SharingVector,
) -> Result<(CirTensor, CirTensor)> {
    if target_cirs.len() != vector.len() {
        return Err(Error::Config(format!(
            "{} target CIRs but sharing vector of length {}",
            target_cirs.len(),
            vector.len()
        )));
    }
    let first = target_cirs.first().ok_or_else(|| {
        Error::Config("decompose requires at least one target CIR".into())
    })?;
    let (rx, tx, _, t) = first.dims();
    let kind = first.kind;
    let drop_id = first.drop_id;

    let mut shared_parts: Vec<CirTensor> = Vec::new();
    let mut non_shared_parts: Vec<CirTensor> = Vec::new();
    for (l, cir) in target_cirs.iter().enumerate() {
        let mut tagged = cir.clone();
        let shared = vector.is_shared(l);
        for meta in tagged.path_meta.iter_mut() {
            meta.shared = shared;
        }
        if shared {
            shared_parts.push(tagged);
        } else {
            non_shared_parts.push(tagged);
        }
    }

    let build = |parts: &[CirTensor], component: ComponentKind| -> Result<CirTensor> {
        if parts.is_empty() {
            Ok(CirTensor::empty(rx, tx, t, kind, component, drop_id))
        } else {
            let refs: Vec<&CirTensor> = parts.iter().collect();
            CirTensor::merge(&refs, kind, component, drop_id)
        }
    };
    Ok((
        build(&shared_parts, ComponentKind::Shared)?,
        build(&non_shared_parts, ComponentKind::NonShared)?,
    ))
}

/// Sharing degree: ratio of shared power to total power, in [0, 1].
pub fn sharing_degree(shared_power: f64, total_power: f64) -> Result<f64> {
    if !(total_power > 0.0) {
        return Err(Error::DegenerateChannel(format!(
            "total power must be positive, got {total_power}"
        )));
    }
    if shared_power > total_power * (1.0 + 1e-9) {
        return Err(Error::DegenerateChannel(format!(
            "shared power {shared_power} exceeds total power {total_power}"
        )));
    }
    Ok((shared_power / total_power).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cir::{ChannelKind, PathMeta};
    use crate::geometry::{LinkGeometry, Point3, SPEED_OF_LIGHT};
    use crate::stochastic::{Ray, RayOffsets};
    use approx::assert_relative_eq;
    use ndarray::Array4;
    use num_complex::Complex64;
    use rand::Rng;

    fn cluster_with_angles(index: usize, aod_deg: f64, zod_deg: f64) -> Cluster {
        let departure = SphericalAngles::from_degrees(zod_deg, aod_deg);
        let arrival = SphericalAngles::from_degrees(90.0, 180.0 - aod_deg);
        Cluster {
            index,
            power: 1.0,
            delay: index as f64 * 1e-9,
            centroid_departure: departure,
            centroid_arrival: arrival,
            rays: (0..20)
                .map(|m| Ray {
                    amplitude: (1.0f64 / 20.0).sqrt(),
                    delay: index as f64 * 1e-9,
                    departure: SphericalAngles::new(
                        departure.zenith,
                        departure.azimuth + 0.01 * RAY_OFFSETS_20[m],
                    ),
                    arrival,
                    xpr_linear: 10.0,
                    phases: [0.1, 0.2, 0.3, 0.4],
                    doppler_hz: 0.0,
                })
                .collect(),
            specular: false,
        }
    }

    fn cluster_set(aods_deg: &[f64]) -> ClusterSet {
        let geom = LinkGeometry::between(
            &Point3::new(0.0, 0.0, 1.5),
            &Point3::new(10.0, 0.0, 1.5),
            SPEED_OF_LIGHT / 28e9,
        )
        .unwrap();
        ClusterSet {
            clusters: aods_deg
                .iter()
                .enumerate()
                .map(|(i, &a)| cluster_with_angles(i, a, 90.0))
                .collect(),
            los: false,
            link_id: "comm".into(),
            geometry: geom,
            ray_offsets: RayOffsets {
                aod: 0.087,
                aoa: 0.14,
                zod: 0.02,
                zoa: 0.157,
            },
        }
    }

    #[test]
    fn gap_identical_angles() {
        let a = SphericalAngles::from_degrees(90.0, 30.0);
        let g = angular_gap(&a, &a, false);
        assert_eq!(g.score, 0.0);
        assert_eq!(g.gap_azimuth, 0.0);
        assert_eq!(g.gap_zenith, 0.0);
    }

    #[test]
    fn gap_azimuth_only() {
        // 20 degree azimuth gap, equal zenith: score = (20/360)/2.
        let t = SphericalAngles::from_degrees(90.0, 30.0);
        let c = SphericalAngles::from_degrees(90.0, 50.0);
        let g = angular_gap(&t, &c, false);
        assert_relative_eq!(g.score, 0.5 * (20.0 / 360.0), epsilon = 1e-12);
    }

    #[test]
    fn gap_maximum_score() {
        let g = AngularGap {
            gap_azimuth: TAU,
            gap_zenith: PI,
            score: 0.5 * (TAU / TAU + PI / PI),
        };
        assert_eq!(g.score, 1.0);
        // Raw gap across the wrap seam approaches 2 pi and scores high.
        let t = SphericalAngles::from_degrees(90.0, 179.0);
        let c = SphericalAngles::from_degrees(90.0, -179.0);
        let raw = angular_gap(&t, &c, false);
        assert_relative_eq!(raw.gap_azimuth, 358.0f64.to_radians(), epsilon = 1e-12);
        // The circular option folds it to 2 degrees.
        let circ = angular_gap(&t, &c, true);
        assert_relative_eq!(circ.gap_azimuth, 2.0f64.to_radians(), epsilon = 1e-12);
    }

    #[test]
    fn selection_matches_enumeration_example() {
        // Targets at 30 and 150 degrees vs clusters at 35 and 140: exhaustive
        // enumeration of the 2x2 assignments gives (0,0) and (1,1).
        let targets = [
            SphericalAngles::from_degrees(90.0, 30.0),
            SphericalAngles::from_degrees(90.0, 150.0),
        ];
        let clusters = cluster_set(&[35.0, 140.0]);
        let (pairs, vector) =
            select_shared_pairs(&targets, &clusters, AngleSide::Departure, 2, false).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(
            (pairs[0].target_index, pairs[0].comm_cluster_index),
            (0, 0)
        );
        assert_eq!(
            (pairs[1].target_index, pairs[1].comm_cluster_index),
            (1, 1)
        );
        assert_eq!(vector.count_shared(), 2);
    }

    #[test]
    fn selection_zero_pairs() {
        let targets = [SphericalAngles::from_degrees(90.0, 10.0)];
        let clusters = cluster_set(&[15.0]);
        let (pairs, vector) =
            select_shared_pairs(&targets, &clusters, AngleSide::Departure, 0, false).unwrap();
        assert!(pairs.is_empty());
        assert_eq!(vector.0, vec![0]);
    }

    #[test]
    fn selection_infeasible_count_rejected() {
        let targets = [SphericalAngles::from_degrees(90.0, 10.0)];
        let clusters = cluster_set(&[15.0, 40.0]);
        let err = select_shared_pairs(&targets, &clusters, AngleSide::Departure, 2, false);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn selection_indices_disjoint() {
        let targets: Vec<SphericalAngles> = (0..6)
            .map(|i| SphericalAngles::from_degrees(90.0, i as f64 * 17.0))
            .collect();
        let clusters = cluster_set(&[3.0, 21.0, 38.0, 55.0, 71.0, 88.0, 105.0]);
        let (pairs, _) =
            select_shared_pairs(&targets, &clusters, AngleSide::Departure, 5, false).unwrap();
        let mut t_seen = std::collections::HashSet::new();
        let mut c_seen = std::collections::HashSet::new();
        for p in &pairs {
            assert!(t_seen.insert(p.target_index));
            assert!(c_seen.insert(p.comm_cluster_index));
        }
    }

    #[test]
    fn greedy_first_pair_matches_brute_force() {
        // Random instances with L, N <= 5: the first greedy pick must equal
        // the global argmin, and the whole sequence must match a brute-force
        // sequential selector.
        let mut rng = crate::rng::SeedSpace::new(404).stream(0, "oracle");
        for _ in 0..200 {
            let l = 1 + rng.gen_range(0..5usize);
            let n = 1 + rng.gen_range(0..5usize);
            let targets: Vec<SphericalAngles> = (0..l)
                .map(|_| {
                    SphericalAngles::from_degrees(
                        rng.gen_range(60.0..120.0),
                        rng.gen_range(-179.0..180.0),
                    )
                })
                .collect();
            let aods: Vec<f64> = (0..n).map(|_| rng.gen_range(-179.0..180.0)).collect();
            let clusters = cluster_set(&aods);
            let k = l.min(n);
            let (pairs, _) =
                select_shared_pairs(&targets, &clusters, AngleSide::Departure, k, false).unwrap();

            // Brute force: rescan the full score matrix each round.
            let mut used_t = vec![false; l];
            let mut used_c = vec![false; n];
            for pair in &pairs {
                let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
                for li in 0..l {
                    if used_t[li] {
                        continue;
                    }
                    for ni in 0..n {
                        if used_c[ni] {
                            continue;
                        }
                        let s = angular_gap(
                            &targets[li],
                            &clusters.clusters[ni].centroid_departure,
                            false,
                        )
                        .score;
                        if s < best.2 {
                            best = (li, ni, s);
                        }
                    }
                }
                assert_eq!((pair.target_index, pair.comm_cluster_index), (best.0, best.1));
                used_t[best.0] = true;
                used_c[best.1] = true;
            }
        }
    }

    #[test]
    fn feedback_case1_replaces_departure() {
        let clusters = cluster_set(&[10.0, 80.0, 170.0]);
        let fb = vec![TargetLosFeedback {
            departure: SphericalAngles::from_degrees(88.0, 42.0),
            arrival: SphericalAngles::from_degrees(91.0, -140.0),
            cascade_delay: 3e-8,
        }];
        let pairs = vec![SharedPair {
            target_index: 0,
            comm_cluster_index: 1,
            score: 0.0,
        }];
        let out = apply_feedback(
            &pairs,
            &clusters,
            &fb,
            IntegrationCase::TxIntegratedMonostatic,
        )
        .unwrap();
        // Bit-exact equality of the fed-back centroid.
        assert_eq!(out.clusters[1].centroid_departure, fb[0].departure);
        // Arrival untouched.
        assert_eq!(
            out.clusters[1].centroid_arrival,
            clusters.clusters[1].centroid_arrival
        );
        // Rays regenerated around the new centroid with the offset layout.
        let c = &out.clusters[1];
        assert_relative_eq!(
            c.rays[0].departure.azimuth,
            fb[0].departure.azimuth + clusters.ray_offsets.aod * RAY_OFFSETS_20[0],
            epsilon = 1e-12
        );
        // Delay and power untouched in case 1.
        assert_eq!(c.delay, clusters.clusters[1].delay);
        assert_eq!(c.power, clusters.clusters[1].power);
    }

    #[test]
    fn feedback_empty_pairs_is_identity() {
        let clusters = cluster_set(&[10.0, 80.0]);
        let out = apply_feedback(
            &[],
            &clusters,
            &[],
            IntegrationCase::TxIntegratedMonostatic,
        )
        .unwrap();
        assert_eq!(out, clusters);
    }

    #[test]
    fn feedback_case3_replaces_both_and_delay() {
        let clusters = cluster_set(&[10.0, 80.0]);
        let fb = vec![TargetLosFeedback {
            departure: SphericalAngles::from_degrees(88.0, 42.0),
            arrival: SphericalAngles::from_degrees(92.0, -30.0),
            cascade_delay: 5e-8,
        }];
        let pairs = vec![SharedPair {
            target_index: 0,
            comm_cluster_index: 0,
            score: 0.0,
        }];
        let out = apply_feedback(
            &pairs,
            &clusters,
            &fb,
            IntegrationCase::TxRxIntegratedBistatic,
        )
        .unwrap();
        assert_eq!(out.clusters[0].centroid_departure, fb[0].departure);
        assert_eq!(out.clusters[0].centroid_arrival, fb[0].arrival);
        assert_eq!(out.clusters[0].delay, 5e-8);
        assert!(out.clusters[0].rays.iter().all(|r| r.delay == 5e-8));
    }

    #[test]
    fn feedback_case2_replaces_arrival_only() {
        let clusters = cluster_set(&[10.0]);
        let fb = vec![TargetLosFeedback {
            departure: SphericalAngles::from_degrees(88.0, 42.0),
            arrival: SphericalAngles::from_degrees(92.0, -30.0),
            cascade_delay: 5e-8,
        }];
        let pairs = vec![SharedPair {
            target_index: 0,
            comm_cluster_index: 0,
            score: 0.0,
        }];
        let out = apply_feedback(&pairs, &clusters, &fb, IntegrationCase::RxIntegrated).unwrap();
        assert_eq!(out.clusters[0].centroid_arrival, fb[0].arrival);
        assert_eq!(
            out.clusters[0].centroid_departure,
            clusters.clusters[0].centroid_departure
        );
    }

    #[test]
    fn feedback_is_idempotent() {
        let clusters = cluster_set(&[10.0, 80.0, 170.0]);
        let fb = vec![
            TargetLosFeedback {
                departure: SphericalAngles::from_degrees(88.0, 42.0),
                arrival: SphericalAngles::from_degrees(92.0, -30.0),
                cascade_delay: 5e-8,
            },
            TargetLosFeedback {
                departure: SphericalAngles::from_degrees(85.0, -100.0),
                arrival: SphericalAngles::from_degrees(95.0, 60.0),
                cascade_delay: 6e-8,
            },
        ];
        let pairs = vec![
            SharedPair {
                target_index: 0,
                comm_cluster_index: 2,
                score: 0.0,
            },
            SharedPair {
                target_index: 1,
                comm_cluster_index: 0,
                score: 0.0,
            },
        ];
        for case in [
            IntegrationCase::TxIntegratedMonostatic,
            IntegrationCase::RxIntegrated,
            IntegrationCase::TxRxIntegratedBistatic,
        ] {
            let once = apply_feedback(&pairs, &clusters, &fb, case).unwrap();
            let twice = apply_feedback(&pairs, &once, &fb, case).unwrap();
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn feedback_unknown_indices_rejected() {
        let clusters = cluster_set(&[10.0]);
        let fb = vec![TargetLosFeedback {
            departure: SphericalAngles::from_degrees(88.0, 42.0),
            arrival: SphericalAngles::from_degrees(92.0, -30.0),
            cascade_delay: 5e-8,
        }];
        let bad_cluster = vec![SharedPair {
            target_index: 0,
            comm_cluster_index: 7,
            score: 0.0,
        }];
        assert!(matches!(
            apply_feedback(
                &bad_cluster,
                &clusters,
                &fb,
                IntegrationCase::TxIntegratedMonostatic
            ),
            Err(Error::Config(_))
        ));
        let bad_target = vec![SharedPair {
            target_index: 3,
            comm_cluster_index: 0,
            score: 0.0,
        }];
        assert!(matches!(
            apply_feedback(
                &bad_target,
                &clusters,
                &fb,
                IntegrationCase::TxIntegratedMonostatic
            ),
            Err(Error::Config(_))
        ));
    }

    fn target_cir(value: f64, target: usize) -> CirTensor {
        let mut coefficients = Array4::zeros((1, 1, 1, 1));
        coefficients[[0, 0, 0, 0]] = Complex64::new(value, value * 0.5);
        CirTensor {
            coefficients,
            path_delays: vec![target as f64 * 1e-9],
            path_meta: vec![PathMeta {
                target: Some(target),
                cluster: None,
                shared: false,
            }],
            kind: ChannelKind::Sensing,
            component: ComponentKind::Total,
            drop_id: 0,
        }
    }

    #[test]
    fn decompose_unit_selector() {
        let cirs = vec![target_cir(1.0, 0), target_cir(2.0, 1)];
        let (shared, non_shared) = decompose(&cirs, &SharingVector(vec![1, 0])).unwrap();
        assert_eq!(shared.num_paths(), 1);
        assert_eq!(non_shared.num_paths(), 1);
        assert_eq!(
            shared.coefficients[[0, 0, 0, 0]],
            cirs[0].coefficients[[0, 0, 0, 0]]
        );
        assert_eq!(
            non_shared.coefficients[[0, 0, 0, 0]],
            cirs[1].coefficients[[0, 0, 0, 0]]
        );
        assert!(shared.path_meta[0].shared);
        assert!(!non_shared.path_meta[0].shared);
    }

    #[test]
    fn decompose_all_ones_empties_non_shared() {
        let cirs = vec![target_cir(1.0, 0), target_cir(2.0, 1)];
        let (shared, non_shared) = decompose(&cirs, &SharingVector(vec![1, 1])).unwrap();
        assert_eq!(shared.num_paths(), 2);
        assert_eq!(non_shared.num_paths(), 0);
        assert_eq!(non_shared.power(), 0.0);
    }

    #[test]
    fn decompose_matches_direct_sum_oracle() {
        let mut rng = crate::rng::SeedSpace::new(9).stream(0, "dec");
        let cirs: Vec<CirTensor> = (0..12).map(|i| target_cir(rng.gen(), i)).collect();
        let s: Vec<u8> = (0..12).map(|_| u8::from(rng.gen::<bool>())).collect();
        let vector = SharingVector(s);
        let (shared, non_shared) = decompose(&cirs, &vector).unwrap();

        // Brute-force totals per component.
        let direct_total: Complex64 = cirs
            .iter()
            .map(|c| c.coefficients[[0, 0, 0, 0]])
            .sum();
        let split_total: Complex64 = shared
            .coefficients
            .iter()
            .chain(non_shared.coefficients.iter())
            .copied()
            .sum();
        assert!((direct_total - split_total).norm() <= 1e-12 * direct_total.norm().max(1.0));
        assert_eq!(
            shared.num_paths() + non_shared.num_paths(),
            cirs.len()
        );
    }

    #[test]
    fn decompose_length_mismatch_rejected() {
        let cirs = vec![target_cir(1.0, 0)];
        assert!(matches!(
            decompose(&cirs, &SharingVector(vec![1, 0])),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn sharing_degree_examples() {
        assert_eq!(sharing_degree(0.4, 1.0).unwrap(), 0.4);
        assert_eq!(sharing_degree(0.0, 2.5).unwrap(), 0.0);
        assert_eq!(sharing_degree(3.0, 3.0).unwrap(), 1.0);
        assert!(matches!(
            sharing_degree(0.0, 0.0),
            Err(Error::DegenerateChannel(_))
        ));
        assert!(sharing_degree(2.0, 1.0).is_err());
    }
}
