//! Single-drop orchestration: geometry, path loss, sensing sub-channels,
//! target responses, communication clusters, shared-pair selection,
//! feedback, CIR assembly, decomposition, and the sharing-degree metrics.
//!
//! A drop is fully deterministic given (config, root_seed, drop_id): every
//! random decision comes from a named substream, so the communication draws
//! never depend on the number of targets or on the requested shared count.

use serde::{Deserialize, Serialize};

use crate::cir::{ChannelKind, CirTensor, ComponentKind};
use crate::communication::{annotate_doppler, assemble_comm_cir, CommLink};
use crate::error::{Error, Result};
use crate::geometry::{los_angles, los_cascade_delay, LinkGeometry, SphericalAngles};
use crate::rng::SeedSpace;
use crate::sensing::{
    assemble_sensing_cir, build_target_sub_channels, cascade, evaluate_rcs, inh_pathloss_db,
    TargetCascade,
};
use crate::sharing::{
    apply_feedback, decompose, select_shared_pairs, sharing_degree, AngleSide, IntegrationCase,
    SharingState, TargetLosFeedback,
};
use crate::stochastic::{draw_large_scale, generate_clusters, prune_clusters, LargeScaleParams};

use super::config::ScenarioConfig;
use crate::stochastic::ScenarioTables;

/// Exportable summary of one communication cluster after feedback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommClusterRecord {
    pub index: usize,
    pub delay_s: f64,
    pub power: f64,
    pub aod_deg: f64,
    pub zod_deg: f64,
    pub aoa_deg: f64,
    pub zoa_deg: f64,
    pub shared: bool,
    pub specular: bool,
}

/// Exportable summary of one sensing cascade path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingPathRecord {
    pub target: usize,
    pub path_index: usize,
    pub delay_s: f64,
    /// Sum of |h|^2 over antenna pairs at the first time sample.
    pub power: f64,
    pub aod_deg: f64,
    pub zod_deg: f64,
    pub aoa_deg: f64,
    pub zoa_deg: f64,
    pub doppler_hz: f64,
    pub shared: bool,
}

/// Everything one drop produces.
#[derive(Debug, Clone)]
pub struct DropResult {
    pub drop_id: u64,
    pub config_hash: String,
    pub sharing: SharingState,
    pub sd_c: f64,
    pub sd_s: f64,
    pub comm_lsp: LargeScaleParams,
    pub comm_pathloss_db: f64,
    pub comm_clusters: Vec<CommClusterRecord>,
    pub sensing_paths: Vec<SensingPathRecord>,
    pub comm_total: CirTensor,
    pub comm_shared: CirTensor,
    pub comm_non_shared: CirTensor,
    pub sensing_total: CirTensor,
    pub sensing_shared: CirTensor,
    pub sensing_non_shared: CirTensor,
}

impl DropResult {
    /// Checks the superposition and pairing invariants; export refuses
    /// results that fail.
    pub fn validate(&self) -> Result<()> {
        validate_split(&self.comm_total, &self.comm_shared, &self.comm_non_shared)?;
        validate_split(
            &self.sensing_total,
            &self.sensing_shared,
            &self.sensing_non_shared,
        )?;

        // Pair disjointness and vector consistency.
        let pairs = &self.sharing.pairs;
        let mut targets_seen = std::collections::HashSet::new();
        let mut clusters_seen = std::collections::HashSet::new();
        for p in pairs {
            if !targets_seen.insert(p.target_index) || !clusters_seen.insert(p.comm_cluster_index)
            {
                return Err(Error::Config(format!(
                    "drop {}: repeated index in shared pairs",
                    self.drop_id
                )));
            }
            if !self.sharing.vector.is_shared(p.target_index) {
                return Err(Error::Config(format!(
                    "drop {}: selection vector misses paired target {}",
                    self.drop_id, p.target_index
                )));
            }
        }
        if self.sharing.vector.count_shared() != pairs.len() {
            return Err(Error::Config(format!(
                "drop {}: selection vector weight {} != pair count {}",
                self.drop_id,
                self.sharing.vector.count_shared(),
                pairs.len()
            )));
        }
        Ok(())
    }
}

/// Verifies total = shared (+) non-shared: the component tensors partition the
/// total's paths bit-exactly, and powers add within 1e-12 relative error.
fn validate_split(total: &CirTensor, shared: &CirTensor, non_shared: &CirTensor) -> Result<()> {
    if shared.num_paths() + non_shared.num_paths() != total.num_paths() {
        return Err(Error::Config(format!(
            "component path counts {} + {} != total {}",
            shared.num_paths(),
            non_shared.num_paths(),
            total.num_paths()
        )));
    }
    let power_sum = shared.power() + non_shared.power();
    let total_power = total.power();
    let tolerance = 1e-12 * total_power.max(1e-300);
    if (power_sum - total_power).abs() > tolerance {
        return Err(Error::DegenerateChannel(format!(
            "superposition power mismatch: {power_sum} vs {total_power}"
        )));
    }
    Ok(())
}

/// Runs one drop with the shared count derived from the configured ratio.
pub fn run_drop(config: &ScenarioConfig, tables: &ScenarioTables, drop_id: u64) -> Result<DropResult> {
    run_drop_with_count(config, tables, drop_id, None)
}

/// Runs one drop, optionally overriding the requested shared-pair count
/// (used by sweep campaigns). The effective count is clamped to the number
/// of targets and to the effective (post-pruning) cluster count.
pub fn run_drop_with_count(
    config: &ScenarioConfig,
    tables: &ScenarioTables,
    drop_id: u64,
    count_override: Option<usize>,
) -> Result<DropResult> {
    config.validate()?;
    let space = SeedSpace::new(config.root_seed);
    let wavelength = config.wavelength();
    let carrier_ghz = config.carrier_ghz();
    let time_samples = &config.time_samples_s;

    // Nodes and arrays.
    let bs = config.bs_node();
    let ut = config.ut_node();
    let sensing_rx = config.sensing_rx_node();
    let (bs_array, bs_pattern) = config.arrays.bs.build(bs.position, wavelength)?;
    let (ut_array, ut_pattern) = config.arrays.ut.build(ut.position, wavelength)?;
    let (srx_array, srx_pattern) = match &config.arrays.sensing_rx {
        Some(cfg) => cfg.build(sensing_rx.position, wavelength)?,
        None => {
            if sensing_rx.position == bs.position {
                config.arrays.bs.build(sensing_rx.position, wavelength)?
            } else if sensing_rx.position == ut.position {
                config.arrays.ut.build(sensing_rx.position, wavelength)?
            } else {
                (
                    crate::antenna::ArrayGeometry::single(sensing_rx.position),
                    crate::antenna::ElementPattern::isotropic(),
                )
            }
        }
    };

    let targets = config.domain_targets();
    let num_targets = targets.len();

    // Communication link geometry and large-scale parameters (steps C1-C4).
    let comm_geom = LinkGeometry::between(&bs.position, &ut.position, wavelength)?;
    let comm_lsp = draw_large_scale(
        tables,
        carrier_ghz,
        config.comm_los,
        &mut space.stream(drop_id, "comm/lsp"),
    );
    let comm_pathloss_db = inh_pathloss_db(comm_geom.distance, carrier_ghz, config.comm_los);

    // Communication clusters (steps C5-C7) plus pruning.
    let comm_raw = generate_clusters(
        tables,
        &comm_lsp,
        &comm_geom,
        "comm",
        &mut space.stream(drop_id, "comm/clusters"),
    );
    let comm_pruned = prune_clusters(&comm_raw, config.prune_threshold_db);

    // Sensing sub-channels (S2, S5) and target responses (S6).
    let mut legs = Vec::with_capacity(num_targets);
    let mut rcs_matrices = Vec::with_capacity(num_targets);
    for target in &targets {
        let (tx_leg, rx_leg) = build_target_sub_channels(
            &bs,
            target,
            &sensing_rx,
            &config.sensing_clusters,
            tables,
            wavelength,
            &mut space.stream(drop_id, &format!("sensing/target{}/legs", target.id)),
        )?;
        let incident = los_angles(&target.position, &bs.position)?;
        let outgoing = los_angles(&target.position, &sensing_rx.position)?;
        let rcs = evaluate_rcs(
            &target.rcs,
            &outgoing,
            &incident,
            &mut space.stream(drop_id, &format!("sensing/target{}/rcs", target.id)),
        );
        legs.push((tx_leg, rx_leg));
        rcs_matrices.push(rcs);
    }

    // Shared-pair selection (step C&S4, the S vector).
    let pairing_side = match config.integration_case {
        IntegrationCase::RxIntegrated => AngleSide::Arrival,
        _ => AngleSide::Departure,
    };
    let pairing_reference = match pairing_side {
        AngleSide::Departure => bs.position,
        AngleSide::Arrival => ut.position,
    };
    let target_pair_angles: Vec<SphericalAngles> = targets
        .iter()
        .map(|t| los_angles(&pairing_reference, &t.position))
        .collect::<Result<_>>()?;
    let requested = count_override.unwrap_or_else(|| config.requested_shared_count());
    let n_shared = requested.min(num_targets).min(comm_pruned.len());
    let (pairs, vector) = select_shared_pairs(
        &target_pair_angles,
        &comm_pruned,
        pairing_side,
        n_shared,
        config.circular_azimuth_pairing,
    )?;

    // Feedback of deterministic target parameters into the paired clusters.
    let feedback: Vec<TargetLosFeedback> = targets
        .iter()
        .map(|t| -> Result<TargetLosFeedback> {
            // Degenerate layouts are rejected here even for hand-built
            // configs that skipped validation.
            los_cascade_delay(&bs.position, &t.position, &sensing_rx.position)?;
            // Leg-additive form, bit-identical to the sensing LoS path delay
            // (TX-leg delay plus RX-leg delay).
            let tx_delay =
                crate::geometry::distance_3d(&bs.position, &t.position) / crate::SPEED_OF_LIGHT;
            let rx_delay = crate::geometry::distance_3d(&t.position, &sensing_rx.position)
                / crate::SPEED_OF_LIGHT;
            Ok(TargetLosFeedback {
                departure: los_angles(&bs.position, &t.position)?,
                arrival: los_angles(&ut.position, &t.position)?,
                cascade_delay: tx_delay + rx_delay,
            })
        })
        .collect::<Result<_>>()?;
    let mut comm_fed = apply_feedback(&pairs, &comm_pruned, &feedback, config.integration_case)?;
    annotate_doppler(&mut comm_fed, &ut.velocity);

    // Cascade formation (S10) and per-target CIR assembly.
    let mut cascades: Vec<TargetCascade> = Vec::with_capacity(num_targets);
    for (target, ((tx_leg, rx_leg), rcs)) in
        targets.iter().zip(legs.iter().zip(rcs_matrices.iter()))
    {
        cascades.push(cascade(
            target.id,
            tx_leg,
            rcs,
            rx_leg,
            config.pathloss_mode,
            &mut space.stream(drop_id, &format!("sensing/target{}/cascade", target.id)),
        ));
    }
    let per_target_cirs: Vec<CirTensor> = cascades
        .iter()
        .map(|c| {
            assemble_sensing_cir(
                std::slice::from_ref(c),
                &bs_array,
                &bs_pattern,
                &srx_array,
                &srx_pattern,
                wavelength,
                time_samples,
                drop_id,
            )
        })
        .collect::<Result<_>>()?;
    let refs: Vec<&CirTensor> = per_target_cirs.iter().collect();
    let sensing_total = CirTensor::merge(&refs, ChannelKind::Sensing, ComponentKind::Total, drop_id)?;
    let (sensing_shared, sensing_non_shared) = decompose(&per_target_cirs, &vector)?;

    // Communication CIR assembly with shared flags per cluster.
    let shared_flags: Vec<bool> = (0..comm_fed.len())
        .map(|n| pairs.iter().any(|p| p.comm_cluster_index == n))
        .collect();
    let link = CommLink {
        tx: bs,
        rx: ut,
        lsp: comm_lsp,
        clusters: comm_fed.clone(),
    };
    let (comm_total, comm_shared, comm_non_shared) = assemble_comm_cir(
        &link,
        &bs_array,
        &bs_pattern,
        &ut_array,
        &ut_pattern,
        time_samples,
        &shared_flags,
        drop_id,
    )?;

    // Sharing degrees: communication over cluster powers, sensing over
    // cascade powers.
    let comm_shared_power: f64 = comm_fed
        .clusters
        .iter()
        .zip(shared_flags.iter())
        .filter(|(_, &f)| f)
        .map(|(c, _)| c.power)
        .sum();
    let comm_total_power = comm_fed.total_power();
    let sd_c = if n_shared == 0 {
        0.0
    } else {
        sharing_degree(comm_shared_power, comm_total_power)?
    };
    let sd_s = if n_shared == 0 {
        0.0
    } else {
        sharing_degree(sensing_shared.power(), sensing_total.power())?
    };

    // Exportable records.
    let comm_clusters: Vec<CommClusterRecord> = comm_fed
        .clusters
        .iter()
        .zip(shared_flags.iter())
        .map(|(c, &shared)| CommClusterRecord {
            index: c.index,
            delay_s: c.delay,
            power: c.power,
            aod_deg: c.centroid_departure.azimuth_deg(),
            zod_deg: c.centroid_departure.zenith_deg(),
            aoa_deg: c.centroid_arrival.azimuth_deg(),
            zoa_deg: c.centroid_arrival.zenith_deg(),
            shared,
            specular: c.specular,
        })
        .collect();

    let mut sensing_paths = Vec::new();
    for (l, (cascade, cir)) in cascades.iter().zip(per_target_cirs.iter()).enumerate() {
        let (w, e, _, _) = cir.dims();
        for (p, path) in cascade.paths.iter().enumerate() {
            let mut power = 0.0;
            for wi in 0..w {
                for ei in 0..e {
                    power += cir.coefficients[[wi, ei, p, 0]].norm_sqr();
                }
            }
            sensing_paths.push(SensingPathRecord {
                target: l,
                path_index: p,
                delay_s: path.delay,
                power,
                aod_deg: path.tx_ray.departure.azimuth_deg(),
                zod_deg: path.tx_ray.departure.zenith_deg(),
                aoa_deg: path.rx_ray.arrival.azimuth_deg(),
                zoa_deg: path.rx_ray.arrival.zenith_deg(),
                doppler_hz: path.doppler_hz,
                shared: vector.is_shared(l),
            });
        }
    }

    let result = DropResult {
        drop_id,
        config_hash: config.config_hash(),
        sharing: SharingState {
            vector,
            pairs,
            target_ratio: config.shared_ratio,
        },
        sd_c,
        sd_s,
        comm_lsp,
        comm_pathloss_db,
        comm_clusters,
        sensing_paths,
        comm_total,
        comm_shared,
        comm_non_shared,
        sensing_total,
        sensing_shared,
        sensing_non_shared,
    };
    result.validate()?;
    Ok(result)
}

/// The communication pipeline alone, with no sensing steps and no sharing:
/// the baseline against which the sharing-disabled simulator must be
/// bit-identical under the same seed.
pub fn baseline_comm_cir(
    config: &ScenarioConfig,
    tables: &ScenarioTables,
    drop_id: u64,
) -> Result<CirTensor> {
    let space = SeedSpace::new(config.root_seed);
    let wavelength = config.wavelength();
    let bs = config.bs_node();
    let ut = config.ut_node();
    let (bs_array, bs_pattern) = config.arrays.bs.build(bs.position, wavelength)?;
    let (ut_array, ut_pattern) = config.arrays.ut.build(ut.position, wavelength)?;
    let comm_geom = LinkGeometry::between(&bs.position, &ut.position, wavelength)?;
    let comm_lsp = draw_large_scale(
        tables,
        config.carrier_ghz(),
        config.comm_los,
        &mut space.stream(drop_id, "comm/lsp"),
    );
    let comm_raw = generate_clusters(
        tables,
        &comm_lsp,
        &comm_geom,
        "comm",
        &mut space.stream(drop_id, "comm/clusters"),
    );
    let mut clusters = prune_clusters(&comm_raw, config.prune_threshold_db);
    annotate_doppler(&mut clusters, &ut.velocity);
    let flags = vec![false; clusters.len()];
    let link = CommLink {
        tx: bs,
        rx: ut,
        lsp: comm_lsp,
        clusters,
    };
    let (total, _, _) = assemble_comm_cir(
        &link,
        &bs_array,
        &bs_pattern,
        &ut_array,
        &ut_pattern,
        &config.time_samples_s,
        &flags,
        drop_id,
    )?;
    Ok(total)
}
