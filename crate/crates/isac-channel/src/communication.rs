//! Communication CIR assembly from the stochastic clusters plus any fed-back
//! shared clusters, split into total, shared, and non-shared tensors.

use std::f64::consts::TAU;

use ndarray::Array4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::antenna::{array_phase, ArrayGeometry, ElementPattern};
use crate::cir::{ChannelKind, CirTensor, ComponentKind, PathMeta};
use crate::error::{Error, Result};
use crate::geometry::{NodeDescriptor, Velocity3};
use crate::polar::PolarMatrix;
use crate::stochastic::{ClusterSet, LargeScaleParams, Ray};

/// One communication link: endpoints, its large-scale draw, and the cluster
/// set to assemble (pruned, with any shared-cluster feedback applied).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommLink {
    pub tx: NodeDescriptor,
    pub rx: NodeDescriptor,
    pub lsp: LargeScaleParams,
    pub clusters: ClusterSet,
}

/// Doppler shift of one ray from the receiver velocity projected onto the
/// ray's arrival direction.
pub fn doppler_comm(ray: &Ray, rx_velocity: &Velocity3, wavelength: f64) -> f64 {
    debug_assert!(wavelength > 0.0);
    rx_velocity.dot(&ray.arrival.unit_vector()) / wavelength
}

/// Annotates every ray's Doppler from the receiver velocity. Call after any
/// feedback that rewrites arrival angles.
pub fn annotate_doppler(clusters: &mut ClusterSet, rx_velocity: &Velocity3) {
    let wavelength = clusters.geometry.wavelength;
    for cluster in clusters.clusters.iter_mut() {
        for ray in cluster.rays.iter_mut() {
            ray.doppler_hz = doppler_comm(ray, rx_velocity, wavelength);
        }
    }
}

/// Assembles the communication CIR: one tap per cluster at the cluster delay,
/// summing the per-ray coefficients
/// `[rx field]^T (phase/XPR matrix) [tx field]` times array phasors, Doppler
/// phasor, and ray amplitude.
///
/// Returns (total, shared, non_shared); the component tensors are subsets of
/// the same computed taps, so total = shared + non_shared holds exactly.
pub fn assemble_comm_cir(
    link: &CommLink,
    tx_array: &ArrayGeometry,
    tx_pattern: &ElementPattern,
    rx_array: &ArrayGeometry,
    rx_pattern: &ElementPattern,
    time_samples: &[f64],
    shared_flags: &[bool],
    drop_id: u64,
) -> Result<(CirTensor, CirTensor, CirTensor)> {
    let clusters = &link.clusters.clusters;
    if shared_flags.len() != clusters.len() {
        return Err(Error::Config(format!(
            "shared_flags length {} does not match cluster count {}",
            shared_flags.len(),
            clusters.len()
        )));
    }
    if time_samples.is_empty() {
        return Err(Error::Config("time_samples must not be empty".into()));
    }
    let wavelength = link.clusters.geometry.wavelength;
    let q = rx_array.count();
    let p = tx_array.count();
    let t = time_samples.len();
    let n = clusters.len();

    let mut coefficients = Array4::zeros((q, p, n, t));
    let mut path_delays = Vec::with_capacity(n);
    let mut path_meta = Vec::with_capacity(n);
    for (ci, cluster) in clusters.iter().enumerate() {
        for ray in &cluster.rays {
            let f_rx = rx_pattern.field_response(&ray.arrival);
            let f_tx = tx_pattern.field_response(&ray.departure);
            let coupling = PolarMatrix::from_phases_xpr(&ray.phases, ray.xpr_linear);
            let base = coupling.bilinear(f_rx, f_tx) * ray.amplitude;
            for (qi, d_q) in rx_array.element_positions.iter().enumerate() {
                let ph_rx = array_phase(d_q, &ray.arrival, wavelength)?;
                for (pi, d_p) in tx_array.element_positions.iter().enumerate() {
                    let ph_tx = array_phase(d_p, &ray.departure, wavelength)?;
                    let static_part = base * ph_rx * ph_tx;
                    for (ti, &time) in time_samples.iter().enumerate() {
                        let doppler = Complex64::from_polar(1.0, TAU * ray.doppler_hz * time);
                        coefficients[[qi, pi, ci, ti]] += static_part * doppler;
                    }
                }
            }
        }
        path_delays.push(cluster.delay);
        path_meta.push(PathMeta {
            target: None,
            cluster: Some(cluster.index),
            shared: shared_flags[ci],
        });
    }

    let total = CirTensor {
        coefficients,
        path_delays,
        path_meta,
        kind: ChannelKind::Communication,
        component: ComponentKind::Total,
        drop_id,
    };
    let shared_idx: Vec<usize> = (0..n).filter(|&i| shared_flags[i]).collect();
    let non_shared_idx: Vec<usize> = (0..n).filter(|&i| !shared_flags[i]).collect();
    let shared = total.select_paths(&shared_idx, ComponentKind::Shared)?;
    let non_shared = total.select_paths(&non_shared_idx, ComponentKind::NonShared)?;
    Ok((total, shared, non_shared))
}
