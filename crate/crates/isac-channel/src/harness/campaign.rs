//! Sweep campaigns: repeated drops over a list of shared-cluster counts,
//! collecting per-count sharing-degree samples and summary statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{mean, std_dev};
use crate::stochastic::ScenarioTables;

use super::config::ScenarioConfig;
use super::drop::run_drop_with_count;

/// Sharing-degree samples and summary stats for one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub shared_count: usize,
    /// Per-drop communication sharing degree, ordered by drop id.
    pub sd_c: Vec<f64>,
    /// Per-drop sensing sharing degree, ordered by drop id.
    pub sd_s: Vec<f64>,
    pub mean_sd_c: f64,
    pub std_sd_c: f64,
    pub mean_sd_s: f64,
    pub std_sd_s: f64,
}

/// Results of a whole sweep campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub config_hash: String,
    pub n_drops: u64,
    pub points: Vec<SweepPoint>,
}

/// Runs `config.n_drops` drops for every shared-cluster count in `counts`.
///
/// Drops execute in parallel; every drop owns its named substreams, so the
/// gathered samples are identical across thread counts. The same drop ids
/// (hence the same communication channels) are reused for every count, which
/// makes per-count sharing degrees paired samples.
pub fn run_campaign(
    config: &ScenarioConfig,
    tables: &ScenarioTables,
    counts: &[usize],
) -> Result<CampaignResult> {
    if counts.is_empty() {
        return Err(Error::Config("sweep requires at least one count".into()));
    }
    let num_targets = config.targets.len();
    for &count in counts {
        if count > num_targets {
            return Err(Error::Config(format!(
                "sweep count {count} exceeds the number of targets ({num_targets})"
            )));
        }
    }

    let mut points = Vec::with_capacity(counts.len());
    for &count in counts {
        let results: Vec<(f64, f64)> = (0..config.n_drops)
            .into_par_iter()
            .map(|drop_id| {
                run_drop_with_count(config, tables, drop_id, Some(count))
                    .map(|r| (r.sd_c, r.sd_s))
            })
            .collect::<Result<_>>()?;
        let sd_c: Vec<f64> = results.iter().map(|r| r.0).collect();
        let sd_s: Vec<f64> = results.iter().map(|r| r.1).collect();
        points.push(SweepPoint {
            shared_count: count,
            mean_sd_c: mean(&sd_c),
            std_sd_c: std_dev(&sd_c),
            mean_sd_s: mean(&sd_s),
            std_sd_s: std_dev(&sd_s),
            sd_c,
            sd_s,
        });
    }
    Ok(CampaignResult {
        config_hash: config.config_hash(),
        n_drops: config.n_drops,
        points,
    })
}
