//! Result persistence: per-drop JSON records, path-geometry CSV tables,
//! binary CIR tensors with JSON sidecars, campaign CDF/summary tables, and a
//! manifest listing everything written.
//!
//! All writers are deterministic: the same results produce byte-identical
//! files, so export output doubles as a reproducibility check.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cir::CirTensor;
use crate::error::{Error, Result};
use crate::stats::ecdf;

use super::campaign::CampaignResult;
use super::drop::DropResult;

/// Which artifact families to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    /// JSON records (plus CIR binaries with their JSON sidecars).
    JsonRecords,
    /// CSV tables (plus CIR binaries with their JSON sidecars).
    CsvTables,
    /// Everything.
    All,
}

impl ExportFormat {
    fn json(&self) -> bool {
        matches!(self, ExportFormat::JsonRecords | ExportFormat::All)
    }

    fn csv(&self) -> bool {
        matches!(self, ExportFormat::CsvTables | ExportFormat::All)
    }
}

/// Per-drop JSON record: everything needed to audit one drop without parsing
/// binaries.
#[derive(Debug, Clone, Serialize)]
struct DropRecord<'a> {
    drop_id: u64,
    config_hash: &'a str,
    sharing: &'a crate::sharing::SharingState,
    sd_c: f64,
    sd_s: f64,
    comm_lsp: &'a crate::stochastic::LargeScaleParams,
    comm_pathloss_db: f64,
    comm_clusters: &'a [super::drop::CommClusterRecord],
    sensing_paths: &'a [super::drop::SensingPathRecord],
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("record serialization: {e}")))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_cir(dir: &Path, stem: &str, tensor: &CirTensor, manifest: &mut Vec<PathBuf>) -> Result<()> {
    let bin = dir.join(format!("{stem}.bin"));
    let sidecar = dir.join(format!("{stem}.json"));
    tensor.write_binary(&bin)?;
    tensor.write_sidecar(&sidecar)?;
    manifest.push(bin);
    manifest.push(sidecar);
    Ok(())
}

fn write_paths_csv(path: &Path, result: &DropResult) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| {
        Error::Config(format!("{}: {e}", path.display()))
    })?;
    let map_csv = |e: csv::Error| Error::Config(format!("{}: {e}", path.display()));
    writer
        .write_record([
            "channel",
            "owner",
            "path",
            "aaod_deg",
            "zaod_deg",
            "aaoa_deg",
            "zaoa_deg",
            "delay_s",
            "power",
            "doppler_hz",
            "shared",
        ])
        .map_err(map_csv)?;
    for c in &result.comm_clusters {
        writer
            .write_record([
                "communication".to_string(),
                format!("cluster{}", c.index),
                c.index.to_string(),
                c.aod_deg.to_string(),
                c.zod_deg.to_string(),
                c.aoa_deg.to_string(),
                c.zoa_deg.to_string(),
                c.delay_s.to_string(),
                c.power.to_string(),
                "0".to_string(),
                u8::from(c.shared).to_string(),
            ])
            .map_err(map_csv)?;
    }
    for p in &result.sensing_paths {
        writer
            .write_record([
                "sensing".to_string(),
                format!("target{}", p.target),
                p.path_index.to_string(),
                p.aod_deg.to_string(),
                p.zod_deg.to_string(),
                p.aoa_deg.to_string(),
                p.zoa_deg.to_string(),
                p.delay_s.to_string(),
                p.power.to_string(),
                p.doppler_hz.to_string(),
                u8::from(p.shared).to_string(),
            ])
            .map_err(map_csv)?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(path, e))
}

/// Exports per-drop results. Every drop is validated first; corrupt results
/// refuse to export. Returns the list of files written (the manifest), which
/// is also persisted as `manifest.json`.
pub fn export_drops(
    results: &[DropResult],
    format: ExportFormat,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut manifest = Vec::new();
    for result in results {
        result.validate()?;
        let id = result.drop_id;
        if format.json() {
            let record = DropRecord {
                drop_id: id,
                config_hash: &result.config_hash,
                sharing: &result.sharing,
                sd_c: result.sd_c,
                sd_s: result.sd_s,
                comm_lsp: &result.comm_lsp,
                comm_pathloss_db: result.comm_pathloss_db,
                comm_clusters: &result.comm_clusters,
                sensing_paths: &result.sensing_paths,
            };
            let path = out_dir.join(format!("record_drop{id:05}.json"));
            write_json(&path, &record)?;
            manifest.push(path);
        }
        if format.csv() {
            let path = out_dir.join(format!("paths_drop{id:05}.csv"));
            write_paths_csv(&path, result)?;
            manifest.push(path);
        }
        for (stem, tensor) in [
            ("comm_total", &result.comm_total),
            ("comm_shared", &result.comm_shared),
            ("comm_non_shared", &result.comm_non_shared),
            ("sensing_total", &result.sensing_total),
            ("sensing_shared", &result.sensing_shared),
            ("sensing_non_shared", &result.sensing_non_shared),
        ] {
            write_cir(
                out_dir,
                &format!("cir_{stem}_drop{id:05}"),
                tensor,
                &mut manifest,
            )?;
        }
    }
    write_manifest(out_dir, &mut manifest)?;
    Ok(manifest)
}

fn write_cdf_csv(path: &Path, campaign: &CampaignResult, pick: impl Fn(&super::campaign::SweepPoint) -> &[f64]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let map_csv = |e: csv::Error| Error::Config(format!("{}: {e}", path.display()));
    writer
        .write_record(["shared_count", "sd", "cdf"])
        .map_err(map_csv)?;
    for point in &campaign.points {
        for (value, f) in ecdf(pick(point)) {
            writer
                .write_record([
                    point.shared_count.to_string(),
                    value.to_string(),
                    f.to_string(),
                ])
                .map_err(map_csv)?;
        }
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Exports campaign-level CDF and summary tables.
pub fn export_campaign(
    campaign: &CampaignResult,
    format: ExportFormat,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut manifest = Vec::new();
    if format.csv() {
        let sd_c_path = out_dir.join("cdf_sd_c.csv");
        write_cdf_csv(&sd_c_path, campaign, |p| &p.sd_c)?;
        manifest.push(sd_c_path);
        let sd_s_path = out_dir.join("cdf_sd_s.csv");
        write_cdf_csv(&sd_s_path, campaign, |p| &p.sd_s)?;
        manifest.push(sd_s_path);

        let summary_path = out_dir.join("summary.csv");
        {
            let mut writer = csv::Writer::from_path(&summary_path)
                .map_err(|e| Error::Config(format!("{}: {e}", summary_path.display())))?;
            let map_csv =
                |e: csv::Error| Error::Config(format!("{}: {e}", summary_path.display()));
            writer
                .write_record([
                    "shared_count",
                    "mean_sd_c",
                    "std_sd_c",
                    "mean_sd_s",
                    "std_sd_s",
                ])
                .map_err(map_csv)?;
            for p in &campaign.points {
                writer
                    .write_record([
                        p.shared_count.to_string(),
                        p.mean_sd_c.to_string(),
                        p.std_sd_c.to_string(),
                        p.mean_sd_s.to_string(),
                        p.std_sd_s.to_string(),
                    ])
                    .map_err(map_csv)?;
            }
            writer.flush().map_err(|e| Error::io(&summary_path, e))?;
        }
        manifest.push(summary_path);
    }
    if format.json() {
        let path = out_dir.join("campaign.json");
        write_json(&path, campaign)?;
        manifest.push(path);
    }
    write_manifest(out_dir, &mut manifest)?;
    Ok(manifest)
}

fn write_manifest(out_dir: &Path, manifest: &mut Vec<PathBuf>) -> Result<()> {
    let names: Vec<String> = manifest
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let path = out_dir.join("manifest.json");
    write_json(&path, &names)?;
    manifest.push(path);
    Ok(())
}
