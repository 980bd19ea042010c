//! Scenario parameter tables for stochastic generation.
//!
//! A bundled indoor-office table ships inside the binary; an edited copy can
//! be loaded from disk at run time so rows are tunable without recompiling.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Frequency-dependent log-domain parameter: value = slope * log10(1 + f_GHz) + offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreqLogLinear {
    pub freq_slope: f64,
    pub offset: f64,
}

impl FreqLogLinear {
    pub fn at(&self, carrier_ghz: f64) -> f64 {
        self.freq_slope * (1.0 + carrier_ghz).log10() + self.offset
    }
}

/// Cross-correlation coefficients between large-scale parameters.
/// Missing keys (for example K rows in NLOS) default to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrossCorrelations {
    pub asd_ds: f64,
    pub asa_ds: f64,
    pub asa_sf: f64,
    pub asd_sf: f64,
    pub ds_sf: f64,
    pub asd_asa: f64,
    pub asd_k: f64,
    pub asa_k: f64,
    pub ds_k: f64,
    pub sf_k: f64,
    pub zsd_sf: f64,
    pub zsa_sf: f64,
    pub zsd_k: f64,
    pub zsa_k: f64,
    pub zsd_ds: f64,
    pub zsa_ds: f64,
    pub zsd_asd: f64,
    pub zsa_asd: f64,
    pub zsd_asa: f64,
    pub zsa_asa: f64,
    pub zsd_zsa: f64,
}

impl Default for CrossCorrelations {
    fn default() -> Self {
        Self {
            asd_ds: 0.0,
            asa_ds: 0.0,
            asa_sf: 0.0,
            asd_sf: 0.0,
            ds_sf: 0.0,
            asd_asa: 0.0,
            asd_k: 0.0,
            asa_k: 0.0,
            ds_k: 0.0,
            sf_k: 0.0,
            zsd_sf: 0.0,
            zsa_sf: 0.0,
            zsd_k: 0.0,
            zsa_k: 0.0,
            zsd_ds: 0.0,
            zsa_ds: 0.0,
            zsd_asd: 0.0,
            zsa_asd: 0.0,
            zsd_asa: 0.0,
            zsa_asa: 0.0,
            zsd_zsa: 0.0,
        }
    }
}

/// Parameter row for one propagation condition (LOS or NLOS).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionParams {
    pub num_clusters: usize,
    pub rays_per_cluster: usize,
    /// Delay distribution proportionality factor r_tau.
    pub delay_scaling: f64,
    /// Per-cluster shadowing std, dB.
    pub per_cluster_shadowing_db: f64,
    pub xpr_mean_db: f64,
    pub xpr_std_db: f64,
    /// Per-cluster angle spreads, degrees.
    pub cluster_asd_deg: f64,
    pub cluster_asa_deg: f64,
    pub cluster_zsa_deg: f64,
    pub sf_std_db: f64,
    /// Ricean K-factor moments; absent for NLOS rows.
    #[serde(default)]
    pub k_mean_db: Option<f64>,
    #[serde(default)]
    pub k_std_db: Option<f64>,
    pub zod_offset_deg: f64,
    pub ds_log_mean: FreqLogLinear,
    pub ds_log_std: FreqLogLinear,
    pub asd_log_mean: FreqLogLinear,
    pub asd_log_std: FreqLogLinear,
    pub asa_log_mean: FreqLogLinear,
    pub asa_log_std: FreqLogLinear,
    pub zsa_log_mean: FreqLogLinear,
    pub zsa_log_std: FreqLogLinear,
    pub zsd_log_mean: FreqLogLinear,
    pub zsd_log_std: FreqLogLinear,
    pub cross_correlations: CrossCorrelations,
}

/// Full scenario table: one row per propagation condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioTables {
    pub schema_version: u32,
    pub scenario: String,
    pub los: ConditionParams,
    pub nlos: ConditionParams,
}

const BUNDLED_INH_OFFICE: &str = include_str!("../../data/inh_office.toml");

impl ScenarioTables {
    /// The bundled indoor-office table.
    pub fn bundled_inh_office() -> Self {
        toml::from_str(BUNDLED_INH_OFFICE).expect("bundled table parses")
    }

    /// Loads a table from an external file (same schema as the bundled one).
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let tables: ScenarioTables = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        tables.validate()?;
        Ok(tables)
    }

    pub fn condition(&self, los: bool) -> &ConditionParams {
        if los {
            &self.los
        } else {
            &self.nlos
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, row) in [("los", &self.los), ("nlos", &self.nlos)] {
            if row.num_clusters == 0 {
                return Err(Error::Config(format!(
                    "{name}: cluster count must be positive"
                )));
            }
            // The ray offset basis is defined for exactly 20 rays.
            if row.rays_per_cluster != 20 {
                return Err(Error::Config(format!(
                    "{name}: rays_per_cluster must be 20, got {}",
                    row.rays_per_cluster
                )));
            }
            if row.delay_scaling <= 1.0 {
                return Err(Error::Config(format!(
                    "{name}: delay_scaling must exceed 1"
                )));
            }
        }
        if self.los.k_mean_db.is_none() || self.los.k_std_db.is_none() {
            return Err(Error::Config(
                "los row must define k_mean_db and k_std_db".into(),
            ));
        }
        Ok(())
    }
}
