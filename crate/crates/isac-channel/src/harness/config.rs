//! Declarative scenario configuration: a strict-schema TOML file describing
//! layout, carrier, antennas, targets, sharing, and campaign settings.
//! Unknown keys are rejected so experiment files stay honest.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::antenna::{ArrayGeometry, ElementPattern, PatternKind};
use crate::error::{Error, Result};
use crate::geometry::{NodeDescriptor, Point3, Velocity3};
use crate::polar::PolarMatrix;
use crate::sensing::{PathlossMode, RcsSpec, SensingClusterMode, Target};
use crate::sharing::IntegrationCase;
use crate::stochastic::ScenarioTables;

/// Sensing receiver topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensingMode {
    /// Sensing TX and RX co-located at the BS (echo reception).
    MonoStatic,
    /// Sensing RX at a separate position (`sensing_rx_position`).
    BiStatic,
}

/// Supported propagation scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    InhOffice,
}

/// A complex value in config files: either a plain real number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexEntry {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexEntry {
    pub fn to_complex(self) -> Complex64 {
        match self {
            ComplexEntry::Real(re) => Complex64::new(re, 0.0),
            ComplexEntry::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

fn default_identity_entry() -> ComplexEntry {
    ComplexEntry::Real(1.0)
}

fn default_zero_entry() -> ComplexEntry {
    ComplexEntry::Real(0.0)
}

/// Polarimetric matrix in config form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixConfig {
    #[serde(default = "default_identity_entry")]
    pub theta_theta: ComplexEntry,
    #[serde(default = "default_zero_entry")]
    pub theta_phi: ComplexEntry,
    #[serde(default = "default_zero_entry")]
    pub phi_theta: ComplexEntry,
    #[serde(default = "default_identity_entry")]
    pub phi_phi: ComplexEntry,
}

impl Default for MatrixConfig {
    fn default() -> Self {
        Self {
            theta_theta: default_identity_entry(),
            theta_phi: default_zero_entry(),
            phi_theta: default_zero_entry(),
            phi_phi: default_identity_entry(),
        }
    }
}

impl MatrixConfig {
    pub fn to_matrix(&self) -> PolarMatrix {
        PolarMatrix::new(
            self.theta_theta.to_complex(),
            self.theta_phi.to_complex(),
            self.phi_theta.to_complex(),
            self.phi_phi.to_complex(),
        )
    }
}

/// Target radar cross section in config form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "mode", rename_all = "snake_case")]
pub enum RcsConfig {
    /// Fixed polarimetric matrix; entries are field coefficients whose
    /// squared magnitudes are RCS contributions in m^2.
    Fixed {
        #[serde(flatten)]
        matrix: MatrixConfig,
    },
    /// Magnitude drawn uniformly in [min_m2, max_m2] per drop, applied to a
    /// polarization template (identity by default).
    StochasticUniform {
        min_m2: f64,
        max_m2: f64,
        #[serde(default)]
        template: MatrixConfig,
    },
}

impl RcsConfig {
    fn to_spec(&self) -> RcsSpec {
        match self {
            RcsConfig::Fixed { matrix } => RcsSpec::Fixed {
                matrix: matrix.to_matrix(),
            },
            RcsConfig::StochasticUniform {
                min_m2,
                max_m2,
                template,
            } => RcsSpec::StochasticUniform {
                min_m2: *min_m2,
                max_m2: *max_m2,
                template: template.to_matrix(),
            },
        }
    }

    fn validate(&self) -> Result<()> {
        if let RcsConfig::StochasticUniform { min_m2, max_m2, .. } = self {
            if !(*min_m2 >= 0.0 && max_m2 >= min_m2) {
                return Err(Error::Config(format!(
                    "stochastic RCS range must satisfy 0 <= min <= max, got [{min_m2}, {max_m2}]"
                )));
            }
        }
        Ok(())
    }
}

/// One sensing target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub position: [f64; 3],
    #[serde(default)]
    pub velocity: [f64; 3],
    pub rcs: RcsConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrayLayout {
    Single,
    UniformLinear,
    UniformPlanar,
    Explicit,
}

/// Antenna array description for one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    #[serde(default = "default_layout")]
    pub layout: ArrayLayout,
    /// Element count for `uniform_linear`.
    #[serde(default)]
    pub count: Option<usize>,
    /// Element spacing in carrier wavelengths (default 0.5).
    #[serde(default)]
    pub spacing_wavelengths: Option<f64>,
    /// Grid size for `uniform_planar`.
    #[serde(default)]
    pub rows: Option<usize>,
    #[serde(default)]
    pub cols: Option<usize>,
    /// Explicit element offsets in meters for `explicit`.
    #[serde(default)]
    pub positions_m: Option<Vec<[f64; 3]>>,
    #[serde(default = "default_pattern")]
    pub pattern: PatternKind,
    #[serde(default)]
    pub slant_deg: f64,
}

fn default_layout() -> ArrayLayout {
    ArrayLayout::Single
}

fn default_pattern() -> PatternKind {
    PatternKind::Isotropic
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            layout: default_layout(),
            count: None,
            spacing_wavelengths: None,
            rows: None,
            cols: None,
            positions_m: None,
            pattern: default_pattern(),
            slant_deg: 0.0,
        }
    }
}

impl ArrayConfig {
    /// Builds the array geometry anchored at `reference` plus the element
    /// pattern.
    pub fn build(
        &self,
        reference: Point3,
        wavelength: f64,
    ) -> Result<(ArrayGeometry, ElementPattern)> {
        let spacing = self.spacing_wavelengths.unwrap_or(0.5) * wavelength;
        let geometry = match self.layout {
            ArrayLayout::Single => ArrayGeometry::single(reference),
            ArrayLayout::UniformLinear => {
                let count = self.count.ok_or_else(|| {
                    Error::Config("uniform_linear arrays require `count`".into())
                })?;
                ArrayGeometry::uniform_linear(reference, count, spacing)?
            }
            ArrayLayout::UniformPlanar => {
                let rows = self
                    .rows
                    .ok_or_else(|| Error::Config("uniform_planar arrays require `rows`".into()))?;
                let cols = self
                    .cols
                    .ok_or_else(|| Error::Config("uniform_planar arrays require `cols`".into()))?;
                ArrayGeometry::uniform_planar(reference, rows, cols, spacing)?
            }
            ArrayLayout::Explicit => {
                let positions = self.positions_m.as_ref().ok_or_else(|| {
                    Error::Config("explicit arrays require `positions_m`".into())
                })?;
                ArrayGeometry::explicit(
                    reference,
                    positions.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect(),
                )?
            }
        };
        let pattern = ElementPattern {
            kind: self.pattern,
            polarization_slant: self.slant_deg.to_radians(),
        };
        Ok((geometry, pattern))
    }
}

/// Arrays per node; all optional with single-isotropic defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArraysConfig {
    pub bs: ArrayConfig,
    pub ut: ArrayConfig,
    pub sensing_rx: Option<ArrayConfig>,
}

fn default_time_samples() -> Vec<f64> {
    vec![0.0]
}

fn default_prune_threshold() -> f64 {
    25.0
}

fn default_comm_los() -> bool {
    true
}

fn default_n_drops() -> u64 {
    1
}

fn default_sensing_clusters() -> SensingClusterMode {
    SensingClusterMode::LosOnly
}

/// Full declarative scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub carrier_hz: f64,
    pub scenario: Scenario,
    pub root_seed: u64,
    #[serde(default = "default_n_drops")]
    pub n_drops: u64,
    /// Time samples at which the CIR is evaluated, seconds.
    #[serde(default = "default_time_samples")]
    pub time_samples_s: Vec<f64>,
    pub bs_position: [f64; 3],
    pub ut_position: [f64; 3],
    #[serde(default)]
    pub ut_velocity: [f64; 3],
    /// Communication link propagation condition.
    #[serde(default = "default_comm_los")]
    pub comm_los: bool,
    pub sensing_mode: SensingMode,
    #[serde(default)]
    pub sensing_rx_position: Option<[f64; 3]>,
    pub integration_case: IntegrationCase,
    pub shared_ratio: f64,
    pub pathloss_mode: PathlossMode,
    #[serde(default = "default_prune_threshold")]
    pub prune_threshold_db: f64,
    #[serde(default)]
    pub circular_azimuth_pairing: bool,
    #[serde(default = "default_sensing_clusters")]
    pub sensing_clusters: SensingClusterMode,
    /// Optional external large-scale parameter table; the bundled
    /// indoor-office table is used when absent.
    #[serde(default)]
    pub lsp_table: Option<PathBuf>,
    #[serde(default)]
    pub arrays: ArraysConfig,
    pub targets: Vec<TargetConfig>,
}

impl ScenarioConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("config serialize: {e}")))
    }

    /// SHA-256 over the canonical JSON encoding of the config.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        hex::encode(hasher.finalize())
    }

    pub fn wavelength(&self) -> f64 {
        crate::geometry::SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn carrier_ghz(&self) -> f64 {
        self.carrier_hz / 1e9
    }

    pub fn bs_node(&self) -> NodeDescriptor {
        NodeDescriptor::fixed(point(self.bs_position))
    }

    pub fn ut_node(&self) -> NodeDescriptor {
        NodeDescriptor {
            position: point(self.ut_position),
            velocity: Velocity3::new(
                self.ut_velocity[0],
                self.ut_velocity[1],
                self.ut_velocity[2],
            ),
        }
    }

    /// The sensing receiver node. Mono-static sensing receives at the BS; a
    /// bi-static receiver co-located with the UT inherits the UT velocity.
    pub fn sensing_rx_node(&self) -> NodeDescriptor {
        match self.sensing_mode {
            SensingMode::MonoStatic => self.bs_node(),
            SensingMode::BiStatic => {
                let pos = point(self.sensing_rx_position.expect("validated"));
                if pos == point(self.ut_position) {
                    self.ut_node()
                } else {
                    NodeDescriptor::fixed(pos)
                }
            }
        }
    }

    /// Domain targets with 0-based ids in list order.
    pub fn domain_targets(&self) -> Vec<Target> {
        self.targets
            .iter()
            .enumerate()
            .map(|(id, t)| Target {
                id,
                position: point(t.position),
                velocity: Velocity3::new(t.velocity[0], t.velocity[1], t.velocity[2]),
                rcs: t.rcs.to_spec(),
            })
            .collect()
    }

    /// Loads the LSP table: the external override when configured, otherwise
    /// the bundled one.
    pub fn tables(&self) -> Result<ScenarioTables> {
        match &self.lsp_table {
            Some(path) => ScenarioTables::from_file(path),
            None => Ok(ScenarioTables::bundled_inh_office()),
        }
    }

    /// Requested shared-pair count from the ratio: round-half-up of
    /// ratio * L.
    pub fn requested_shared_count(&self) -> usize {
        (self.shared_ratio * self.targets.len() as f64 + 0.5).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz > 0.0) || !self.carrier_hz.is_finite() {
            return Err(Error::Config(format!(
                "carrier_hz must be positive, got {}",
                self.carrier_hz
            )));
        }
        if !(0.0..=1.0).contains(&self.shared_ratio) {
            return Err(Error::Config(format!(
                "shared_ratio must lie in [0, 1], got {}",
                self.shared_ratio
            )));
        }
        if self.n_drops == 0 {
            return Err(Error::Config("n_drops must be at least 1".into()));
        }
        if self.time_samples_s.is_empty() {
            return Err(Error::Config("time_samples_s must not be empty".into()));
        }
        if self.targets.is_empty() {
            return Err(Error::Config("at least one target is required".into()));
        }
        let bs = point(self.bs_position);
        let ut = point(self.ut_position);
        if bs == ut {
            return Err(Error::Config(
                "bs_position and ut_position must be distinct".into(),
            ));
        }
        match self.sensing_mode {
            SensingMode::MonoStatic => {
                if self.sensing_rx_position.is_some() {
                    return Err(Error::Config(
                        "sensing_rx_position is only valid for bi_static sensing".into(),
                    ));
                }
                if self.integration_case != IntegrationCase::TxIntegratedMonostatic {
                    return Err(Error::Config(
                        "mono_static sensing pairs with integration_case = tx_integrated_monostatic"
                            .into(),
                    ));
                }
            }
            SensingMode::BiStatic => {
                if self.sensing_rx_position.is_none() {
                    return Err(Error::Config(
                        "bi_static sensing requires sensing_rx_position".into(),
                    ));
                }
                if self.integration_case == IntegrationCase::TxIntegratedMonostatic {
                    return Err(Error::Config(
                        "integration_case = tx_integrated_monostatic requires mono_static sensing"
                            .into(),
                    ));
                }
            }
        }
        let sensing_rx = self
            .sensing_rx_position
            .map(point)
            .unwrap_or(bs);
        for (i, t) in self.targets.iter().enumerate() {
            let p = point(t.position);
            if !p.is_finite() {
                return Err(Error::Config(format!("target {i} position is not finite")));
            }
            if p == bs || p == ut || p == sensing_rx {
                return Err(Error::Config(format!(
                    "target {i} coincides with a radio node position"
                )));
            }
            t.rcs.validate()?;
        }
        if let SensingClusterMode::Full {
            prune_threshold_db, ..
        } = self.sensing_clusters
        {
            if !prune_threshold_db.is_finite() || prune_threshold_db <= 0.0 {
                return Err(Error::Config(
                    "sensing_clusters.prune_threshold_db must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

fn point(p: [f64; 3]) -> Point3 {
    Point3::new(p[0], p[1], p[2])
}

/// The 12-target ring layout used by the bundled example scenario: targets
/// 5 m from the origin at 30-degree spacing, 1.5 m high, BS at the origin
/// and UT 10 m away on the x-axis.
pub fn ring_layout_config() -> ScenarioConfig {
    let targets = (0..12)
        .map(|k| {
            let az = (30.0 * k as f64).to_radians();
            TargetConfig {
                position: [5.0 * az.cos(), 5.0 * az.sin(), 1.5],
                velocity: [0.0; 3],
                rcs: RcsConfig::Fixed {
                    matrix: MatrixConfig::default(),
                },
            }
        })
        .collect();
    ScenarioConfig {
        carrier_hz: 28e9,
        scenario: Scenario::InhOffice,
        root_seed: 1,
        n_drops: 1,
        time_samples_s: vec![0.0],
        bs_position: [0.0, 0.0, 1.5],
        ut_position: [10.0, 0.0, 1.5],
        ut_velocity: [0.0; 3],
        comm_los: true,
        sensing_mode: SensingMode::MonoStatic,
        sensing_rx_position: None,
        integration_case: IntegrationCase::TxIntegratedMonostatic,
        shared_ratio: 1.0 / 6.0,
        pathloss_mode: PathlossMode::TwoStage38901,
        prune_threshold_db: 25.0,
        circular_azimuth_pairing: false,
        sensing_clusters: SensingClusterMode::LosOnly,
        lsp_table: None,
        arrays: ArraysConfig::default(),
        targets,
    }
}
