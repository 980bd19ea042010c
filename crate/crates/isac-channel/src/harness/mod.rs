//! Monte-Carlo driver: scenario configs, per-drop orchestration, sweep
//! campaigns, and result export.

pub mod campaign;
pub mod config;
pub mod drop;
pub mod export;

pub use campaign::{run_campaign, CampaignResult, SweepPoint};
pub use config::{
    ArrayConfig, ArraysConfig, RcsConfig, ScenarioConfig, SensingMode, TargetConfig,
};
pub use drop::{baseline_comm_cir, run_drop, run_drop_with_count, DropResult};
pub use export::{export_campaign, export_drops, ExportFormat};
