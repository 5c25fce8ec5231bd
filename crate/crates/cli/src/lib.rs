//! Scenario runner for tail certificates: configuration, scenario pipelines,
//! reports and their flat-file renderings.

pub mod config;
pub mod error;
pub mod oracle;
pub mod report;
pub mod scenarios;

pub use config::{Params, ScenarioConfig, SCENARIOS};
pub use error::ScenarioError;
pub use report::{emit, ExperimentReport, Format};
pub use scenarios::{certified_threshold, run_scenario};
