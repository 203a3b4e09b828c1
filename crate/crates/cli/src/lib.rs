//! Benchmark campaign harness: configuration, execution, persistence and
//! summaries of optimization runs.

pub mod campaign;
pub mod summary;

pub use campaign::{run_campaign, AlgorithmKind, AlgorithmSpec, CampaignConfig, CampaignError, CampaignReport};
pub use summary::{summarize, SummaryReport};
