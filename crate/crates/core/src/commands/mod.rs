//! Implementations behind the `memgov` command-line subcommands.
//!
//! Every command returns data; printing and exit codes are the binary's job.
//! [`CommandError::exit_code`] maps failures to 1 (usage), 2 (data) and
//! 3 (infrastructure).

mod agent;
mod config;
mod govern;
mod query;
mod serve;

use thiserror::Error;

pub use agent::{demo_agent, format_trace, AgentRound, AgentTrace, DEFAULT_ROUNDS, REFINE_THRESHOLD};
pub use config::{embedder_for, DedupConfig, EmbedderConfig, PathsConfig, PipelineConfig, ProviderConfig};
pub use govern::{govern, GovernOptions, GovernSummary, AUDIT_FILE};
pub use query::{
    browse, format_card, format_search, open_store, purify_dry_run, search, select, stats, PurifySummary, Stats,
};
pub use serve::{interrupt, prepare_server, run_server};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommandError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Infra(String),
}

impl CommandError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
            Self::Infra(_) => 3,
        }
    }
}
