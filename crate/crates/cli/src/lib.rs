//! Experiment runner for the `mfgame` crate: TOML configs in, CSV tables and
//! a pass/fail summary out.

pub mod config;
pub mod experiments;

pub use config::{load, Experiment, ModelConfig, Settings, OUTPUT_DIR_ENV};
pub use experiments::{catalogue, run, Check, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] mfgame::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for configuration problems, 1 for everything that failed at run time.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            _ => 1,
        }
    }
}
