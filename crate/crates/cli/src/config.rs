//! Experiment configuration.
//!
//! A config is a small TOML file. Every key except `experiment` is optional
//! and falls back to the experiment's default; unknown keys are rejected.
//!
//! ```toml
//! experiment = "section5"
//! seed = 42
//! n = 10000          # particles (or samples per instance)
//! m = 200            # time steps
//! quad_n = 64        # Gauss-Hermite nodes
//! lambdas = [0.1, 0.05, 0.025]
//! delay = 0.0        # observation delay of both players
//! output_dir = "results/section5"
//!
//! [model]
//! x0 = 1.0
//! horizon = 1.0
//! sigma = 0.2
//! jump_size = 0.1
//! jump_rate = 0.5
//! theta = 1.0
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::CliError;

/// Environment variable that overrides the output directory.
pub const OUTPUT_DIR_ENV: &str = "MFGAME_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Norms,
    #[serde(rename = "lemma22")]
    LawDistance,
    LawDerivative,
    SdeMoments,
    BsdeOracles,
    Gateaux,
    NashSweep,
    #[serde(rename = "section5")]
    Consumption,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Self::Norms,
        Self::LawDistance,
        Self::LawDerivative,
        Self::SdeMoments,
        Self::BsdeOracles,
        Self::Gateaux,
        Self::NashSweep,
        Self::Consumption,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Norms => "norms",
            Self::LawDistance => "lemma22",
            Self::LawDerivative => "law-derivative",
            Self::SdeMoments => "sde-moments",
            Self::BsdeOracles => "bsde-oracles",
            Self::Gateaux => "gateaux",
            Self::NashSweep => "nash-sweep",
            Self::Consumption => "section5",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Self::Norms => "Dirac norms in M0 and M2 against sqrt(pi) and sqrt(pi)/2",
            Self::LawDistance => {
                "law distance bounded by sqrt(pi) E[(X1-X2)^2] on random paired samples"
            }
            Self::LawDerivative => {
                "Brownian and Poisson law derivatives, increment scaling of law paths"
            }
            Self::SdeMoments => "geometric and compensated-jump means against closed forms",
            Self::BsdeOracles => "closed-form and exponential linear BSDE solutions",
            Self::Gateaux => "derivative process error and finite-difference vs adjoint slopes",
            Self::NashSweep => "unilateral perturbation sweep of the consumption game",
            Self::Consumption => "optimal consumption under model uncertainty, end to end",
        }
    }

    /// Default `(n, m)`.
    pub fn default_sizes(&self) -> (usize, usize) {
        match self {
            Self::Norms => (1, 1),
            Self::LawDistance => (1000, 1),
            Self::LawDerivative => (10_000, 100),
            Self::SdeMoments => (100_000, 200),
            Self::BsdeOracles => (1, 200),
            Self::Gateaux => (10_000, 100),
            Self::NashSweep | Self::Consumption => (10_000, 200),
        }
    }

    pub fn default_lambdas(&self) -> Vec<f64> {
        match self {
            Self::NashSweep | Self::Consumption => mfgame::consumption::SADDLE_LAMBDAS.to_vec(),
            _ => vec![0.1, 0.05, 0.025],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "one")]
    pub x0: f64,
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default = "sigma")]
    pub sigma: f64,
    #[serde(default = "jump_size")]
    pub jump_size: f64,
    #[serde(default = "jump_rate")]
    pub jump_rate: f64,
    #[serde(default = "one")]
    pub theta: f64,
}

fn one() -> f64 {
    1.0
}
fn sigma() -> f64 {
    0.2
}
fn jump_size() -> f64 {
    0.1
}
fn jump_rate() -> f64 {
    0.5
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            x0: 1.0,
            horizon: 1.0,
            sigma: 0.2,
            jump_size: 0.1,
            jump_rate: 0.5,
            theta: 1.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Experiment,
    seed: Option<u64>,
    n: Option<usize>,
    m: Option<usize>,
    quad_n: Option<usize>,
    lambdas: Option<Vec<f64>>,
    delay: Option<f64>,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    model: ModelConfig,
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub experiment: Experiment,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub quad_n: usize,
    pub lambdas: Vec<f64>,
    pub delay: f64,
    pub output_dir: PathBuf,
    pub model: ModelConfig,
}

pub const MAX_PARTICLES: usize = 1_000_000;
pub const MAX_STEPS: usize = 10_000;

impl Settings {
    pub fn defaults(experiment: Experiment) -> Self {
        let (n, m) = experiment.default_sizes();
        Self {
            experiment,
            seed: 42,
            n,
            m,
            quad_n: mfgame::measures::DEFAULT_GH_ORDER,
            lambdas: experiment.default_lambdas(),
            delay: 0.0,
            output_dir: PathBuf::from("results").join(experiment.name()),
            model: ModelConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(1..=MAX_PARTICLES).contains(&self.n) {
            return bad(format!(
                "n must lie in [1, {MAX_PARTICLES}], got {}",
                self.n
            ));
        }
        if !(1..=MAX_STEPS).contains(&self.m) {
            return bad(format!("m must lie in [1, {MAX_STEPS}], got {}", self.m));
        }
        if !(2..=200).contains(&self.quad_n) {
            return bad(format!("quad_n must lie in [2, 200], got {}", self.quad_n));
        }
        if self.lambdas.is_empty()
            || self
                .lambdas
                .iter()
                .any(|l| !l.is_finite() || *l == 0.0 || l.abs() > 1.0)
        {
            return bad("lambdas must be non-empty, nonzero and within [-1, 1]".into());
        }
        let md = &self.model;
        if !(md.horizon > 0.0 && md.horizon.is_finite()) {
            return bad(format!(
                "model.horizon must be positive, got {}",
                md.horizon
            ));
        }
        if !(self.delay >= 0.0 && self.delay < md.horizon) {
            return bad(format!(
                "delay must lie in [0, horizon), got {}",
                self.delay
            ));
        }
        let valid = md.x0 > 0.0 && md.theta > 0.0 && md.jump_rate >= 0.0 && md.jump_size > -1.0;
        if !valid {
            return bad("model needs x0 > 0, theta > 0, jump_rate >= 0 and jump_size > -1".into());
        }
        Ok(())
    }
}

impl FromStr for Settings {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let d = Settings::defaults(raw.experiment);
        let s = Settings {
            experiment: raw.experiment,
            seed: raw.seed.unwrap_or(d.seed),
            n: raw.n.unwrap_or(d.n),
            m: raw.m.unwrap_or(d.m),
            quad_n: raw.quad_n.unwrap_or(d.quad_n),
            lambdas: raw.lambdas.unwrap_or(d.lambdas),
            delay: raw.delay.unwrap_or(d.delay),
            output_dir: raw.output_dir.unwrap_or(d.output_dir),
            model: raw.model,
        };
        s.validate()?;
        Ok(s)
    }
}

/// Reads and validates a config; `MFGAME_OUTPUT_DIR` wins over the file.
pub fn load(path: &Path) -> Result<Settings, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut settings: Settings = text.parse()?;
    if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
        settings.output_dir = PathBuf::from(dir);
    }
    Ok(settings)
}
