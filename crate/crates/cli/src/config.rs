//! Run configuration documents (JSON).

use serde::{Deserialize, Serialize};

use sben_core::sben::GlobalOptions;
use sben_core::scenarios::{
    build_coulomb_slider, build_crack_toy, build_elastoplastic_oscillator, CrackToyParams, OscillatorParams, Scenario, SliderParams, Solver,
};
use sben_core::Error as CoreError;

use crate::error::{CliError, ConfigError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Seed for audit samplers.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ScenarioConfig {
    Oscillator(OscillatorParams),
    Slider(SliderParams),
    Crack(CrackToyParams),
}

impl ScenarioConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Oscillator(_) => "oscillator",
            Self::Slider(_) => "slider",
            Self::Crack(_) => "crack",
        }
    }

    pub fn build(&self) -> sben_core::Result<Scenario> {
        match self {
            Self::Oscillator(p) => build_elastoplastic_oscillator(p),
            Self::Slider(p) => build_coulomb_slider(p),
            Self::Crack(p) => build_crack_toy(p),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub name: Solver,
    /// Whole-path descent settings; only read by `sben-global`.
    #[serde(default)]
    pub global: GlobalOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { name: Solver::SbenIncremental, global: GlobalOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory under the output root; defaults to the scenario type.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    /// Also write the per-step residual profile.
    #[serde(default = "yes")]
    pub profile: bool,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv]
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, formats: default_formats(), profile: true }
    }
}

impl RunConfig {
    pub fn out_dir_name(&self) -> String {
        self.output.dir.clone().unwrap_or_else(|| self.scenario.kind().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn oracle_config(&self) -> sben_core::dynamics::OracleConfig {
        sben_core::dynamics::OracleConfig::new(self.time.dt, self.time.t_end).expect("validated on parse")
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig =
        serde_json::from_str(text).map_err(|e| ConfigError { message: e.to_string(), line: (e.line() > 0).then_some(e.line()) })?;
    let located = |field: &str, message: String| ConfigError { line: locate(text, field), message };
    for (name, v) in [("dt", cfg.time.dt), ("t_end", cfg.time.t_end)] {
        if v <= 0.0 || !v.is_finite() {
            return Err(located(name, format!("time.{name} must be positive and finite, got {v}")));
        }
    }
    if cfg.solver.global.sweeps == 0 {
        return Err(located("sweeps", "solver.global.sweeps must be at least 1".into()));
    }
    match cfg.scenario.build() {
        Ok(_) => Ok(cfg),
        Err(CoreError::InvalidParameter { name, reason }) => Err(located(name, format!("scenario.{name}: {reason}"))),
        Err(e) => Err(ConfigError { message: format!("scenario: {e}"), line: None }),
    }
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| CliError::Config(e.in_file(path)))
}

/// First line (1-based) mentioning `"key"`.
fn locate(text: &str, key: &str) -> Option<usize> {
    let quoted = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&quoted)).map(|i| i + 1)
}
