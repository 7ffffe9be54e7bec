//! Experiment configuration: a single JSON document, overridden by flags.

use std::path::{Path, PathBuf};

use modegate::counts::{CountModel, DEFAULT_TRIALS};
use modegate::modes::NoiseModel;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable naming the config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "MODEGATE_CONFIG";

pub const DEFAULT_SEED: u64 = 0;
const DEFAULT_DELAY_POINTS: usize = 41;
const DEFAULT_DELAY_SPAN: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub noise: NoiseModel,
    /// Photon pairs per measurement setting. Falls back to `noise.shots`.
    pub shots: Option<u64>,
    pub seed: u64,
    /// Monte Carlo resamples for error bars.
    pub trials: usize,
    /// Use expected counts instead of sampling.
    pub exact: bool,
    /// Statistics of the simulated counts.
    pub count_model: CountModel,
    /// Statistics used when resampling counts for error bars.
    pub resample_model: CountModel,
    /// Delays for the HOM scan. Defaults to an even grid over ±4 coherence widths.
    pub delays: Option<Vec<f64>>,
    /// Directory receiving output files. Results go to stdout when unset.
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            noise: NoiseModel::default(),
            shots: None,
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            exact: false,
            count_model: CountModel::Poisson,
            resample_model: CountModel::Gaussian,
            delays: None,
            output: None,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub trials: Option<usize>,
    pub exact: bool,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }

    /// Loads `path`, else the file named by [`CONFIG_ENV`], else defaults.
    pub fn discover(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    /// Applies flags, fills defaults and validates. The result has every
    /// optional field populated.
    pub fn resolve(mut self, overrides: &Overrides) -> Result<Self, CliError> {
        if let Some(seed) = overrides.seed {
            self.seed = seed;
        }
        if let Some(trials) = overrides.trials {
            self.trials = trials;
        }
        self.exact |= overrides.exact;
        if overrides.output.is_some() {
            self.output.clone_from(&overrides.output);
        }
        let shots = overrides.shots.or(self.shots).unwrap_or(self.noise.shots);
        self.shots = Some(shots);
        self.noise.shots = shots;
        if self.delays.is_none() {
            self.delays = Some(delay_grid(
                DEFAULT_DELAY_SPAN * self.noise.coherence_width,
                DEFAULT_DELAY_POINTS,
            ));
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.noise
            .validate()
            .map_err(|e| CliError::Config(format!("noise: {e}")))?;
        if !self.exact && self.trials < 2 {
            return Err(CliError::Config(format!(
                "trials must be at least 2 in sampled mode, got {}",
                self.trials
            )));
        }
        if let Some(d) = &self.delays {
            if d.is_empty() || d.iter().any(|t| !t.is_finite()) {
                return Err(CliError::Config("delays must be a non-empty list of finite numbers".into()));
            }
        }
        Ok(())
    }

    pub fn resolved_shots(&self) -> u64 {
        self.shots.unwrap_or(self.noise.shots)
    }

    pub fn resolved_delays(&self) -> Vec<f64> {
        self.delays.clone().unwrap_or_default()
    }
}

/// `points` evenly spaced delays over [−span, span].
pub fn delay_grid(span: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n)
            .map(|k| -span + 2.0 * span * k as f64 / (n - 1) as f64)
            .collect(),
    }
}
