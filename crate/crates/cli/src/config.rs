//! Flat `key = value` run configuration.
//!
//! ```text
//! # canonical parameters
//! experiment = control
//! gamma = 1
//! b1 = 0.05
//! b2 = 0.15
//! r1 = 0.1
//! r2 = 0.3
//! modes = 20
//! horizon = auto
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use memwave_core::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Spectrum,
    Modal,
    Simulate,
    InghamInverse,
    InghamDirect,
    Control,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Spectrum,
        Experiment::Modal,
        Experiment::Simulate,
        Experiment::InghamInverse,
        Experiment::InghamDirect,
        Experiment::Control,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Modal => "modal",
            Experiment::Simulate => "simulate",
            Experiment::InghamInverse => "ingham-inverse",
            Experiment::InghamDirect => "ingham-direct",
            Experiment::Control => "control",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!(
                    "unknown experiment `{s}`, expected one of {}",
                    names.join(", ")
                )
            })
    }
}

/// Final time of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    /// `1.5 T0` with `T0` the control-time threshold.
    Auto,
    Fixed(f64),
}

/// Final state requested from the control experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    /// `(e_m, 0)`
    Value,
    /// `(0, e_m)`
    Velocity,
    /// Random `L^2 x H^{-1}` pair drawn from the seed.
    Random,
}

impl FromStr for TargetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "value" => Ok(TargetKind::Value),
            "velocity" => Ok(TargetKind::Velocity),
            "random" => Ok(TargetKind::Random),
            _ => Err(format!(
                "unknown target `{s}`, expected value, velocity or random"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `(gamma, b1, b2, r1, r2)`, validated when the run starts.
    pub params: [f64; 5],
    pub experiment: Experiment,
    pub modes: usize,
    pub horizon: Horizon,
    pub trials: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub output: PathBuf,
    /// Coefficients of random data decay like `n^{-decay}`.
    pub decay: Option<f64>,
    pub target: TargetKind,
    pub target_mode: usize,
    /// Diagonal shift of the Gram system. Not part of plain HUM.
    pub tikhonov: f64,
    /// Number of time snapshots written by `simulate`.
    pub snapshots: usize,
    /// Number of spatial points per snapshot.
    pub points: usize,
    /// The `key = value` lines that were read, in order.
    pub echo: Vec<(String, String)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: [1.0, 0.05, 0.15, 0.1, 0.3],
            experiment: Experiment::Spectrum,
            modes: 20,
            horizon: Horizon::Auto,
            trials: 20,
            seed: 0,
            epsilon: memwave_core::ingham::DEFAULT_EPSILON,
            output: PathBuf::from("out"),
            decay: None,
            target: TargetKind::Value,
            target_mode: 1,
            tikhonov: 0.0,
            snapshots: 11,
            points: 65,
            echo: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn model_params(&self) -> memwave_core::Result<ModelParams> {
        let [gamma, b1, b2, r1, r2] = self.params;
        ModelParams::new(gamma, b1, b2, r1, r2)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: 0,
            field: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        text.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line number, 0 when the error is not tied to a line.
    pub line: usize,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, &self.field) {
            (0, None) => write!(f, "{}", self.message),
            (0, Some(k)) => write!(f, "field `{k}`: {}", self.message),
            (l, None) => write!(f, "line {l}: {}", self.message),
            (l, Some(k)) => write!(f, "line {l}, field `{k}`: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn positive_f64(value: &str) -> Result<f64, String> {
    let v: f64 = value
        .parse()
        .map_err(|_| format!("`{value}` is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive and finite, got {value}"))
    }
}

fn positive_usize(value: &str) -> Result<usize, String> {
    match value.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("`{value}` is not a positive integer")),
    }
}

impl FromStr for RunConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut config = RunConfig::default();
        let mut seen_experiment = false;
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError {
                line,
                field: None,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let fail = |message: String| ConfigError {
                line,
                field: Some(key.to_string()),
                message,
            };
            if config.echo.iter().any(|(k, _)| k == key) {
                return Err(fail("appears more than once".into()));
            }
            match key {
                "gamma" => config.params[0] = positive_f64(value).map_err(fail)?,
                "b1" => config.params[1] = positive_f64(value).map_err(fail)?,
                "b2" => config.params[2] = positive_f64(value).map_err(fail)?,
                "r1" => config.params[3] = positive_f64(value).map_err(fail)?,
                "r2" => config.params[4] = positive_f64(value).map_err(fail)?,
                "experiment" => {
                    config.experiment = value.parse().map_err(fail)?;
                    seen_experiment = true;
                }
                "modes" => config.modes = positive_usize(value).map_err(fail)?,
                "horizon" => {
                    config.horizon = if value == "auto" {
                        Horizon::Auto
                    } else {
                        Horizon::Fixed(positive_f64(value).map_err(fail)?)
                    }
                }
                "trials" => config.trials = positive_usize(value).map_err(fail)?,
                "seed" => {
                    config.seed = value
                        .parse()
                        .map_err(|_| fail(format!("`{value}` is not an unsigned 64-bit integer")))?
                }
                "epsilon" => {
                    let eps = positive_f64(value).map_err(fail)?;
                    if eps >= 1.0 {
                        return Err(fail(format!("must lie in (0, 1), got {value}")));
                    }
                    config.epsilon = eps;
                }
                "output" => {
                    if value.is_empty() {
                        return Err(fail("must not be empty".into()));
                    }
                    config.output = PathBuf::from(value);
                }
                "decay" => config.decay = Some(positive_f64(value).map_err(fail)?),
                "target" => config.target = value.parse().map_err(fail)?,
                "target_mode" => config.target_mode = positive_usize(value).map_err(fail)?,
                "tikhonov" => {
                    let v: f64 = value
                        .parse()
                        .map_err(|_| fail(format!("`{value}` is not a number")))?;
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(fail(format!("must be nonnegative, got {value}")));
                    }
                    config.tikhonov = v;
                }
                "snapshots" => config.snapshots = positive_usize(value).map_err(fail)?,
                "points" => config.points = positive_usize(value).map_err(fail)?,
                _ => return Err(fail("unknown key".into())),
            }
            config.echo.push((key.to_string(), value.to_string()));
        }
        if !seen_experiment {
            return Err(ConfigError {
                line: 0,
                field: Some("experiment".into()),
                message: "missing".into(),
            });
        }
        if config.target_mode > config.modes {
            return Err(ConfigError {
                line: 0,
                field: Some("target_mode".into()),
                message: format!("exceeds modes = {}", config.modes),
            });
        }
        Ok(config)
    }
}
