//! Run configuration: a TOML file with global keys and one table per command.
//!
//! ```toml
//! seed = 7
//! jobs = 4
//!
//! [sample]
//! model = "discrete"
//! n = 16
//! beta = 1.0
//! ```
//!
//! Flags override the file: `--seed`, `--jobs`, `--out`, and `--set key=value`
//! for keys of the command table.

use std::path::{Path, PathBuf};

use lrp_core::census::{MicroDomain, STATE_BUDGET};
use lrp_core::coupling::CellPlacement;
use lrp_core::scaling::ModelKind;
use lrp_core::MetricMode;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub command: CommandConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandConfig {
    Sample(SampleConfig),
    Distance(DistanceConfig),
    Scaling(ScalingCliConfig),
    Couple(CoupleConfig),
    Explore(ExploreConfig),
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::Sample(_) => "sample",
            CommandConfig::Distance(_) => "distance",
            CommandConfig::Scaling(_) => "scaling",
            CommandConfig::Couple(_) => "couple",
            CommandConfig::Explore(_) => "explore",
        }
    }
}

/// Model parameters shared by `sample` and `distance`. Discrete runs use
/// `n`, `beta`, `s`; continuous runs use `length`, `delta`, `delta_prime`, `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model: ModelKind,
    pub n: usize,
    pub beta: f64,
    pub s: f64,
    pub length: f64,
    pub delta: f64,
    pub delta_prime: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Discrete,
            n: 16,
            beta: 1.0,
            s: 2.0,
            length: 10.0,
            delta: 1.0,
            delta_prime: 10.0,
        }
    }
}

macro_rules! model_block {
    ($(#[$meta:meta])* $name:ident { $($(#[$fm:meta])* $field:ident: $ty:ty = $default:expr),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct $name {
            pub model: ModelKind,
            pub n: usize,
            pub beta: f64,
            pub s: f64,
            pub length: f64,
            pub delta: f64,
            pub delta_prime: f64,
            $($(#[$fm])* pub $field: $ty,)*
        }

        impl Default for $name {
            fn default() -> Self {
                let m = ModelConfig::default();
                Self {
                    model: m.model,
                    n: m.n,
                    beta: m.beta,
                    s: m.s,
                    length: m.length,
                    delta: m.delta,
                    delta_prime: m.delta_prime,
                    $($field: $default,)*
                }
            }
        }

        impl $name {
            pub fn model_config(&self) -> ModelConfig {
                ModelConfig {
                    model: self.model,
                    n: self.n,
                    beta: self.beta,
                    s: self.s,
                    length: self.length,
                    delta: self.delta,
                    delta_prime: self.delta_prime,
                }
            }
        }
    };
}

model_block!(SampleConfig {
    replicas: usize = 1,
    /// Write every sampled instance, not only the count statistics.
    write_instances: bool = true,
});

model_block!(DistanceConfig {
    /// Query pairs; empty means the two ends of the domain.
    queries: Vec<(f64, f64)> = Vec::new(),
    modes: Vec<MetricMode> = vec![MetricMode::ConstrainedInterval, MetricMode::Unconstrained],
    diameter: bool = true,
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingCliConfig {
    pub beta: f64,
    pub model: ModelKind,
    pub grid: Vec<u64>,
    pub replicas: usize,
    pub exponent: f64,
    pub max_work: Option<u64>,
    pub gamma: f64,
    pub theta_prime: f64,
    pub r: f64,
    pub band_limit: f64,
    /// Fit a stored series CSV instead of simulating.
    pub replay: Option<PathBuf>,
}

impl Default for ScalingCliConfig {
    fn default() -> Self {
        Self {
            beta: 1.0,
            model: ModelKind::Discrete,
            grid: (6..=10).map(|k| 1u64 << k).collect(),
            replicas: 100,
            exponent: 2.0,
            max_work: None,
            gamma: 2.0,
            theta_prime: 0.5,
            r: 2.0,
            band_limit: 10.0,
            replay: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoupleConfig {
    pub n: usize,
    pub beta: f64,
    /// Number of independent coupled samples.
    pub samples: u64,
    pub placement: CellPlacement,
}

impl Default for CoupleConfig {
    fn default() -> Self {
        Self {
            n: 64,
            beta: 1.0,
            samples: 1,
            placement: CellPlacement::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploreConfig {
    pub n: u32,
    pub radius: u32,
    pub beta: f64,
    pub t: f64,
    pub epsilon: f64,
    pub t_grid: Vec<f64>,
    pub replicas: u32,
    pub state_budget: usize,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        Self {
            n: 8,
            radius: 1,
            beta: 1.0,
            t: 2.0,
            epsilon: 0.5,
            t_grid: vec![0.5, 1.0, 1.5, 2.0],
            replicas: 1000,
            state_budget: STATE_BUDGET,
        }
    }
}

impl ExploreConfig {
    pub fn domain(&self) -> MicroDomain {
        MicroDomain::with_radius(self.n, self.radius)
    }
}

/// Flag-level inputs layered over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub set: Vec<String>,
}

fn validation(msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(msg.to_string())
}

fn parse_scalar(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn apply_set(block: &mut toml::Table, assignment: &str) -> CliResult<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| validation(format!("--set expects key=value, got {assignment:?}")))?;
    let mut parts: Vec<&str> = key.trim().split('.').collect();
    let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| validation("empty --set key"))?;
    let mut table = block;
    for p in parts {
        table = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| validation(format!("{p} is not a table")))?;
    }
    table.insert(last.to_string(), parse_scalar(raw.trim()));
    Ok(())
}

/// Resolves the configuration of `command` from an optional file plus flags.
pub fn load(command: &str, file: Option<&Path>, overrides: &Overrides) -> CliResult<RunConfig> {
    let mut root = match file {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::io(path, e))?
            .parse::<toml::Table>()
            .map_err(|e| validation(format!("{}: {e}", path.display())))?,
        None => toml::Table::new(),
    };
    let mut block = match root.remove(command) {
        Some(toml::Value::Table(t)) => t,
        Some(_) => return Err(validation(format!("[{command}] must be a table"))),
        None => toml::Table::new(),
    };
    for s in &overrides.set {
        apply_set(&mut block, s)?;
    }
    let seed = match overrides.seed {
        Some(s) => s,
        None => match root.get("seed") {
            Some(v) => v
                .as_integer()
                .and_then(|i| u64::try_from(i).ok())
                .ok_or_else(|| validation("seed must be a non-negative integer"))?,
            None => 0,
        },
    };
    let jobs = match overrides.jobs {
        Some(j) => Some(j),
        None => root
            .get("jobs")
            .map(|v| {
                v.as_integer()
                    .and_then(|i| usize::try_from(i).ok())
                    .ok_or_else(|| validation("jobs must be a positive integer"))
            })
            .transpose()?,
    };
    let out = overrides
        .out
        .clone()
        .or_else(|| root.get("out").and_then(|v| v.as_str()).map(PathBuf::from));
    let block = toml::Value::Table(block);
    let bad = |e: toml::de::Error| validation(format!("[{command}]: {e}"));
    let command = match command {
        "sample" => CommandConfig::Sample(block.try_into().map_err(bad)?),
        "distance" => CommandConfig::Distance(block.try_into().map_err(bad)?),
        "scaling" => CommandConfig::Scaling(block.try_into().map_err(bad)?),
        "couple" => CommandConfig::Couple(block.try_into().map_err(bad)?),
        "explore" => CommandConfig::Explore(block.try_into().map_err(bad)?),
        other => return Err(validation(format!("unknown command {other}"))),
    };
    let cfg = RunConfig {
        seed,
        jobs,
        out,
        command,
    };
    validate(&cfg)?;
    Ok(cfg)
}

/// Checks everything that can be checked without sampling.
pub fn validate(cfg: &RunConfig) -> CliResult<()> {
    if cfg.jobs == Some(0) {
        return Err(validation("jobs must be at least 1"));
    }
    match &cfg.command {
        CommandConfig::Sample(c) => {
            validate_model(&c.model_config())?;
            if c.replicas == 0 {
                return Err(validation("replicas must be at least 1"));
            }
        }
        CommandConfig::Distance(c) => validate_model(&c.model_config())?,
        CommandConfig::Scaling(c) => {
            if c.replay.is_none() {
                scaling_config(c, cfg.seed).validate()?;
            }
            lrp_core::scaling::GoodPointCriteria::new(c.gamma, c.theta_prime, c.r)?;
            if !(c.band_limit >= 1.0) {
                return Err(validation("band_limit must be at least 1"));
            }
        }
        CommandConfig::Couple(c) => {
            if c.n < 2 {
                return Err(validation("n must be at least 2"));
            }
            if !(c.beta > 0.0) || !c.beta.is_finite() {
                return Err(validation("beta must be positive"));
            }
            if c.samples == 0 {
                return Err(validation("samples must be at least 1"));
            }
        }
        CommandConfig::Explore(c) => {
            c.domain().validate()?;
            if !(c.beta >= 0.0) || !c.beta.is_finite() {
                return Err(validation("beta must be non-negative"));
            }
            for &t in std::iter::once(&c.t).chain(&c.t_grid) {
                c.domain().budget(t)?;
            }
            if !(c.epsilon > 0.0) {
                return Err(validation("epsilon must be positive"));
            }
            if c.replicas < 2 {
                return Err(validation("replicas must be at least 2"));
            }
            if c.state_budget == 0 || c.state_budget > STATE_BUDGET {
                return Err(validation(format!("state_budget must lie in 1..={STATE_BUDGET}")));
            }
        }
    }
    Ok(())
}

fn validate_model(m: &ModelConfig) -> CliResult<()> {
    match m.model {
        ModelKind::Discrete => lrp_core::DiscreteParams::new(m.n, m.beta, 0).with_exponent(m.s).validate()?,
        ModelKind::Continuous => continuous_params(m, 0).validate()?,
    }
    Ok(())
}

pub fn continuous_params(m: &ModelConfig, seed: u64) -> lrp_core::ContinuousParams {
    lrp_core::ContinuousParams {
        length: m.length,
        delta: m.delta,
        delta_prime: m.delta_prime,
        beta: m.beta,
        seed,
    }
}

pub fn scaling_config(c: &ScalingCliConfig, seed: u64) -> lrp_core::scaling::ScalingConfig {
    let mut cfg = lrp_core::scaling::ScalingConfig::new(c.beta, c.model, c.grid.clone(), c.replicas, seed);
    cfg.exponent = c.exponent;
    cfg.max_work = c.max_work;
    cfg
}
