//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "market": { "s0": 100, "sigma": 2, "T": 1, "dt": 0.005, "A": 140, "k": 1.5 },
//!   "dealers": [ { "gamma": 0.1 }, { "gamma": 1, "q0": 3, "x0": 0 } ],
//!   "runs": 1000,
//!   "seed": 42,
//!   "flags": { "beta_sum_override": false, "trace": false, "alt_denominator": false }
//! }
//! ```
//!
//! A dealer without `beta` gets `1/N`; `q0` and `x0` default to zero. `runs`
//! defaults to 1 and `seed` to 0.

use std::fs;
use std::path::Path;

use dealerfield_core::{validate, DealerSpec, MarketParams, SimConfig, SimFlags, ValidConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketFile {
    pub s0: f64,
    pub sigma: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub dt: f64,
    #[serde(rename = "A")]
    pub a_rate: f64,
    pub k: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DealerFile {
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default)]
    pub q0: i64,
    #[serde(default)]
    pub x0: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlagsFile {
    pub beta_sum_override: bool,
    pub trace: bool,
    pub alt_denominator: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub market: MarketFile,
    pub dealers: Vec<DealerFile>,
    #[serde(default = "one")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub flags: FlagsFile,
}

fn one() -> usize {
    1
}

impl ConfigFile {
    pub fn into_config(self) -> SimConfig {
        let n = self.dealers.len();
        let m = self.market;
        let market = MarketParams {
            s0: m.s0,
            sigma: m.sigma,
            horizon: m.horizon,
            dt: m.dt,
            a_rate: m.a_rate,
            k: m.k,
        };
        let dealers = self
            .dealers
            .iter()
            .map(|d| {
                DealerSpec::new(d.gamma, d.beta.unwrap_or(1.0 / n as f64))
                    .with_inventory(d.q0)
                    .with_cash(d.x0)
            })
            .collect();
        SimConfig {
            market,
            dealers,
            runs: self.runs,
            seed: self.seed,
            flags: SimFlags {
                beta_sum_override: self.flags.beta_sum_override,
                trace: self.flags.trace,
                alt_denominator: self.flags.alt_denominator,
            },
        }
    }

    pub fn from_config(config: &SimConfig) -> Self {
        let m = config.market;
        Self {
            market: MarketFile {
                s0: m.s0,
                sigma: m.sigma,
                horizon: m.horizon,
                dt: m.dt,
                a_rate: m.a_rate,
                k: m.k,
            },
            dealers: config
                .dealers
                .iter()
                .map(|d| DealerFile {
                    gamma: d.gamma,
                    beta: Some(d.beta),
                    q0: d.q0,
                    x0: d.x0,
                })
                .collect(),
            runs: config.runs,
            seed: config.seed,
            flags: FlagsFile {
                beta_sum_override: config.flags.beta_sum_override,
                trace: config.flags.trace,
                alt_denominator: config.flags.alt_denominator,
            },
        }
    }
}

/// Parses a config document without validating it.
pub fn parse_str(text: &str) -> Result<SimConfig, CliError> {
    let file: ConfigFile = serde_json::from_str(text).map_err(CliError::Parse)?;
    Ok(file.into_config())
}

/// Reads, parses and validates the config at `path`.
pub fn parse_config(path: &Path) -> Result<ValidConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(validate(parse_str(&text)?)?)
}
