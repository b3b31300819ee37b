//! Named experiment presets, one per reproduction table.
//!
//! Every preset uses the baseline market (`s = 100, σ = 2, T = 1,
//! dt = 0.005, A = 140, k = 1.5`), equal influence weights `β_i = 1/N`,
//! zero initial cash and 1000 replications.

use dealerfield_core::{DealerSpec, MarketParams, SimConfig};

use crate::CliError;

pub const PRESET_NAMES: [&str; 9] = [
    "table1", "table2", "table3", "table4", "table5", "table6", "table7", "table8", "table9",
];

pub const PRESET_RUNS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub name: &'static str,
    pub caption: &'static str,
    pub config: SimConfig,
}

fn dealers(gammas: &[f64], inventories: &[i64]) -> Vec<DealerSpec> {
    let n = gammas.len();
    gammas
        .iter()
        .zip(inventories)
        .map(|(&g, &q)| DealerSpec::new(g, 1.0 / n as f64).with_inventory(q))
        .collect()
}

pub fn preset(name: &str) -> Result<ExperimentPreset, CliError> {
    let (name, caption, gammas, inventories): (&'static str, &'static str, &[f64], &[i64]) = match name {
        "table1" => ("table1", "one dealer, gamma = 0.1, beta = 1", &[0.1], &[0]),
        "table2" => ("table2", "two dealers, gamma = 0.1, beta = 0.5", &[0.1, 0.1], &[0, 0]),
        "table3" => ("table3", "three dealers, gamma = 0.1, beta = 1/3", &[0.1, 0.1, 0.1], &[0, 0, 0]),
        "table4" => ("table4", "seven dealers, gamma = 0.1, beta = 1/7", &[0.1; 7], &[0; 7]),
        "table5" => ("table5", "two dealers, gamma = (0.01, 1), beta = 0.5", &[0.01, 1.0], &[0, 0]),
        "table6" => (
            "table6",
            "three dealers, gamma = (0.01, 0.1, 1), beta = 1/3",
            &[0.01, 0.1, 1.0],
            &[0, 0, 0],
        ),
        "table7" => ("table7", "two dealers, gamma = 0.1, beta = 0.5, q0 = (10, 1)", &[0.1, 0.1], &[10, 1]),
        "table8" => ("table8", "two dealers, gamma = 0.1, beta = 0.5, q0 = (50, 0)", &[0.1, 0.1], &[50, 0]),
        "table9" => ("table9", "two dealers, gamma = 0.01, beta = 0.5, q0 = (50, 0)", &[0.01, 0.01], &[50, 0]),
        other => return Err(CliError::UnknownPreset(other.to_string())),
    };
    Ok(ExperimentPreset {
        name,
        caption,
        config: SimConfig::new(MarketParams::baseline(), dealers(gammas, inventories)).with_runs(PRESET_RUNS),
    })
}

pub fn all_presets() -> Vec<ExperimentPreset> {
    PRESET_NAMES.iter().map(|n| preset(n).expect("listed preset")).collect()
}
