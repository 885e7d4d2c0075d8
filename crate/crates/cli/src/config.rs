use std::path::{Path, PathBuf};

use quso::qaoa::OptimizerConfig;
use quso::thermal::ThermalNetwork;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Solve,
    BlockVerify,
    QsvtSweep,
    Qaoa,
    Quso,
    Landscape,
    Resources,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostLayerMode {
    Shortcut,
    Full,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub kind: Option<Kind>,
    /// Network file, relative to the config file.
    pub network: PathBuf,
    #[serde(default)]
    pub target_node: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub block_verify: BlockVerifyConfig,
    #[serde(default)]
    pub qsvt: QsvtConfig,
    #[serde(default)]
    pub qaoa: QaoaConfig,
    #[serde(default)]
    pub landscape: LandscapeConfig,
    #[serde(default)]
    pub resources: ResourceConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockVerifyConfig {
    pub tolerance: f64,
}

impl Default for BlockVerifyConfig {
    fn default() -> Self {
        Self { tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QsvtConfig {
    pub mu: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub degree_cap: usize,
}

impl Default for QsvtConfig {
    fn default() -> Self {
        Self {
            mu: vec![0.5, 0.25, 0.125, 0.0625, 1.0 / 38.0],
            epsilon: vec![1e-3],
            degree_cap: quso::qsvt::DEFAULT_DEGREE_CAP,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QaoaConfig {
    pub depths: Vec<usize>,
    /// Phase-register widths `k` (`δ = 2^-k`); 0 stands for `δ = 0`.
    pub phase_qubits: Vec<usize>,
    pub initial_angle: f64,
    pub optimizer: OptimizerConfig,
    /// Multiplies the costs; `None` normalizes by the maximum.
    pub cost_scale: Option<f64>,
    pub mode: CostLayerMode,
    /// `(μ, ε)` of the solver used by the full cost layer.
    pub full_mu: f64,
    pub full_epsilon: f64,
    /// Shots for the final sampled cost estimate.
    pub shots: usize,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        Self {
            depths: vec![1, 2, 3, 4, 5],
            phase_qubits: vec![0, 2, 4, 6],
            initial_angle: 0.5,
            optimizer: OptimizerConfig::default(),
            cost_scale: None,
            mode: CostLayerMode::Shortcut,
            full_mu: 0.5,
            full_epsilon: 1e-2,
            shots: 1024,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeConfig {
    pub gamma_range: [f64; 2],
    pub beta_range: [f64; 2],
    pub points: usize,
    pub phase_qubits: Vec<usize>,
}

impl Default for LandscapeConfig {
    fn default() -> Self {
        Self {
            gamma_range: [0.0, 2.0 * std::f64::consts::PI],
            beta_range: [0.0, std::f64::consts::PI],
            points: 64,
            phase_qubits: vec![0, 2, 6],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourceConfig {
    pub mu: f64,
    /// Target polynomial degree; the largest `ε` giving it is searched.
    pub degree: Option<usize>,
    pub epsilon: Option<f64>,
    pub depth: usize,
    pub phase_qubits: usize,
    pub scaling_nodes: Vec<usize>,
}

impl Default for ResourceConfig {
    fn default() -> Self {
        Self {
            mu: 0.5,
            degree: Some(21),
            epsilon: None,
            depth: 1,
            phase_qubits: 2,
            scaling_nodes: vec![4, 8, 16],
        }
    }
}

/// A parsed config plus everything derived from its location.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub network: ThermalNetwork,
    /// Hex SHA-256 of the config bytes.
    pub hash: String,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn validate(&self, kind: Kind) -> Result<(), CliError> {
        if let Some(k) = self.kind {
            if k != kind {
                return Err(CliError::Config(format!(
                    "config declares kind {k:?} but {kind:?} was requested"
                )));
            }
        }
        let nonempty = |name: &str, len: usize| {
            if len == 0 {
                Err(CliError::Config(format!("grid `{name}` is empty")))
            } else {
                Ok(())
            }
        };
        match kind {
            Kind::QsvtSweep => {
                nonempty("qsvt.mu", self.qsvt.mu.len())?;
                nonempty("qsvt.epsilon", self.qsvt.epsilon.len())?;
            }
            Kind::Qaoa | Kind::Quso => {
                nonempty("qaoa.depths", self.qaoa.depths.len())?;
                if self.qaoa.depths.contains(&0) {
                    return Err(CliError::Config("QAOA depth must be at least 1".into()));
                }
                if kind == Kind::Quso {
                    nonempty("qaoa.phase_qubits", self.qaoa.phase_qubits.len())?;
                }
                self.qaoa.optimizer.validate()?;
            }
            Kind::Landscape => {
                nonempty("landscape.phase_qubits", self.landscape.phase_qubits.len())?;
                if self.landscape.points == 0 {
                    return Err(CliError::Config("landscape.points must be positive".into()));
                }
            }
            Kind::Resources => {
                if self.resources.degree.is_none() && self.resources.epsilon.is_none() {
                    return Err(CliError::Config(
                        "resources needs either `degree` or `epsilon`".into(),
                    ));
                }
            }
            Kind::Solve | Kind::BlockVerify => {}
        }
        Ok(())
    }
}

/// Reads and validates a config. `output` and `seed` override the file.
pub fn load(
    path: &Path,
    kind: Kind,
    output: Option<&Path>,
    seed: Option<u64>,
) -> Result<LoadedConfig, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut config: ExperimentConfig = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate(kind)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let net_path = base.join(&config.network);
    if !net_path.exists() {
        return Err(CliError::Config(format!(
            "network file {} does not exist",
            net_path.display()
        )));
    }
    let network = ThermalNetwork::load(&net_path)
        .map_err(|e| CliError::Config(format!("{}: {e}", net_path.display())))?;
    let output_dir = match output {
        Some(o) => o.to_path_buf(),
        None => base.join(&config.output_dir),
    };
    let hash = hex::encode(Sha256::digest(&bytes));
    Ok(LoadedConfig {
        config,
        network,
        hash,
        output_dir,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_sections() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"network": "n.json"}"#).unwrap();
        assert_eq!(c.qaoa.depths, vec![1, 2, 3, 4, 5]);
        assert_eq!(c.resources.degree, Some(21));
        assert!(c.validate(Kind::Quso).is_ok());
    }

    #[test]
    fn rejects_unknown_fields_and_empty_grids() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"network": "n", "bogus": 1}"#).is_err());
        let mut c: ExperimentConfig = serde_json::from_str(r#"{"network": "n"}"#).unwrap();
        c.qsvt.mu.clear();
        assert!(c.validate(Kind::QsvtSweep).is_err());
        c.kind = Some(Kind::Solve);
        assert!(c.validate(Kind::Resources).is_err());
    }
}
