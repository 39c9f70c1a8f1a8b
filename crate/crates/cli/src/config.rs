//! Run configuration: a sectioned TOML file with every key documented in
//! `docs/schemas.md`. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use pvqa_core::ansatz::{AnsatzFamily, AnsatzSpec};
use pvqa_core::noise::{noise_model_factory, NoiseModel};
use pvqa_core::optimize::{Method, OptimizerConfig};
use pvqa_core::poisson::{project_mean_zero, BoundaryCondition, PoissonProblem};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub ansatz: AnsatzSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    pub execution: ExecutionSection,
    #[serde(default)]
    pub transpile: TranspileSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub qubits: usize,
    pub bc: String,
    /// `ones`, `alternating` or `file`.
    pub source: String,
    /// Required when `source = "file"`: one value per line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_path: Option<PathBuf>,
    #[serde(default = "default_spacing")]
    pub grid_spacing: f64,
}

fn default_spacing() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSection {
    pub family: String,
    pub layers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub method: String,
    pub max_evals: usize,
    pub restarts: usize,
    pub scale: f64,
    pub x_tol: f64,
    pub f_tol: f64,
    /// Defaults to `execution.seed`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = OptimizerConfig::default();
        Self {
            method: d.method.name().to_string(),
            max_evals: d.max_evals,
            restarts: d.restarts,
            scale: d.scale,
            x_tol: d.x_tol,
            f_tol: d.f_tol,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExecutionSection {
    /// `exact` or `shots`.
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_shots")]
    pub shots: usize,
    pub seed: u64,
}

fn default_mode() -> String {
    "exact".into()
}

fn default_shots() -> usize {
    1024
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranspileSection {
    /// `linear` or `none` (all-to-all).
    pub coupling: String,
    /// Reserved; any value is rejected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimization_level: Option<u32>,
}

impl Default for TranspileSection {
    fn default() -> Self {
        Self {
            coupling: "linear".into(),
            optimization_level: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub profile: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            profile: "ideal".into(),
            params: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutionMode {
    Exact,
    Shots(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingKind {
    Linear,
    AllToAll,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::parse(&text)?;
        // Relative source paths resolve against the config file.
        if let (Some(p), Some(dir)) = (&config.problem.source_path, path.parent()) {
            if p.is_relative() {
                config.problem.source_path = Some(dir.join(p));
            }
        }
        Ok(config)
    }

    /// Canonical TOML with every default spelled out.
    pub fn emit(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical form, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.output.directory = None;
        hex::encode(Sha256::digest(canon.emit().as_bytes()))
    }

    pub fn validate(&self) -> CliResult<()> {
        self.boundary()?;
        self.family()?;
        self.method()?;
        self.mode()?;
        self.coupling()?;
        self.noise_model()?;
        self.optimizer_config()?;
        if self.problem.qubits == 0 || self.problem.qubits > 10 {
            return Err(CliError::Config("problem.qubits must be in 1..=10".into()));
        }
        if self.problem.grid_spacing.is_nan() || self.problem.grid_spacing <= 0.0 {
            return Err(CliError::Config(
                "problem.grid_spacing must be positive".into(),
            ));
        }
        match self.problem.source.as_str() {
            "ones" | "alternating" => {}
            "file" if self.problem.source_path.is_some() => {}
            "file" => {
                return Err(CliError::Config(
                    "problem.source = \"file\" needs problem.source_path".into(),
                ))
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown problem.source `{other}`"
                )))
            }
        }
        if self.transpile.optimization_level.is_some() {
            return Err(CliError::Config(
                "transpile.optimization_level is reserved and must not be set".into(),
            ));
        }
        let seeds = [Some(self.execution.seed), self.optimizer.seed];
        if seeds.iter().flatten().any(|&s| s > i64::MAX as u64) {
            return Err(CliError::Config("seeds must not exceed 2^63 - 1".into()));
        }
        self.ansatz_spec()?;
        Ok(())
    }

    pub fn boundary(&self) -> CliResult<BoundaryCondition> {
        self.problem.bc.parse().map_err(CliError::config)
    }

    pub fn family(&self) -> CliResult<AnsatzFamily> {
        self.ansatz.family.parse().map_err(CliError::config)
    }

    pub fn method(&self) -> CliResult<Method> {
        self.optimizer.method.parse().map_err(CliError::config)
    }

    pub fn mode(&self) -> CliResult<ExecutionMode> {
        match self.execution.mode.as_str() {
            "exact" => Ok(ExecutionMode::Exact),
            "shots" if self.execution.shots >= 1 => Ok(ExecutionMode::Shots(self.execution.shots)),
            "shots" => Err(CliError::Config(
                "execution.shots must be at least 1".into(),
            )),
            other => Err(CliError::Config(format!(
                "unknown execution.mode `{other}`"
            ))),
        }
    }

    pub fn coupling(&self) -> CliResult<CouplingKind> {
        match self.transpile.coupling.as_str() {
            "linear" => Ok(CouplingKind::Linear),
            "none" => Ok(CouplingKind::AllToAll),
            other => Err(CliError::Config(format!(
                "unknown transpile.coupling `{other}`"
            ))),
        }
    }

    pub fn noise_model(&self) -> CliResult<NoiseModel> {
        noise_model_factory(&self.noise.profile, &self.noise.params).map_err(CliError::config)
    }

    pub fn optimizer_config(&self) -> CliResult<OptimizerConfig> {
        let o = &self.optimizer;
        let config = OptimizerConfig {
            method: self.method()?,
            max_evals: o.max_evals,
            x_tol: o.x_tol,
            f_tol: o.f_tol,
            scale: o.scale,
            restarts: o.restarts,
            seed: o.seed.unwrap_or(self.execution.seed),
        };
        config.validate().map_err(CliError::config)?;
        Ok(config)
    }

    pub fn ansatz_spec(&self) -> CliResult<AnsatzSpec> {
        AnsatzSpec::new(self.family()?, self.problem.qubits, self.ansatz.layers)
            .map_err(CliError::config)
    }

    /// Source vector before any projection.
    pub fn raw_source(&self) -> CliResult<Vec<f64>> {
        let n_points = 1usize << self.problem.qubits;
        match self.problem.source.as_str() {
            "ones" => Ok(vec![1.0; n_points]),
            "alternating" => Ok((0..n_points)
                .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
                .collect()),
            _ => {
                let path = self.problem.source_path.as_ref().expect("validated");
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("cannot read {}: {e}", path.display()))
                })?;
                let values = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .enumerate()
                    .map(|(i, l)| {
                        l.parse::<f64>().map_err(|e| {
                            CliError::Config(format!("{}: value {}: {e}", path.display(), i + 1))
                        })
                    })
                    .collect::<CliResult<Vec<f64>>>()?;
                if values.len() != n_points {
                    return Err(CliError::Config(format!(
                        "{} holds {} values, expected {n_points}",
                        path.display(),
                        values.len()
                    )));
                }
                Ok(values)
            }
        }
    }

    /// Problem with the source projected to mean zero where the operator is
    /// singular.
    pub fn problem(&self) -> CliResult<PoissonProblem<f64>> {
        let bc = self.boundary()?;
        let mut f = self.raw_source()?;
        if bc.is_singular() {
            let mean = f.iter().sum::<f64>() / f.len() as f64;
            if mean.abs() > 1e-12 {
                warn!(
                    "{} source has mean {mean}; projecting to mean zero",
                    bc.name()
                );
                f = project_mean_zero(&f);
            }
            if f.iter().all(|v| v.abs() < 1e-12) {
                return Err(CliError::Config(format!(
                    "source `{}` vanishes after mean-zero projection under {} boundaries",
                    self.problem.source,
                    bc.name()
                )));
            }
        }
        PoissonProblem::new(self.problem.qubits, bc, f, self.problem.grid_spacing)
            .map_err(CliError::config)
    }
}
