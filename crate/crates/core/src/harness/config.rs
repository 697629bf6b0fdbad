//! Experiment and audit configuration files (JSON, unknown keys rejected).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::env::{hard_instance, BernoulliInstance};
use crate::error::{Error, Result};
use crate::explore::PacParams;
use crate::osmd::{EstimatorVariant, OsmdConfig, DEFAULT_PROJECTION_TOL};

/// Algorithms addressable from a config file or the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Plain mirror descent over all arms, for regret curves.
    Osmd,
    MedianElimination,
    PacBar,
    FindBest,
    RbarSample,
    RbarRegret,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Osmd => "osmd",
            Algorithm::MedianElimination => "median-elimination",
            Algorithm::PacBar => "pac-bar",
            Algorithm::FindBest => "find-best",
            Algorithm::RbarSample => "rbar-sample",
            Algorithm::RbarRegret => "rbar-regret",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            Algorithm::Osmd,
            Algorithm::MedianElimination,
            Algorithm::PacBar,
            Algorithm::FindBest,
            Algorithm::RbarSample,
            Algorithm::RbarRegret,
        ]
        .into_iter()
        .find(|a| a.name() == name)
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// An instance given either as an explicit mean list or as a hard-instance family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSpec {
    Means(Vec<f64>),
    Family(FamilySpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    /// Only `"H"` is defined.
    pub family: String,
    pub n: usize,
    pub eps: f64,
    #[serde(default)]
    pub j: Option<usize>,
}

impl InstanceSpec {
    pub fn build(&self) -> Result<BernoulliInstance> {
        match self {
            InstanceSpec::Means(means) => BernoulliInstance::new(means.clone()),
            InstanceSpec::Family(f) => {
                if f.family != "H" {
                    return Err(Error::Config(format!(
                        "unknown instance family {:?} (expected \"H\")",
                        f.family
                    )));
                }
                hard_instance(f.n, f.eps, f.j)
            }
        }
    }
}

/// Algorithm parameters. Which ones are required depends on the algorithm;
/// supplying one the algorithm does not use is a config error.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub m: Option<usize>,
    pub r: Option<f64>,
    pub rounds: Option<u64>,
    pub eta: Option<f64>,
    pub estimator_variant: Option<EstimatorVariant>,
    pub projection_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub instance: InstanceSpec,
    #[serde(default)]
    pub params: Params,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

fn default_parallelism() -> usize {
    1
}

/// Validated, ready-to-run form of an [`ExperimentConfig`].
#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub algorithm: Algorithm,
    pub instance: BernoulliInstance,
    pub task: Task,
    pub trials: u64,
    pub seed: u64,
    pub parallelism: usize,
}

/// Per-algorithm parameters after validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Task {
    Osmd { osmd: OsmdConfig },
    MedianElimination { eps: f64, delta: f64 },
    PacBar { params: PacParams },
    FindBest { osmd: OsmdConfig },
    RbarSample { m: usize, r: f64, osmd: OsmdConfig },
    RbarRegret { m: usize, r: f64, osmd: OsmdConfig },
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn resolve(&self) -> Result<ResolvedExperiment> {
        let cfg_err = |msg: String| Error::Config(msg);
        if self.trials == 0 {
            return Err(cfg_err("trials must be at least 1".into()));
        }
        if self.parallelism == 0 {
            return Err(cfg_err("parallelism must be at least 1".into()));
        }
        let instance = self.instance.build().map_err(|e| cfg_err(e.to_string()))?;
        let n = instance.n_arms();
        let p = &self.params;
        let alg = self.algorithm;

        let mut used: Vec<&str> = Vec::new();
        let mut need = |name: &'static str, present: bool| -> Result<()> {
            used.push(name);
            if present {
                Ok(())
            } else {
                Err(Error::Config(format!("{alg} requires params.{name}")))
            }
        };
        let osmd_opts = |p: &Params| -> OsmdConfig {
            OsmdConfig {
                rounds: p.rounds.unwrap_or(0),
                eta: p.eta,
                estimator_variant: p.estimator_variant.unwrap_or_default(),
                projection_tol: p.projection_tol.unwrap_or(DEFAULT_PROJECTION_TOL),
            }
        };
        let task = match alg {
            Algorithm::Osmd | Algorithm::FindBest => {
                need("rounds", p.rounds.is_some())?;
                let osmd = osmd_opts(p);
                if alg == Algorithm::Osmd {
                    Task::Osmd { osmd }
                } else {
                    Task::FindBest { osmd }
                }
            }
            Algorithm::MedianElimination => {
                need("eps", p.eps.is_some())?;
                need("delta", p.delta.is_some())?;
                let (eps, delta) = (p.eps.unwrap(), p.delta.unwrap());
                PacParams::new(eps, delta, 1).map_err(|e| cfg_err(e.to_string()))?;
                Task::MedianElimination { eps, delta }
            }
            Algorithm::PacBar => {
                need("eps", p.eps.is_some())?;
                need("delta", p.delta.is_some())?;
                need("m", p.m.is_some())?;
                let params = PacParams::new(p.eps.unwrap(), p.delta.unwrap(), p.m.unwrap())
                    .map_err(|e| cfg_err(e.to_string()))?;
                if params.m > n {
                    return Err(cfg_err(format!("m = {} exceeds n = {n}", params.m)));
                }
                Task::PacBar { params }
            }
            Algorithm::RbarSample | Algorithm::RbarRegret => {
                need("m", p.m.is_some())?;
                need("r", p.r.is_some())?;
                let (m, r) = (p.m.unwrap(), p.r.unwrap());
                if m == 0 || m > n {
                    return Err(cfg_err(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
                }
                if !(r > 0.0 && r.is_finite()) {
                    return Err(cfg_err(format!("r must be positive, got {r}")));
                }
                let osmd = osmd_opts(p);
                if alg == Algorithm::RbarSample {
                    Task::RbarSample { m, r, osmd }
                } else {
                    Task::RbarRegret { m, r, osmd }
                }
            }
        };
        let osmd_keys = ["eta", "estimator_variant", "projection_tol"];
        let mut allowed = used.clone();
        if matches!(
            alg,
            Algorithm::Osmd | Algorithm::FindBest | Algorithm::RbarSample | Algorithm::RbarRegret
        ) {
            allowed.extend(osmd_keys);
        }
        let supplied = [
            ("eps", p.eps.is_some()),
            ("delta", p.delta.is_some()),
            ("m", p.m.is_some()),
            ("r", p.r.is_some()),
            ("rounds", p.rounds.is_some()),
            ("eta", p.eta.is_some()),
            ("estimator_variant", p.estimator_variant.is_some()),
            ("projection_tol", p.projection_tol.is_some()),
        ];
        for (name, present) in supplied {
            if present && !allowed.contains(&name) {
                return Err(cfg_err(format!("params.{name} is not used by {alg}")));
            }
        }
        if let Task::Osmd { osmd }
        | Task::FindBest { osmd }
        | Task::RbarSample { osmd, .. }
        | Task::RbarRegret { osmd, .. } = &task
        {
            osmd.validate().map_err(|e| cfg_err(e.to_string()))?;
        }
        Ok(ResolvedExperiment {
            algorithm: alg,
            instance,
            task,
            trials: self.trials,
            seed: self.seed,
            parallelism: self.parallelism,
        })
    }
}

/// Event evaluated on an audit transcript.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EventSpec {
    Always,
    Never,
    /// Empirical mean of `arm` strictly exceeds that of `other`.
    MeanExceeds {
        arm: usize,
        other: usize,
    },
}

/// Configuration of a likelihood-ratio audit with a round-robin sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub mu: InstanceSpec,
    pub mu_prime: InstanceSpec,
    pub pulls_per_arm: u64,
    pub event: EventSpec,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

impl AuditConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
