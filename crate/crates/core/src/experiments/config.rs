//! TOML experiment configuration.
//!
//! ```toml
//! experiment = "tail2"
//! trials = 1000
//! master_seed = 1
//! output_path = "out/tail2"
//!
//! [params]
//! N = [31, 97]        # scalars or lists; lists expand to a grid
//! n = 60
//! delta = 0.5
//! ```

use serde::{Deserialize, Serialize};

use crate::arith::require_prime_ge5;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Tail1,
    Tail2,
    Certificate,
    Recovery,
    ModelCompare,
    PaperTable,
}

impl ExperimentKind {
    pub fn tag(self) -> &'static str {
        match self {
            ExperimentKind::Tail1 => "tail1",
            ExperimentKind::Tail2 => "tail2",
            ExperimentKind::Certificate => "certificate",
            ExperimentKind::Recovery => "recovery",
            ExperimentKind::ModelCompare => "model_compare",
            ExperimentKind::PaperTable => "paper_table",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<OneOrMany<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<OneOrMany<usize>>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub max_m: Option<OneOrMany<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<OneOrMany<f64>>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<OneOrMany<u64>>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<OneOrMany<f64>>,
    /// Signals per Ω draw (recovery).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials_x: Option<usize>,
    /// Recovery tolerance in ℓ∞.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output")]
    pub output_path: String,
    #[serde(default)]
    pub params: Params,
}

fn default_trials() -> usize {
    1000
}

fn default_output() -> String {
    "out".to_string()
}

fn list<T: Clone>(v: &Option<OneOrMany<T>>, name: &str) -> Result<Vec<T>> {
    let values = v
        .as_ref()
        .map(|v| v.values())
        .ok_or_else(|| Error::Config(format!("missing params.{name}")))?;
    if values.is_empty() {
        return Err(Error::Config(format!("params.{name} is empty")));
    }
    Ok(values)
}

impl Params {
    pub fn moduli(&self) -> Result<Vec<usize>> {
        list(&self.modulus, "N")
    }
    pub fn ns(&self) -> Result<Vec<usize>> {
        list(&self.n, "n")
    }
    pub fn max_ms(&self) -> Result<Vec<u64>> {
        list(&self.max_m, "M")
    }
    pub fn deltas(&self) -> Result<Vec<f64>> {
        list(&self.delta, "delta")
    }
    pub fn ts(&self) -> Result<Vec<u64>> {
        list(&self.t, "T")
    }
    pub fn cs(&self) -> Result<Vec<f64>> {
        list(&self.c, "C")
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("serializable")
    }

    /// Checks the preconditions of every grid point before anything runs.
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        let p = &self.params;
        let prime_moduli = || -> Result<()> {
            for n in p.moduli()? {
                require_prime_ge5(n)?;
            }
            Ok(())
        };
        let positive = |vals: Vec<usize>, name: &str| -> Result<()> {
            if vals.contains(&0) {
                return Err(Error::Config(format!("params.{name} must be >= 1")));
            }
            Ok(())
        };
        match self.experiment {
            ExperimentKind::Tail2 => {
                prime_moduli()?;
                positive(p.ns()?, "n")?;
                p.deltas()?;
            }
            ExperimentKind::Tail1 => {
                if p.max_ms()?.contains(&0) {
                    return Err(Error::Config("params.M must be >= 1".into()));
                }
                positive(p.ns()?, "n")?;
                p.deltas()?;
            }
            ExperimentKind::Certificate | ExperimentKind::Recovery | ExperimentKind::PaperTable => {
                prime_moduli()?;
                if p.ts()?.contains(&0) {
                    return Err(Error::Config("params.T must be >= 1".into()));
                }
                for c in p.cs()? {
                    let ok = if self.experiment == ExperimentKind::PaperTable {
                        c > 0.0
                    } else {
                        c > 1.0
                    };
                    if !ok {
                        return Err(Error::Config(format!("params.C = {c} out of range")));
                    }
                }
                if self.experiment == ExperimentKind::Recovery && p.trials_x == Some(0) {
                    return Err(Error::Config("params.trials_x must be >= 1".into()));
                }
            }
            ExperimentKind::ModelCompare => {
                for n in p.moduli()? {
                    crate::arith::check_modulus(n)?;
                }
                positive(p.ns()?, "n")?;
            }
        }
        Ok(())
    }
}
