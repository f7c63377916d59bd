use std::path::PathBuf;

use serde::Deserialize;
use serde_json::Value;
use udisc_core::entropy::Metric;
use udisc_core::function_space::Dictionary;
use udisc_core::verifier::SearchPolicy;

use crate::error::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionaryKindConfig {
    TrigReal,
    PerturbedRiesz,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionaryConfig {
    pub kind: DictionaryKindConfig,
    pub max_frequency: usize,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Largest trigonometric degree accepted from configuration.
const MAX_FREQUENCY: usize = 1 << 12;

impl DictionaryConfig {
    pub fn build(&self) -> Result<Dictionary, Failure> {
        self.build_with(self.max_frequency)
    }

    pub fn build_with(&self, max_frequency: usize) -> Result<Dictionary, Failure> {
        if max_frequency > MAX_FREQUENCY {
            return Err(Failure::config(format!(
                "max_frequency {max_frequency} exceeds {MAX_FREQUENCY}"
            )));
        }
        match self.kind {
            DictionaryKindConfig::TrigReal => {
                if self.delta.is_some() || self.seed.is_some() {
                    return Err(Failure::config("trig_real dictionaries take no delta or seed"));
                }
                Ok(Dictionary::trig_real(max_frequency))
            }
            DictionaryKindConfig::PerturbedRiesz => {
                let delta = self
                    .delta
                    .ok_or_else(|| Failure::config("perturbed_riesz needs delta"))?;
                Dictionary::perturbed_riesz(max_frequency, delta, self.seed.unwrap_or(0)).map_err(Failure::config)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub name: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructConfig {
    pub dictionary: DictionaryConfig,
    pub v: usize,
    pub p: f64,
    pub generator: StrategyConfig,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

/// Where a command gets its point set.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PointSource {
    /// A point-set JSON document, relative to the config file.
    File(PathBuf),
    Nodes(Vec<f64>),
    Generator {
        name: String,
        #[serde(default)]
        params: Value,
        #[serde(default)]
        m: Option<usize>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub dictionary: DictionaryConfig,
    pub v: usize,
    pub p: f64,
    pub epsilon: f64,
    pub points: PointSource,
    #[serde(default = "SearchPolicy::exhaustive")]
    pub policy: SearchPolicy,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub dictionary: DictionaryConfig,
    /// Sweeps the degree instead of using `dictionary.max_frequency` alone.
    #[serde(default)]
    pub max_frequencies: Option<Vec<usize>>,
    pub vs: Vec<usize>,
    pub p: f64,
    pub epsilon: f64,
    pub seeds: usize,
    pub m_max: usize,
    #[serde(default = "SearchPolicy::exhaustive")]
    pub policy: SearchPolicy,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyConfig {
    pub dictionary: DictionaryConfig,
    pub v: usize,
    pub p: f64,
    pub scales: Vec<f64>,
    #[serde(default = "default_metric")]
    pub metric: Metric,
    /// Lattice step; the default keeps the rounding distortion at `t/8`.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Entropy indices `k` for the budget table.
    #[serde(default)]
    pub ks: Vec<usize>,
    #[serde(default = "one")]
    pub budget_constant: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_metric() -> Metric {
    Metric::Sup
}

fn default_trials() -> usize {
    200
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreedyConfig {
    pub dictionary: DictionaryConfig,
    pub algorithm: StrategyConfig,
    /// Targets use the first `len` elements.
    pub len: usize,
    pub count: usize,
    pub m: usize,
    /// Exponent used when fitting the smoothness constant.
    #[serde(default = "two")]
    pub fit_p: f64,
    #[serde(default)]
    pub seed: u64,
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetRow {
    pub v: usize,
    pub n: usize,
    pub p: f64,
    pub n_hc: f64,
    #[serde(default = "one_usize")]
    pub d: usize,
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    pub rows: Vec<BudgetRow>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NikolskiiConfig {
    pub vs: Vec<usize>,
    pub p: f64,
    #[serde(default)]
    pub seed: u64,
}

pub fn check_exponent(p: f64) -> Result<(), Failure> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Failure::config(format!("exponent p = {p} must be finite and at least 1")))
    }
}

pub fn check_epsilon(eps: f64) -> Result<(), Failure> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Failure::config(format!("epsilon = {eps} must lie in (0, 1)")))
    }
}

pub fn check_sparsity(v: usize, dict: &Dictionary) -> Result<(), Failure> {
    if v >= 1 && v <= dict.len() {
        Ok(())
    } else {
        Err(Failure::config(format!("sparsity v = {v} must lie in 1..={}", dict.len())))
    }
}
