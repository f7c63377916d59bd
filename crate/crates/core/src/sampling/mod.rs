//! Point-set generators and discrete norms.

mod point_set;
mod two_stage;

pub use point_set::{discrete_lp, discrete_mean_pow, equispaced, sample_iid, PointSet, Provenance};
pub use two_stage::{stage1_size, stage2_size, two_stage, two_stage_with, TwoStageParams};

use serde::Deserialize;
use serde_json::Value;

use crate::error::{invalid, Result};
use crate::function_space::Dictionary;
use crate::registry::{parse_params, Registry};
use crate::verifier::{DiscretizationReport, SearchPolicy};

/// Inputs shared by every generator.
#[derive(Debug, Clone)]
pub struct SampleRequest<'a> {
    pub dict: &'a Dictionary,
    pub v: usize,
    pub p: f64,
    /// Requested size; generators that choose their own size ignore it.
    pub m: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub points: PointSet,
    /// Present when the generator verified its own output.
    pub report: Option<DiscretizationReport>,
}

pub trait PointSetGenerator: Send + Sync {
    fn name(&self) -> &'static str;
    fn generate(&self, req: &SampleRequest<'_>) -> Result<Generated>;
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SizeParams {
    #[serde(default)]
    m: Option<usize>,
}

fn resolve_size(own: Option<usize>, req: &SampleRequest<'_>) -> Result<usize> {
    req.m
        .or(own)
        .ok_or_else(|| invalid("this generator needs a size m"))
}

struct Iid {
    m: Option<usize>,
}

impl PointSetGenerator for Iid {
    fn name(&self) -> &'static str {
        "iid"
    }

    fn generate(&self, req: &SampleRequest<'_>) -> Result<Generated> {
        let points = sample_iid(resolve_size(self.m, req)?, req.seed)?;
        Ok(Generated { points, report: None })
    }
}

struct Equispaced {
    m: Option<usize>,
}

impl PointSetGenerator for Equispaced {
    fn name(&self) -> &'static str {
        "equispaced"
    }

    fn generate(&self, req: &SampleRequest<'_>) -> Result<Generated> {
        let points = equispaced(resolve_size(self.m, req)?)?;
        Ok(Generated { points, report: None })
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TwoStageConfig {
    c1: f64,
    c2: f64,
    epsilon: f64,
    max_retries: usize,
    subsample_trials: usize,
    policy: Option<SearchPolicy>,
}

impl Default for TwoStageConfig {
    fn default() -> Self {
        let d = TwoStageParams::default();
        TwoStageConfig {
            c1: d.c1,
            c2: d.c2,
            epsilon: d.epsilon,
            max_retries: d.max_retries,
            subsample_trials: d.subsample_trials,
            policy: None,
        }
    }
}

struct TwoStage {
    params: TwoStageParams,
    policy: SearchPolicy,
}

impl PointSetGenerator for TwoStage {
    fn name(&self) -> &'static str {
        "two_stage"
    }

    fn generate(&self, req: &SampleRequest<'_>) -> Result<Generated> {
        let (points, report) = two_stage_with(req.dict, req.v, req.p, &self.params, req.seed, &self.policy)?;
        Ok(Generated {
            points,
            report: Some(report),
        })
    }
}

/// Registered generators: `iid`, `equispaced`, `two_stage`.
pub fn generators() -> Registry<dyn PointSetGenerator> {
    Registry::new("generator")
        .register("iid", |v: &Value| {
            let p: SizeParams = parse_params(v)?;
            Ok(Box::new(Iid { m: p.m }) as Box<dyn PointSetGenerator>)
        })
        .register("equispaced", |v: &Value| {
            let p: SizeParams = parse_params(v)?;
            Ok(Box::new(Equispaced { m: p.m }) as Box<dyn PointSetGenerator>)
        })
        .register("two_stage", |v: &Value| {
            let c: TwoStageConfig = parse_params(v)?;
            let params = TwoStageParams {
                c1: c.c1,
                c2: c.c2,
                epsilon: c.epsilon,
                max_retries: c.max_retries,
                subsample_trials: c.subsample_trials,
            };
            params.validate()?;
            Ok(Box::new(TwoStage {
                params,
                policy: c.policy.unwrap_or_default(),
            }) as Box<dyn PointSetGenerator>)
        })
}
