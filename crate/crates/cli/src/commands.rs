use std::path::Path;

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use udisc_core::budget::{compare_budgets, write_budgets_csv};
use udisc_core::entropy::{
    covering_upper_with, default_delta, entropy_budget_p, packing_lower_with, write_estimates_csv, ClassSpec,
    EntropyEstimate, DEFAULT_LATTICE_CAP,
};
use udisc_core::function_space::Dictionary;
use udisc_core::greedy::{algorithms, fit_smoothness_constant, GreedyTrace};
use udisc_core::sampling::{generators, PointSet, SampleRequest};
use udisc_core::study::{a1_corpus, fit_power_law, greedy_corpus, scaling_sweep, write_scaling_csv, ScalingSpec};
use udisc_core::verifier::{nikolskii_counterexample, verify_universal};

use crate::config::*;
use crate::error::Failure;
use crate::output::{csv, json, Artifact, Stamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Construct,
    Verify,
    Scaling,
    Entropy,
    Greedy,
    Budget,
    Nikolskii,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Construct => "construct",
            Command::Verify => "verify",
            Command::Scaling => "scaling",
            Command::Entropy => "entropy",
            Command::Greedy => "greedy",
            Command::Budget => "budget",
            Command::Nikolskii => "nikolskii",
        }
    }
}

/// Inputs of one run: the raw config bytes, the directory relative paths
/// resolve against and an optional seed override.
pub struct Run<'a> {
    pub command: Command,
    pub config: &'a [u8],
    pub base_dir: &'a Path,
    pub seed: Option<u64>,
}

impl Run<'_> {
    fn parse<T: DeserializeOwned>(&self) -> Result<T, Failure> {
        serde_json::from_slice(self.config).map_err(|e| Failure::config(format!("config: {e}")))
    }

    fn stamp(&self, config_seed: u64) -> (Stamp, u64) {
        let seed = self.seed.unwrap_or(config_seed);
        (Stamp::new(self.command.name(), self.config, seed), seed)
    }

    pub fn execute(&self) -> Result<Vec<Artifact>, Failure> {
        match self.command {
            Command::Construct => self.construct(),
            Command::Verify => self.verify(),
            Command::Scaling => self.scaling(),
            Command::Entropy => self.entropy(),
            Command::Greedy => self.greedy(),
            Command::Budget => self.budget(),
            Command::Nikolskii => self.nikolskii(),
        }
    }

    fn construct(&self) -> Result<Vec<Artifact>, Failure> {
        let cfg: ConstructConfig = self.parse()?;
        let (stamp, seed) = self.stamp(cfg.seed);
        let dict = cfg.dictionary.build()?;
        check_sparsity(cfg.v, &dict)?;
        check_exponent(cfg.p)?;
        let generator = generators()
            .build(&cfg.generator.name, &cfg.generator.params)
            .map_err(Failure::config)?;
        let out = generator.generate(&SampleRequest {
            dict: &dict,
            v: cfg.v,
            p: cfg.p,
            m: cfg.m,
            seed,
        })?;
        let mut artifacts = vec![json("points.json", &stamp, &out.points)?];
        if let Some(report) = out.report {
            artifacts.push(json("report.json", &stamp, &report)?);
        }
        Ok(artifacts)
    }

    fn points(&self, source: &PointSource, dict: &Dictionary, v: usize, p: f64, seed: u64) -> Result<PointSet, Failure> {
        match source {
            PointSource::Nodes(nodes) => PointSet::explicit(nodes.clone()).map_err(Failure::config),
            PointSource::File(path) => {
                let path = self.base_dir.join(path);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
                let doc: Value =
                    serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
                // Accept both bare point sets and the stamped output of `construct`.
                let inner = doc.get("result").cloned().unwrap_or(doc);
                PointSet::from_json(&inner.to_string()).map_err(Failure::config)
            }
            PointSource::Generator { name, params, m } => {
                let generator = generators().build(name, params).map_err(Failure::config)?;
                let out = generator.generate(&SampleRequest {
                    dict,
                    v,
                    p,
                    m: *m,
                    seed,
                })?;
                Ok(out.points)
            }
        }
    }

    fn verify(&self) -> Result<Vec<Artifact>, Failure> {
        let cfg: VerifyConfig = self.parse()?;
        let (stamp, seed) = self.stamp(cfg.seed);
        let dict = cfg.dictionary.build()?;
        check_sparsity(cfg.v, &dict)?;
        check_exponent(cfg.p)?;
        check_epsilon(cfg.epsilon)?;
        let points = self.points(&cfg.points, &dict, cfg.v, cfg.p, seed)?;
        let report = verify_universal(&points, &dict, cfg.v, cfg.p, cfg.epsilon, &cfg.policy)?;
        Ok(vec![json("report.json", &stamp, &report)?])
    }

    fn scaling(&self) -> Result<Vec<Artifact>, Failure> {
        #[derive(Serialize)]
        struct Fit {
            max_frequency: usize,
            n: usize,
            c: Option<f64>,
            alpha: Option<f64>,
        }

        let cfg: ScalingConfig = self.parse()?;
        let (stamp, seed) = self.stamp(cfg.seed);
        check_exponent(cfg.p)?;
        check_epsilon(cfg.epsilon)?;
        if cfg.vs.is_empty() || cfg.seeds == 0 {
            return Err(Failure::config("scaling needs at least one v and one seed"));
        }
        let degrees = cfg
            .max_frequencies
            .clone()
            .unwrap_or_else(|| vec![cfg.dictionary.max_frequency]);
        let dicts = degrees
            .iter()
            .map(|&k| cfg.dictionary.build_with(k))
            .collect::<Result<Vec<_>, _>>()?;
        for d in &dicts {
            for &v in &cfg.vs {
                check_sparsity(v, d)?;
                if cfg.m_max < v {
                    return Err(Failure::config(format!("m_max = {} is below v = {v}", cfg.m_max)));
                }
            }
        }
        let spec = ScalingSpec {
            vs: cfg.vs.clone(),
            p: cfg.p,
            epsilon: cfg.epsilon,
            seeds: cfg.seeds,
            seed,
            m_max: cfg.m_max,
        };
        let mut rows = Vec::new();
        let mut fits = Vec::new();
        for d in &dicts {
            let block = scaling_sweep(d, &spec, &cfg.policy)?;
            let medians: Option<Vec<f64>> = block.iter().map(|r| r.median_m).collect();
            let xs: Vec<f64> = cfg.vs.iter().map(|&v| v as f64).collect();
            let fit = medians.and_then(|m| fit_power_law(&xs, &m).ok());
            fits.push(Fit {
                max_frequency: d.max_frequency(),
                n: d.len(),
                c: fit.map(|f| f.0),
                alpha: fit.map(|f| f.1),
            });
            rows.extend(block);
        }
        let mut table = Vec::new();
        write_scaling_csv(&rows, &mut table)?;
        Ok(vec![
            csv("scaling.csv", &stamp, &table)?,
            json("scaling_fit.json", &stamp, &fits)?,
        ])
    }

    fn entropy(&self) -> Result<Vec<Artifact>, Failure> {
        #[derive(Serialize)]
        struct BudgetRow {
            k: usize,
            n: usize,
            v: usize,
            p: f64,
            scale: f64,
        }

        let cfg: EntropyConfig = self.parse()?;
        let (stamp, seed) = self.stamp(cfg.seed);
        let dict = cfg.dictionary.build()?;
        let class = ClassSpec::new(&dict, cfg.v, cfg.p);
        class.validate().map_err(Failure::config)?;
        if cfg.scales.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Failure::config("scales must be positive"));
        }
        if cfg.delta.is_some_and(|d| !(d > 0.0)) || !(cfg.budget_constant > 0.0) {
            return Err(Failure::config("delta and budget_constant must be positive"));
        }
        if cfg.ks.contains(&0) {
            return Err(Failure::config("entropy indices k start at 1"));
        }
        let mut rows: Vec<EntropyEstimate> = Vec::new();
        for &t in &cfg.scales {
            let delta = cfg.delta.unwrap_or_else(|| default_delta(&class, t, cfg.metric));
            let upper = covering_upper_with(&class, t, delta, cfg.metric, DEFAULT_LATTICE_CAP)?;
            let lower = packing_lower_with(&class, t, cfg.trials, seed, cfg.metric)?;
            rows.push(EntropyEstimate::combine(&lower, &upper));
        }
        let mut table = Vec::new();
        write_estimates_csv(&rows, &mut table)?;
        let mut artifacts = vec![csv("entropy.csv", &stamp, &table)?];
        if !cfg.ks.is_empty() {
            let mut w = ::csv::Writer::from_writer(Vec::new());
            for &k in &cfg.ks {
                w.serialize(BudgetRow {
                    k,
                    n: dict.len(),
                    v: cfg.v,
                    p: cfg.p,
                    scale: entropy_budget_p(k, cfg.v, dict.len(), cfg.p, cfg.budget_constant),
                })
                .map_err(|e| Failure::Io(e.to_string()))?;
            }
            let table = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
            artifacts.push(csv("entropy_budgets.csv", &stamp, &table)?);
        }
        Ok(artifacts)
    }

    fn greedy(&self) -> Result<Vec<Artifact>, Failure> {
        #[derive(Serialize)]
        struct TraceRow<'a> {
            target: &'a str,
            step: usize,
            selected_index: Option<usize>,
            residual_norm: f64,
        }
        #[derive(Serialize)]
        struct Summary {
            targets: usize,
            steps: usize,
            fit_p: f64,
            smoothness_constant: f64,
        }

        let cfg: GreedyConfig = self.parse()?;
        let (stamp, seed) = self.stamp(cfg.seed);
        let dict = cfg.dictionary.build()?;
        if cfg.len == 0 || cfg.len > dict.len() || cfg.m > dict.len() || cfg.count == 0 {
            return Err(Failure::config(format!(
                "need 1 ≤ len ≤ {n}, m ≤ {n} and count ≥ 1",
                n = dict.len()
            )));
        }
        if !(cfg.fit_p > 1.0 && cfg.fit_p.is_finite()) {
            return Err(Failure::config("fit_p must be finite and above 1"));
        }
        let algorithm = algorithms()
            .build(&cfg.algorithm.name, &cfg.algorithm.params)
            .map_err(Failure::config)?;
        let targets = a1_corpus(dict.len(), cfg.len, cfg.count, seed).map_err(Failure::config)?;
        let traces: Vec<GreedyTrace> = greedy_corpus(&dict, algorithm.as_ref(), &targets, cfg.m)?;
        let mut w = ::csv::Writer::from_writer(Vec::new());
        for t in &traces {
            for (step, &r) in t.residual_norms.iter().enumerate() {
                w.serialize(TraceRow {
                    target: &t.target,
                    step,
                    selected_index: step.checked_sub(1).map(|i| t.selected_indices[i]),
                    residual_norm: r,
                })
                .map_err(|e| Failure::Io(e.to_string()))?;
            }
        }
        let table = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
        let summary = Summary {
            targets: traces.len(),
            steps: cfg.m,
            fit_p: cfg.fit_p,
            smoothness_constant: fit_smoothness_constant(&traces, cfg.fit_p),
        };
        Ok(vec![
            csv("greedy.csv", &stamp, &table)?,
            json("greedy_fit.json", &stamp, &summary)?,
        ])
    }

    fn budget(&self) -> Result<Vec<Artifact>, Failure> {
        let cfg: BudgetConfig = self.parse()?;
        let (stamp, _) = self.stamp(cfg.seed);
        if cfg.rows.is_empty() {
            return Err(Failure::config("budget needs at least one row"));
        }
        let rows = cfg
            .rows
            .iter()
            .map(|r| compare_budgets(r.v, r.n, r.p, r.n_hc, r.d))
            .collect::<Result<Vec<_>, _>>()
            .map_err(Failure::config)?;
        let mut table = Vec::new();
        write_budgets_csv(&rows, &mut table)?;
        Ok(vec![csv("budgets.csv", &stamp, &table)?])
    }

    fn nikolskii(&self) -> Result<Vec<Artifact>, Failure> {
        #[derive(Serialize)]
        struct Row {
            v: usize,
            p: f64,
            ratio: f64,
            reference: f64,
            quotient: f64,
        }

        let cfg: NikolskiiConfig = self.parse()?;
        let (stamp, _) = self.stamp(cfg.seed);
        if !(cfg.p >= 2.0 && cfg.p.is_finite()) {
            return Err(Failure::config(format!("exponent p = {} must be finite and at least 2", cfg.p)));
        }
        if cfg.vs.is_empty() || cfg.vs.iter().any(|&v| v == 0 || v > 12) {
            return Err(Failure::config("vs must be nonempty and lie in 1..=12"));
        }
        let mut w = ::csv::Writer::from_writer(Vec::new());
        for &v in &cfg.vs {
            let (ratio, reference) = nikolskii_counterexample(v, cfg.p)?;
            w.serialize(Row {
                v,
                p: cfg.p,
                ratio,
                reference,
                quotient: ratio / reference,
            })
            .map_err(|e| Failure::Io(e.to_string()))?;
        }
        let table = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
        Ok(vec![csv("nikolskii.csv", &stamp, &table)?])
    }
}
