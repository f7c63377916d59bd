//! End-to-end acceptance run. Every criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::time::{Duration, Instant};

use udisc_core::budget::{
    bl2_condition, bl2_success_fraction, net_partition, required_m_integral_value, ChernoffFamily,
    IndicatorFunction, IndicatorLevel, LatticeNets, PartitionSchedule,
};
use udisc_core::entropy::{covering_upper, default_delta, packing_lower, ClassSpec, Metric};
use udisc_core::function_space::{reference_grid, Dictionary};
use udisc_core::greedy::{GreedyAlgorithm, Ogp};
use udisc_core::oracle::{
    dense_lp_norm, interval_cover_count, interval_packing_count, sigma_tail_orthonormal, trig_basis,
};
use udisc_core::rng::seeded;
use udisc_core::sampling::{equispaced, stage2_size, two_stage, TwoStageParams};
use udisc_core::study::{a1_corpus, fit_power_law, greedy_corpus, scaling_sweep, ScalingSpec};
use udisc_core::verifier::{nikolskii_counterexample, verify_universal, SearchPolicy, VerificationMode};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn aliasing_witness() -> Outcome {
    let d = Dictionary::trig_real(2);
    let pts = equispaced(4).unwrap();
    let r = verify_universal(&pts, &d, 1, 2.0, 0.5, &SearchPolicy::exhaustive()).unwrap();
    // (1/4)∑cos²(πj) = 1 against ‖cos 4πx‖₂² = 1/2.
    let oracle = (0..4).map(|j| (std::f64::consts::PI * j as f64).cos().powi(2)).sum::<f64>() / 4.0 / 0.5;
    let pass = (r.r_max - oracle).abs() <= 1e-10
        && (oracle - 2.0).abs() <= 1e-12
        && r.witness_max.support == vec![3]
        && r.mode == VerificationMode::ExactEnumeration
        && !r.pass;
    outcome(pass, format!("r_max = {:.12}, witness {:?}", r.r_max, r.witness_max.support))
}

fn exact_universal_pass() -> Outcome {
    let d = Dictionary::trig_real(2);
    let pts = equispaced(8).unwrap();
    let r = verify_universal(&pts, &d, 2, 2.0, 0.5, &SearchPolicy::exhaustive()).unwrap();
    let pass = (r.r_min - 1.0).abs() <= 1e-10
        && (r.r_max - 1.0).abs() <= 1e-10
        && r.supports_checked == 10
        && r.certified
        && r.pass;
    outcome(
        pass,
        format!("r_min = {:.12}, r_max = {:.12}, {} supports", r.r_min, r.r_max, r.supports_checked),
    )
}

fn two_stage_construction() -> Outcome {
    let d = Dictionary::trig_real(8);
    let (n, v) = (d.len(), 2);
    let params = TwoStageParams::default();
    let unit = v as f64 * (2.0 * n as f64).log2().powi(2) * (2.0 * v as f64).log2().powi(2);
    let mut c2_fit: f64 = 0.0;
    let mut ok = true;
    let mut sizes = Vec::new();
    for seed in 0..5u64 {
        match two_stage(&d, v, 2.0, &params, seed) {
            Ok((pts, _)) => {
                let r = verify_universal(&pts, &d, v, 2.0, params.epsilon, &SearchPolicy::exhaustive()).unwrap();
                ok &= r.within(0.5, 1.5) && r.certified;
                c2_fit = c2_fit.max(pts.len() as f64 / unit);
                sizes.push(pts.len());
            }
            Err(e) => {
                ok = false;
                sizes.push(0);
                eprintln!("seed {seed}: {e}");
            }
        }
    }
    ok &= c2_fit <= 4.0 && sizes.iter().all(|&m| m == stage2_size(n, v, params.c2));
    outcome(ok, format!("sizes {sizes:?}, fitted c2 = {c2_fit:.4}"))
}

fn linear_in_v_scaling() -> Outcome {
    let d = Dictionary::trig_real(16);
    let spec = ScalingSpec {
        vs: vec![1, 2, 3, 4],
        p: 2.0,
        epsilon: 0.5,
        seeds: 10,
        seed: 2024,
        m_max: 4096,
    };
    let rows = scaling_sweep(&d, &spec, &SearchPolicy::exhaustive()).unwrap();
    let medians: Option<Vec<f64>> = rows.iter().map(|r| r.median_m).collect();
    let Some(medians) = medians else {
        return outcome(false, "some seed found no passing size below m_max".into());
    };
    let vs: Vec<f64> = spec.vs.iter().map(|&v| v as f64).collect();
    let (c, alpha) = fit_power_law(&vs, &medians).unwrap();
    outcome(
        alpha <= 1.5,
        format!("N = {}, medians {medians:?}, m ≈ {c:.2}·v^{alpha:.3}", d.len()),
    )
}

fn greedy_decay() -> Outcome {
    let d = Dictionary::trig_real(32);
    let len = 64;
    let targets = a1_corpus(d.len(), len, 100, 64).unwrap();
    let traces = greedy_corpus(&d, &Ogp as &dyn GreedyAlgorithm, &targets, len).unwrap();
    let mut violations = 0;
    let mut worst_tail: f64 = 0.0;
    for (t, trace) in targets.iter().zip(&traces) {
        for m in 1..=len {
            let r = trace.residual_norms.get(m).copied().unwrap_or(0.0);
            if r > (m as f64).powf(-0.5) {
                violations += 1;
            }
            worst_tail = worst_tail.max((r - sigma_tail_orthonormal(t, m)).abs());
        }
    }
    outcome(
        violations == 0 && worst_tail <= 1e-8,
        format!("{violations} violations, max |σ̂ − tail| = {worst_tail:.2e}"),
    )
}

fn entropy_sandwich() -> Outcome {
    let seg_dict = Dictionary::trig_real(1);
    let segment = ClassSpec::restricted(&seg_dict, 1, 2.0, vec![1]);
    // c·cos(2πx) with |c| ≤ √2: a segment of half-length √2 in the sup metric.
    let half = 2f64.sqrt();
    let t = 0.5;
    let cover = covering_upper(&segment, t, 0.01).unwrap().upper_count.unwrap();
    let pack = packing_lower(&segment, t, 200, 6).unwrap().lower_count.unwrap();
    let mut ok = cover == interval_cover_count(half, t) && pack == interval_packing_count(half, t) && cover == 3;
    let mut detail = format!("segment cover {cover}, pack {pack}");

    let d = Dictionary::trig_real(2);
    let class = ClassSpec::new(&d, 1, 2.0);
    let mut bad = Vec::new();
    for i in 1..=10 {
        let t = i as f64 / 10.0;
        let upper = covering_upper(&class, t, default_delta(&class, t, Metric::Sup))
            .unwrap()
            .upper_count
            .unwrap();
        let lower = packing_lower(&class, 2.0 * t, 200, i).unwrap().lower_count.unwrap();
        if lower > upper {
            bad.push(t);
        }
    }
    ok &= bad.is_empty();
    detail.push_str(&format!("; N = 5 scales violating packing(2t) ≤ covering(t): {bad:?}"));
    outcome(ok, detail)
}

fn bl2_monte_carlo() -> Outcome {
    let level = |heights: f64, count: usize| IndicatorLevel {
        functions: (0..count)
            .map(|i| IndicatorFunction {
                frequency: i + 1,
                threshold: -0.5 + 0.15 * i as f64,
                height: heights,
            })
            .collect(),
        eta: 0.25,
    };
    let levels = vec![level(2.0, 8), level(1.0, 4)];
    let m = 1000;
    let family = ChernoffFamily {
        levels: levels.iter().map(|l| l.chernoff().unwrap()).collect(),
    };
    let bl2 = bl2_condition(&family, m);
    let fraction = bl2_success_fraction(&levels, m, 200, 7).unwrap();
    outcome(
        bl2.lhs < 0.5 && fraction >= 0.5,
        format!("lhs = {:.4}, success fraction = {fraction:.3}", bl2.lhs),
    )
}

fn partition_invariant() -> Outcome {
    let d = Dictionary::trig_real(2);
    let (eps, p) = (0.2, 1.0);
    let class = ClassSpec::new(&d, 2, p);
    let nets = LatticeNets::new(&class).unwrap();
    let r = nets.sup_bound().max(1.0);
    let schedule = PartitionSchedule::new(
        eps,
        p,
        r,
        PartitionSchedule::DEFAULT_C_STAR,
        PartitionSchedule::DEFAULT_LAMBDA,
        &nets,
    )
    .unwrap();
    let grid = reference_grid(1024);
    let mut rng = seeded(1);
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for _ in 0..100 {
        let f = class.sample_member(&mut rng);
        let out = net_partition(&f, &nets, &schedule, &grid).unwrap();
        // Re-evaluate |f|^p − h^p independently of the reported maximum.
        for (&x, &h) in grid.iter().zip(&out.h) {
            let fx: f64 = f
                .support()
                .iter()
                .zip(f.coeffs())
                .map(|(&j, &c)| c * trig_basis(j, x))
                .sum();
            let gap = (fx.abs().powf(p) - h.powf(p)).abs();
            worst = worst.max(gap);
            if gap > eps / 4.0 {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations, worst ||f|^p − h^p| = {worst:.4} against {}", eps / 4.0),
    )
}

fn corollary_shape() -> Outcome {
    let (b1, b2) = (1.0, 1.0);
    let mut ratios = Vec::new();
    for q in [1.0f64, 2.0] {
        for v in [4.0f64, 16.0, 64.0] {
            for eps in [0.5f64, 0.25, 0.125] {
                let r = b2 * v.powf(1.0 / q);
                let h = move |t: f64| if t < r { v * (b1 / t).powf(q) } else { 0.0 };
                let budget = required_m_integral_value(q, eps, r, &h, 1.0, 1.0).unwrap();
                let formula = eps.powf(-5.0 - q) * v * b1.powf(q) * (b2 * v / eps).log2().powi(2);
                ratios.push(budget / formula);
            }
        }
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    outcome(
        hi / lo <= 3.0,
        format!("budget/formula in [{lo:.4}, {hi:.4}], max/min = {:.3}", hi / lo),
    )
}

fn nikolskii() -> Outcome {
    let mut quantities = Vec::new();
    let mut ok = true;
    for v in [2usize, 3, 4] {
        let (ratio, reference) = nikolskii_counterexample(v, 4.0).unwrap();
        let f = |x: f64| (1..=v).map(|j| trig_basis(2 * (1 << j) - 1, x)).sum::<f64>();
        let norm = dense_lp_norm(&f, 4.0, 1 << 15);
        // f(0) = v is the supremum and lies on every dyadic grid.
        ok &= (ratio - v as f64 / norm).abs() <= 1e-9 * ratio;
        quantities.push(ratio / reference);
    }
    ok &= quantities.windows(2).all(|w| w[1] > w[0]);
    outcome(ok, format!("ratio / v^(1/4) = {quantities:?}"))
}

#[test]
fn acceptance() {
    type Criterion = (u32, &'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 10] = [
        (1, "aliasing witness", aliasing_witness, Duration::from_secs(1)),
        (2, "exact universal pass", exact_universal_pass, Duration::from_secs(1)),
        (3, "two-stage construction", two_stage_construction, Duration::from_secs(300)),
        (4, "linear-in-v scaling", linear_in_v_scaling, Duration::from_secs(1800)),
        (5, "greedy decay", greedy_decay, Duration::from_secs(10)),
        (6, "entropy sandwich", entropy_sandwich, Duration::from_secs(60)),
        (7, "Chernoff family Monte Carlo", bl2_monte_carlo, Duration::from_secs(60)),
        (8, "partition invariant", partition_invariant, Duration::from_secs(120)),
        (9, "integral budget shape", corollary_shape, Duration::from_secs(60)),
        (10, "Nikolskii counterexample", nikolskii, Duration::from_secs(10)),
    ];
    let mut failed = Vec::new();
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= limit;
        println!(
            "criterion {id}: {} {name}: {} ({:.2}s, limit {}s)",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        if !pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
