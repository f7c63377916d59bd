//! Worked examples checked against independent reference computations.

use proptest::prelude::*;

use udisc_core::budget::{net_partition, required_m_integral_value, LatticeNets, PartitionSchedule};
use udisc_core::entropy::{covering_upper, packing_lower, ClassSpec};
use udisc_core::function_space::{lp_norm, reference_grid, Dictionary, NormSpec, SparseFunction};
use udisc_core::oracle::{
    combination, dense_lp_norm, interval_cover_count, interval_packing_count, ratio_bruteforce,
    required_m_constant_entropy, trig_basis, OracleConfig,
};
use udisc_core::rng::seeded;
use udisc_core::sampling::{equispaced, sample_iid};
use udisc_core::verifier::{nikolskii_counterexample, ratio_extremes_p2};

#[test]
fn constant_entropy_budget_matches_simpson() {
    for (p, eps, r, h) in [(1.0, 0.5, 2.0, 3.0), (2.0, 0.25, 1.5, 10.0), (1.5, 0.3, 4.0, 1.0)] {
        let entropy = move |t: f64| if t < 2.0 * r { h } else { 0.0 };
        let got = required_m_integral_value(p, eps, r, &entropy, 0.7, 2.0).unwrap();
        let oracle = required_m_constant_entropy(p, eps, r, h, 2.0, 4000);
        assert!((oracle.fine / oracle.coarse - 1.0).abs() < 1e-6);
        assert!((got / oracle.extrapolated - 1.0).abs() < 1e-4, "{got} vs {oracle:?}");
    }
}

#[test]
fn p2_extremes_match_brute_force() {
    let d = Dictionary::trig_real(2);
    let cfg = OracleConfig::default();
    for (pts, support) in [
        (equispaced(4).unwrap(), vec![3]),
        (equispaced(4).unwrap(), vec![1, 2]),
        (sample_iid(7, 3).unwrap(), vec![0, 4]),
        (sample_iid(9, 5).unwrap(), vec![1, 2, 3]),
    ] {
        let (lo, hi, _, _) = ratio_extremes_p2(&pts, &d, &support).unwrap();
        let (blo, bhi) = ratio_bruteforce(pts.nodes(), &d, &support, 2.0, &cfg).unwrap();
        assert!((lo - blo).abs() < 1e-6 && (hi - bhi).abs() < 1e-6, "{support:?}: {lo} {hi} vs {blo} {bhi}");
    }
}

#[test]
fn riesz_constants_of_the_trig_system() {
    let d = Dictionary::trig_real(2);
    // Gram is diag(1, ½, ½, ½, ½).
    assert!((d.riesz_lower() - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((d.riesz_upper() - 1.0).abs() < 1e-12);
}

#[test]
fn perturbed_norms_match_direct_evaluation() {
    let d = Dictionary::perturbed_riesz(3, 0.3, 9).unwrap();
    let f = SparseFunction::new(&d, vec![1, 4, 6], vec![0.7, -1.1, 0.4]).unwrap();
    for p in [1.0, 2.0, 3.0, 4.5] {
        let direct = dense_lp_norm(&|x| combination(&d, f.support(), f.coeffs(), x), p, 1 << 15);
        let got = lp_norm(&f, NormSpec::new(p));
        assert!((got - direct).abs() < 1e-6 * direct, "p = {p}: {got} vs {direct}");
    }
}

#[test]
fn nikolskii_closed_forms() {
    let (ratio, reference) = nikolskii_counterexample(1, 4.0).unwrap();
    assert!((ratio - (3.0f64 / 8.0).powf(-0.25)).abs() < 1e-9);
    assert!((reference - 1.0).abs() < 1e-15);
    for v in 1..=4usize {
        let (ratio, _) = nikolskii_counterexample(v, 2.0).unwrap();
        assert!((ratio - (2.0 * v as f64).sqrt()).abs() < 1e-9);
        let (ratio, _) = nikolskii_counterexample(v, 4.0).unwrap();
        let f = |x: f64| (1..=v).map(|j| trig_basis(2 * (1 << j) - 1, x)).sum::<f64>();
        assert!((ratio - v as f64 / dense_lp_norm(&f, 4.0, 1 << 15)).abs() < 1e-9);
        assert!(ratio > (v as f64).powf(0.25));
    }
}

#[test]
fn segment_entropy_closed_forms() {
    let d = Dictionary::trig_real(1);
    let segment = ClassSpec::restricted(&d, 1, 2.0, vec![1]);
    let half = 2f64.sqrt();
    for t in [0.3, 0.5, 0.8, 1.2] {
        let cover = covering_upper(&segment, t, 0.002).unwrap().upper_count.unwrap();
        let pack = packing_lower(&segment, t, 200, 2).unwrap().lower_count.unwrap();
        assert_eq!(cover, interval_cover_count(half, t), "cover at {t}");
        assert_eq!(pack, interval_packing_count(half, t), "pack at {t}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn partition_bound_holds_pointwise(k in 1usize..3, v in 1usize..3, seed in any::<u64>(), eps in prop_oneof![Just(0.2), Just(0.4)]) {
        let d = Dictionary::trig_real(k);
        let class = ClassSpec::new(&d, v, 1.0);
        let nets = LatticeNets::new(&class).unwrap();
        let schedule = PartitionSchedule::new(
            eps,
            1.0,
            nets.sup_bound().max(1.0),
            PartitionSchedule::DEFAULT_C_STAR,
            PartitionSchedule::DEFAULT_LAMBDA,
            &nets,
        )
        .unwrap();
        let mut rng = seeded(seed);
        let grid = reference_grid(256);
        for _ in 0..8 {
            let f = class.sample_member(&mut rng);
            let out = net_partition(&f, &nets, &schedule, &grid).unwrap();
            for (&x, &h) in grid.iter().zip(&out.h) {
                let fx = combination(&d, f.support(), f.coeffs(), x).abs();
                prop_assert!((fx - h).abs() <= eps / 4.0, "x = {x}: |f| = {fx}, h = {h}");
            }
        }
    }
}
