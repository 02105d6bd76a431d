use gossip_freshness::analytic;
use gossip_freshness::simulator::{
    cycle_rng, decomposition_check, estimate_freshness_cycles, estimate_freshness_time,
    simulate_cycle, Estimator,
};
use gossip_freshness::{GossipPolicy, GossipPolicy::*, NetworkSpec, Rates};

const Z: f64 = 4.0;

fn ones() -> Rates {
    Rates::new(1.0, 1.0, 1.0, 1.0)
}

fn cycle_fraction(spec: &NetworkSpec, cycles: u64, seed: u64) -> (f64, f64) {
    let mut hits = 0u64;
    for c in 0..cycles {
        let out = simulate_cycle(spec, &mut cycle_rng(seed, c)).unwrap();
        hits += out.updated[0] as u64;
    }
    let p = hits as f64 / cycles as f64;
    (p, (p * (1.0 - p) / cycles as f64).sqrt())
}

#[test]
fn single_cycles_hit_targets() {
    let cases = [
        (NetworkSpec::flat(1, DcNoRc, ones()), 0.5),
        (NetworkSpec::flat(3, DcRc, ones()), 7.0 / 24.0),
        (NetworkSpec::clustered(4, 2, DcRc, FcAllRc, ones()), 5.0 / 32.0),
    ];
    for (i, (spec, target)) in cases.iter().enumerate() {
        let (p, se) = cycle_fraction(spec, 1_000_000, 100 + i as u64);
        assert!((p - target).abs() <= Z * se, "{spec:?}: {p} vs {target} (σ {se})");
    }
}

#[test]
fn cycle_estimator_examples() {
    let spec = NetworkSpec::flat(2, FcAllRc, ones());
    let est = estimate_freshness_cycles(&spec, 1_000_000, 42).unwrap();
    assert_eq!(est.estimator, Estimator::Cycle);
    assert!((est.p_hat - 5.0 / 12.0).abs() <= Z * est.stderr, "{est:?}");
    assert_eq!(est, estimate_freshness_cycles(&spec, 1_000_000, 42).unwrap());

    let spec = NetworkSpec::flat(3, FcSrcRc, ones());
    let est = estimate_freshness_cycles(&spec, 1_000_000, 43).unwrap();
    assert!((est.p_hat - 19.0 / 54.0).abs() <= Z * est.stderr, "{est:?}");
}

#[test]
fn time_average_examples() {
    let spec = NetworkSpec::flat(1, DcNoRc, ones());
    let est = estimate_freshness_time(&spec, 1e6, 8).unwrap();
    assert_eq!(est.estimator, Estimator::TimeAverage);
    assert!((est.p_hat - 0.5).abs() <= Z * est.stderr, "{est:?}");

    let spec = NetworkSpec::flat(10, DcRc, Rates::new(0.1, 1.0, 0.0, 0.0));
    let est = estimate_freshness_time(&spec, 1e5, 9).unwrap();
    let target = analytic::freshness_dc_rc(1.0, 0.1, 10).unwrap().value();
    assert!((est.p_hat - target).abs() <= Z * est.stderr, "{est:?} vs {target}");
}

#[test]
fn both_estimators_target_the_same_quantity() {
    let specs = [
        NetworkSpec::flat(4, FcNoRc, Rates::new(0.5, 1.0, 0.0, 2.0)),
        NetworkSpec::flat(6, FcAllRc, Rates::new(1.0, 2.0, 0.0, 1.0)),
        NetworkSpec::clustered(6, 3, DcRc, FcSrcRc, Rates::new(0.5, 2.0, 3.0, 1.0)),
    ];
    for (i, spec) in specs.iter().enumerate() {
        let cyc = estimate_freshness_cycles(spec, 200_000, 20 + i as u64).unwrap();
        let time = estimate_freshness_time(spec, 200_000.0, 30 + i as u64).unwrap();
        let combined = (cyc.stderr.powi(2) + time.stderr.powi(2)).sqrt();
        assert!(
            (cyc.p_hat - time.p_hat).abs() <= Z * combined,
            "{spec:?}: cycles {} time {} (σ {combined})",
            cyc.p_hat,
            time.p_hat
        );
    }
}

#[test]
fn decomposition_examples() {
    let cases = [
        (NetworkSpec::clustered(4, 2, DcNoRc, DcNoRc, Rates::new(0.5, 1.0, 1.0, 0.0)), 0.25),
        (NetworkSpec::clustered(4, 2, DcRc, DcRc, ones()), 9.0 / 64.0),
        (NetworkSpec::clustered(4, 2, DcRc, FcAllRc, ones()), 5.0 / 32.0),
    ];
    for (i, (spec, target)) in cases.iter().enumerate() {
        let report = decomposition_check(spec, 1_000_000, 200 + i as u64).unwrap();
        assert!((report.analytic.p - target).abs() < 1e-12);
        assert!(report.z.abs() <= Z, "{spec:?}: {report:?}");
    }
}

#[test]
fn nodes_are_statistically_symmetric() {
    let specs = [
        NetworkSpec::flat(5, FcAllRc, Rates::new(1.0, 1.0, 0.0, 1.0)),
        NetworkSpec::clustered(6, 2, DcRc, FcNoRc, Rates::new(0.5, 1.0, 2.0, 1.0)),
    ];
    for spec in specs {
        let est = estimate_freshness_cycles(&spec, 100_000, 77).unwrap();
        let n = est.per_node.len();
        for a in 0..n {
            for b in a + 1..n {
                let (pa, pb) = (est.per_node[a], est.per_node[b]);
                let se = ((pa * (1.0 - pa) + pb * (1.0 - pb)) / 100_000.0).sqrt();
                assert!((pa - pb).abs() <= 5.0 * se, "nodes {a},{b}: {pa} vs {pb}");
            }
        }
    }
}

#[test]
fn faster_self_updates_drive_freshness_down() {
    let mut last = f64::INFINITY;
    for e in [0.1, 1.0, 10.0, 100.0, 1000.0] {
        let spec = NetworkSpec::flat(4, FcAllRc, Rates::new(e, 1.0, 0.0, 1.0));
        let p = estimate_freshness_cycles(&spec, 20_000, 5).unwrap().p_hat;
        assert!(p <= last, "lambda_e={e}: {p} > {last}");
        last = p;
    }
    assert!(last < 0.01);
}

#[test]
fn every_small_flat_spec_agrees_with_recursion() {
    let mut seed = 9_000;
    for policy in GossipPolicy::ALL {
        for n in 1..=8 {
            for (e, s, g) in [(1.0, 2.0, 0.5), (0.25, 1.0, 2.0)] {
                let spec = NetworkSpec::flat(n, policy, Rates::new(e, s, 0.0, g));
                let exact = analytic::freshness(&spec).unwrap().value();
                let est = estimate_freshness_cycles(&spec, 100_000, seed).unwrap();
                seed += 1;
                assert!(est.z_score(exact).abs() <= Z, "{spec:?}: {} vs {exact}", est.p_hat);
            }
        }
    }
}
