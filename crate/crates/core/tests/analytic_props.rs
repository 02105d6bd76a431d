use proptest::prelude::*;

use gossip_freshness::analytic::{
    self, clustered_freshness, divisors, flat_closed_form, flat_freshness, optimal_cluster_size,
};
use gossip_freshness::{GossipPolicy, GossipPolicy::*, NetworkSpec, Rates};

fn policy() -> impl Strategy<Value = GossipPolicy> {
    proptest::sample::select(GossipPolicy::ALL.to_vec())
}

fn rate() -> impl Strategy<Value = f64> {
    0.01f64..20.0
}

fn rates() -> impl Strategy<Value = Rates> {
    (rate(), rate(), rate(), rate()).prop_map(|(e, s, c, g)| Rates::new(e, s, c, g))
}

/// A valid clustered spec with n <= 64.
fn clustered() -> impl Strategy<Value = NetworkSpec> {
    (
        1usize..=64,
        any::<prop::sample::Index>(),
        proptest::sample::select(GossipPolicy::SOURCE_STAGE.to_vec()),
        policy(),
        rates(),
    )
        .prop_map(|(n, idx, sp, cp, r)| {
            let ks = divisors(n);
            NetworkSpec::clustered(n, ks[idx.index(ks.len())], sp, cp, r)
        })
}

fn p(spec: &NetworkSpec) -> f64 {
    analytic::freshness(spec).unwrap().value()
}

proptest! {
    #[test]
    fn closed_forms_agree_with_recursion(
        pol in proptest::sample::select(vec![DcNoRc, DcRc, FcNoRc, FcAllRc]),
        n in 1usize..=64,
        r in rates(),
    ) {
        let cf = flat_closed_form(pol, r.lambda_s, r.lambda_g, r.lambda_e, n).unwrap().unwrap().value();
        let rec = flat_freshness(pol, r.lambda_s, r.lambda_g, r.lambda_e, n).unwrap().value();
        prop_assert!((cf - rec).abs() <= 1e-12, "{} vs {}", cf, rec);
    }

    #[test]
    fn rc_strictly_helps_disconnected_networks(n in 2usize..=64, e in rate(), s in rate()) {
        let rc = analytic::freshness_dc_rc(s, e, n).unwrap();
        let norc = analytic::freshness_dc_norc(s, e, n).unwrap();
        prop_assert!(rc > norc);
    }

    #[test]
    fn fc_policies_are_ordered(n in 1usize..=64, r in rates()) {
        let f = |pol| flat_freshness(pol, r.lambda_s, r.lambda_g, r.lambda_e, n).unwrap().value();
        prop_assert!(f(FcAllRc) >= f(FcSrcRc) - 1e-15);
        prop_assert!(f(FcSrcRc) >= f(FcNoRc) - 1e-15);
    }

    #[test]
    fn rescaling_time_changes_nothing(spec in clustered(), pol in policy(), c in 0.01f64..100.0) {
        let mut scaled = spec;
        scaled.rates = spec.rates.scaled(c);
        prop_assert!((p(&spec) - p(&scaled)).abs() <= 1e-12);

        let flat = NetworkSpec::flat(spec.node_count(), pol, spec.rates);
        let flat_scaled = NetworkSpec::flat(spec.node_count(), pol, scaled.rates);
        prop_assert!((p(&flat) - p(&flat_scaled)).abs() <= 1e-12);
    }

    #[test]
    fn clustered_values_are_products_in_range(spec in clustered()) {
        let (v, b) = clustered_freshness(&spec).unwrap();
        for x in [v.value(), b.p_ch, b.p_node_given_ch] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        prop_assert_eq!(v.value(), b.p_ch * b.p_node_given_ch);
    }

    #[test]
    fn monotone_in_every_rate(pol in policy(), n in 1usize..=40, r in rates(), bump in 1.01f64..3.0) {
        let base = NetworkSpec::flat(n, pol, r);
        let with = |f: fn(&mut Rates, f64)| {
            let mut spec = base;
            f(&mut spec.rates, bump);
            p(&spec)
        };
        let p0 = p(&base);
        prop_assert!(with(|r, b| r.lambda_e *= b) <= p0 + 1e-15);
        prop_assert!(with(|r, b| r.lambda_s *= b) >= p0 - 1e-15);
        prop_assert!(with(|r, b| r.lambda_g *= b) >= p0 - 1e-15);
    }

    #[test]
    fn single_rc_placements_mirror_each_other(e in rate(), stage in rate()) {
        let r = Rates::new(e, stage, stage, 0.0);
        let at_source = optimal_cluster_size(120, r, DcRc, DcNoRc).unwrap();
        let at_cluster = optimal_cluster_size(120, r, DcNoRc, DcRc).unwrap();
        prop_assert!((at_source.p_star.value() - at_cluster.p_star.value()).abs() <= 1e-12);
        // the profiles are mirror images under k <-> n/k
        for &(k, pk) in &at_source.profile {
            let mirror = at_cluster.profile.iter().find(|(k2, _)| *k2 == 120 / k).unwrap().1;
            prop_assert!((pk.value() - mirror.value()).abs() <= 1e-12);
        }
    }
}

#[test]
fn zero_gossip_collapse_is_exact() {
    for n in 1..=64 {
        for (e, s) in [(0.1, 1.0), (1.0, 1.0), (2.0, 0.5), (1.0, 10.0)] {
            let f = |pol| flat_freshness(pol, s, 0.0, e, n).unwrap().value();
            assert_eq!(f(FcAllRc), f(DcRc));
            assert_eq!(f(FcSrcRc), f(DcRc));
            assert_eq!(f(FcNoRc), f(DcNoRc));
        }
    }
}

#[test]
fn zero_source_rate_is_never_fresh() {
    for pol in GossipPolicy::ALL {
        assert_eq!(flat_freshness(pol, 0.0, 5.0, 1.0, 7).unwrap().value(), 0.0);
    }
    assert_eq!(analytic::freshness_dc_rc(0.0, 1.0, 7).unwrap().value(), 0.0);
}
