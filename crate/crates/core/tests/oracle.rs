//! Exact absorbing-chain oracle over subsets of fresh nodes.
//!
//! Rates are built link by link (source to each stale node, each fresh node
//! to each stale node) without going through `per_stale_rate` or any symmetry
//! reduction, so agreement with the library checks both the rate rule and the
//! recursion. The two-level chain tracks clusterheads and nodes jointly and so
//! checks the two-stage product exactly.

use gossip_freshness::analytic::{self, clustered_freshness, flat_freshness};
use gossip_freshness::model::{per_stale_rate, Shape};
use gossip_freshness::{GossipPolicy, GossipPolicy::*, NetworkSpec, Rates};

/// Intensity into stale node `i` of a group with fresh set `fresh` (bitmask).
fn link_rate(policy: GossipPolicy, source: f64, gossip: f64, n: usize, fresh: u64, i: usize) -> f64 {
    debug_assert!(fresh & (1 << i) == 0);
    let stale = n - fresh.count_ones() as usize;
    let from_source = match policy {
        DcNoRc | FcNoRc => source / n as f64,
        DcRc | FcSrcRc | FcAllRc => source / stale as f64,
    };
    let mut total = from_source;
    if policy.is_fully_connected() {
        for _sender in (0..n).filter(|f| fresh & (1 << f) != 0) {
            total += match policy {
                FcNoRc | FcSrcRc => gossip / (n - 1) as f64,
                FcAllRc => gossip / stale as f64,
                _ => unreachable!(),
            };
        }
    }
    total
}

/// Probability that node 0 becomes fresh before the source self-updates.
fn flat_oracle(policy: GossipPolicy, source: f64, gossip: f64, lambda_e: f64, n: usize) -> f64 {
    let full = (1u64 << n) - 1;
    let mut memo = vec![f64::NAN; 1 << n];
    // masks with more fresh nodes are solved first; node 0 stays stale
    let mut masks: Vec<u64> = (0..=full).filter(|m| m & 1 == 0).collect();
    masks.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
    for mask in masks {
        let mut out = lambda_e;
        let mut win = 0.0;
        for i in (0..n).filter(|i| mask & (1 << i) == 0) {
            let r = link_rate(policy, source, gossip, n, mask, i);
            out += r;
            win += if i == 0 { r } else { r * memo[(mask | (1 << i)) as usize] };
        }
        memo[mask as usize] = win / out;
    }
    memo[0]
}

/// Two-level chain: state is (fresh heads, fresh nodes). Returns the
/// probability that node 0 (in cluster 0) becomes fresh within the cycle.
fn clustered_oracle(spec: &NetworkSpec) -> f64 {
    let Shape::Clustered { k, m, source_policy, cluster_policy, .. } = spec.shape else {
        panic!("clustered only")
    };
    let r = spec.rates;
    let total_nodes = m * k;
    let bits = m + total_nodes;
    let mut memo = vec![f64::NAN; 1 << bits];
    let mut states: Vec<u64> = (0..(1u64 << bits))
        .filter(|s| {
            let heads = s & ((1 << m) - 1);
            let nodes = s >> m;
            // node 0 stale, and no node fresh under a stale head
            nodes & 1 == 0
                && (0..total_nodes).all(|i| nodes & (1 << i) == 0 || heads & (1 << (i / k)) != 0)
        })
        .collect();
    states.sort_by_key(|s| std::cmp::Reverse(s.count_ones()));
    for s in states {
        let heads = s & ((1 << m) - 1);
        let nodes = s >> m;
        let mut out = r.lambda_e;
        let mut win = 0.0;
        for h in (0..m).filter(|h| heads & (1 << h) == 0) {
            let rate = link_rate(source_policy, r.lambda_s, 0.0, m, heads, h);
            out += rate;
            win += rate * memo[(s | (1 << h)) as usize];
        }
        for c in (0..m).filter(|c| heads & (1 << c) != 0) {
            let group = (nodes >> (c * k)) & ((1 << k) - 1);
            for i in (0..k).filter(|i| group & (1 << i) == 0) {
                let rate = link_rate(cluster_policy, r.lambda_c, r.lambda_g, k, group, i);
                let node = c * k + i;
                out += rate;
                win += if node == 0 {
                    rate
                } else {
                    rate * memo[(s | (1 << (m + node))) as usize]
                };
            }
        }
        memo[s as usize] = win / out;
    }
    memo[0]
}

const RATE_POINTS: [(f64, f64, f64); 5] = [
    (1.0, 1.0, 1.0),
    (0.1, 1.0, 0.5),
    (2.0, 0.5, 10.0),
    (0.5, 10.0, 0.1),
    (1.0, 3.0, 0.0),
];

#[test]
fn recursion_matches_subset_chain() {
    for policy in GossipPolicy::ALL {
        for n in 1..=9 {
            for (e, s, g) in RATE_POINTS {
                let oracle = flat_oracle(policy, s, g, e, n);
                let rec = flat_freshness(policy, s, g, e, n).unwrap().value();
                assert!(
                    (oracle - rec).abs() <= 1e-12,
                    "{policy} n={n} e={e} s={s} g={g}: oracle {oracle} vs recursion {rec}"
                );
            }
        }
    }
}

#[test]
fn per_stale_rate_matches_link_sum() {
    for policy in GossipPolicy::ALL {
        for n in 1..=7usize {
            for fresh in 0..n {
                let mask = (1u64 << fresh) - 1;
                let by_links = link_rate(policy, 1.3, 0.7, n, mask, n - 1);
                let rule = per_stale_rate(policy, 1.3, 0.7, n, fresh).unwrap();
                assert!((by_links - rule).abs() < 1e-14, "{policy} n={n} j={fresh}");
            }
        }
    }
    // the worked example: two nodes, one fresh, all rates one
    assert_eq!(link_rate(FcAllRc, 1.0, 1.0, 2, 0b01, 1), 2.0);
}

#[test]
fn oracle_reproduces_hand_values() {
    let close = |a: f64, b: f64| assert!((a - b).abs() < 1e-14, "{a} vs {b}");
    close(flat_oracle(DcRc, 1.0, 0.0, 1.0, 3), 7.0 / 24.0);
    close(flat_oracle(FcAllRc, 1.0, 1.0, 1.0, 2), 5.0 / 12.0);
    close(flat_oracle(FcAllRc, 1.0, 1.0, 1.0, 3), 13.0 / 36.0);
    close(flat_oracle(FcSrcRc, 1.0, 1.0, 1.0, 3), 19.0 / 54.0);
    close(flat_oracle(FcNoRc, 1.0, 1.0, 1.0, 3), 111.0 / 336.0);
    close(flat_oracle(DcNoRc, 1.0, 0.0, 0.1, 10), 0.5);
}

#[test]
fn two_level_chain_confirms_stage_product() {
    let rates = [Rates::new(1.0, 1.0, 1.0, 1.0), Rates::new(0.5, 1.5, 2.0, 1.0), Rates::new(2.0, 5.0, 0.3, 4.0)];
    for (m, k) in [(1, 3), (2, 2), (2, 3), (3, 2), (3, 4)] {
        for sp in GossipPolicy::SOURCE_STAGE {
            for cp in GossipPolicy::ALL {
                for r in rates {
                    let spec = NetworkSpec::clustered(m * k, k, sp, cp, r);
                    let exact = clustered_oracle(&spec);
                    let (p, b) = clustered_freshness(&spec).unwrap();
                    assert!(
                        (exact - p.value()).abs() <= 1e-12,
                        "({sp},{cp}) m={m} k={k} {r:?}: chain {exact} vs product {}",
                        b.p
                    );
                    if let Some(cf) = analytic::clustered_closed_form(&spec).unwrap() {
                        assert!((exact - cf.value()).abs() <= 1e-12);
                    }
                }
            }
        }
    }
}
