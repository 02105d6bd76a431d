//! Event-driven Monte Carlo of flat and clustered gossip networks.
//!
//! The engine tracks integer versions. The source bumps its version at every
//! self-update; a delivery copies the sender's version to the receiver if it
//! is newer. A node is fresh while its version equals the source's.
//!
//! After every event all intensities are recomputed and a single exponential
//! holding time is drawn for their sum. Rate-changing policies alter rates at
//! almost every event, so no future-event list is kept. Two events never share
//! a time stamp in continuous time; exactly one is applied per draw.
//!
//! In clustered mode a stale clusterhead still relays its old version to the
//! nodes of its cluster that lack it. Those relays never make a node fresh.
//! Once the clusterhead becomes fresh every node of its cluster lacks the new
//! version, so rate-changing targeting restarts from zero fresh nodes.

mod estimate;

pub use estimate::{
    decomposition_check, estimate_freshness_cycles, estimate_freshness_time,
    estimate_freshness_time_batches, DecompositionReport, Estimator, FreshnessEstimate,
    DEFAULT_BATCHES,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::Result;
use crate::model::{per_stale_rate, GossipPolicy, NetworkSpec, Shape};

/// RNG for cycle `index` of a run seeded with `seed`. Each cycle owns its own
/// ChaCha stream, so results do not depend on how cycles are scheduled.
pub fn cycle_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub source_version: u64,
    /// Clusterhead versions; empty for flat networks.
    pub head_versions: Vec<u64>,
    pub node_versions: Vec<u64>,
    pub clock: f64,
    /// Total time each node has spent fresh, over completed cycles.
    pub fresh_time_accum: Vec<f64>,
}

/// One renewal cycle: from just after a source self-update to the next one.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleOutcome {
    pub updated: Vec<bool>,
    /// Time each node spent fresh; zero unless `updated`.
    pub fresh_duration: Vec<f64>,
    pub cycle_length: f64,
    /// Clock value at the start of the cycle.
    pub start: f64,
}

#[derive(Debug, Clone)]
struct Group {
    /// `None`: fed by the source, which is always fresh.
    head: Option<usize>,
    start: usize,
    len: usize,
    policy: GossipPolicy,
    source_rate: f64,
    fresh: usize,
}

#[derive(Debug, Clone, Copy)]
enum Event {
    SelfUpdate,
    HeadDelivery,
    NodeDelivery(usize),
    Relay(usize),
}

/// A running trajectory. Cycles can be run back to back on one instance.
#[derive(Debug, Clone)]
pub struct Simulator {
    lambda_e: f64,
    lambda_g: f64,
    head_policy: GossipPolicy,
    head_rate: f64,
    fresh_heads: usize,
    groups: Vec<Group>,
    fresh_since: Vec<f64>,
    state: SimState,
    events: Vec<(Event, f64)>,
}

impl Simulator {
    /// Starts just after a source self-update: version 1 at the source,
    /// everything else at version 0.
    pub fn new(spec: &NetworkSpec) -> Result<Self> {
        spec.ensure_valid()?;
        let r = spec.rates;
        let (groups, heads, head_policy) = match spec.shape {
            Shape::Flat { n, policy, source } => (
                vec![Group {
                    head: None,
                    start: 0,
                    len: n,
                    policy,
                    source_rate: r.source_rate(source),
                    fresh: 0,
                }],
                0,
                GossipPolicy::DcNoRc,
            ),
            Shape::Clustered {
                k,
                m,
                source_policy,
                cluster_policy,
                ..
            } => (
                (0..m)
                    .map(|c| Group {
                        head: Some(c),
                        start: c * k,
                        len: k,
                        policy: cluster_policy,
                        source_rate: r.lambda_c,
                        fresh: 0,
                    })
                    .collect(),
                m,
                source_policy,
            ),
        };
        let n = spec.node_count();
        Ok(Simulator {
            lambda_e: r.lambda_e,
            lambda_g: r.lambda_g,
            head_policy,
            head_rate: r.lambda_s,
            fresh_heads: 0,
            events: Vec::with_capacity(groups.len() + 2),
            groups,
            fresh_since: vec![f64::NAN; n],
            state: SimState {
                source_version: 1,
                head_versions: vec![0; heads],
                node_versions: vec![0; n],
                clock: 0.0,
                fresh_time_accum: vec![0.0; n],
            },
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    fn head_is_fresh(&self, head: Option<usize>) -> bool {
        head.is_none_or(|h| self.state.head_versions[h] == self.state.source_version)
    }

    fn collect_events(&mut self) -> f64 {
        self.events.clear();
        self.events.push((Event::SelfUpdate, self.lambda_e));
        let heads = self.state.head_versions.len();
        if heads > 0 && self.fresh_heads < heads {
            let u = per_stale_rate(self.head_policy, self.head_rate, 0.0, heads, self.fresh_heads)
                .expect("validated spec");
            self.events
                .push((Event::HeadDelivery, (heads - self.fresh_heads) as f64 * u));
        }
        for (g, group) in self.groups.iter().enumerate() {
            if self.head_is_fresh(group.head) {
                if group.fresh < group.len {
                    let u = per_stale_rate(
                        group.policy,
                        group.source_rate,
                        self.lambda_g,
                        group.len,
                        group.fresh,
                    )
                    .expect("validated spec");
                    self.events
                        .push((Event::NodeDelivery(g), (group.len - group.fresh) as f64 * u));
                }
            } else if let Some(h) = group.head {
                let hv = self.state.head_versions[h];
                let nodes = &self.state.node_versions[group.start..group.start + group.len];
                let lacking = nodes.iter().filter(|&&v| v < hv).count();
                if lacking > 0 {
                    let u = per_stale_rate(
                        group.policy.source_stage(),
                        group.source_rate,
                        0.0,
                        group.len,
                        group.len - lacking,
                    )
                    .expect("validated spec");
                    self.events.push((Event::Relay(g), lacking as f64 * u));
                }
            }
        }
        self.events.iter().map(|&(_, r)| r).sum()
    }

    fn pick_event<R: Rng + ?Sized>(&self, total: f64, rng: &mut R) -> Event {
        let mut x = rng.random::<f64>() * total;
        for &(e, r) in &self.events {
            if x < r {
                return e;
            }
            x -= r;
        }
        // rounding left x just past the last bucket
        self.events
            .iter()
            .rev()
            .find(|&&(_, r)| r > 0.0)
            .map(|&(e, _)| e)
            .unwrap_or(Event::SelfUpdate)
    }

    /// Index (within `versions`) of the `nth` entry below `version`.
    fn nth_below(versions: &[u64], version: u64, nth: usize) -> usize {
        versions
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v < version)
            .nth(nth)
            .map(|(i, _)| i)
            .expect("count of entries below version was computed from the same slice")
    }

    fn apply<R: Rng + ?Sized>(&mut self, event: Event, rng: &mut R) {
        let sv = self.state.source_version;
        match event {
            Event::SelfUpdate => unreachable!("handled by run_cycle"),
            Event::HeadDelivery => {
                let stale = self.state.head_versions.len() - self.fresh_heads;
                let h = Self::nth_below(&self.state.head_versions, sv, rng.random_range(0..stale));
                self.state.head_versions[h] = sv;
                self.fresh_heads += 1;
            }
            Event::NodeDelivery(g) => {
                let group = &mut self.groups[g];
                let stale = group.len - group.fresh;
                let slice = &self.state.node_versions[group.start..group.start + group.len];
                let i = group.start + Self::nth_below(slice, sv, rng.random_range(0..stale));
                self.state.node_versions[i] = sv;
                self.fresh_since[i] = self.state.clock;
                group.fresh += 1;
            }
            Event::Relay(g) => {
                let group = &self.groups[g];
                let hv = self.state.head_versions[group.head.expect("relays come from heads")];
                let slice = &self.state.node_versions[group.start..group.start + group.len];
                let lacking = slice.iter().filter(|&&v| v < hv).count();
                let i = group.start + Self::nth_below(slice, hv, rng.random_range(0..lacking));
                self.state.node_versions[i] = hv;
            }
        }
    }

    /// Runs until the next source self-update and returns what happened.
    pub fn run_cycle<R: Rng + ?Sized>(&mut self, rng: &mut R) -> CycleOutcome {
        let start = self.state.clock;
        loop {
            let total = self.collect_events();
            let wait: f64 = rng.sample(Exp1);
            self.state.clock += wait / total;
            match self.pick_event(total, rng) {
                Event::SelfUpdate => break,
                e => self.apply(e, rng),
            }
        }
        let end = self.state.clock;
        let n = self.state.node_versions.len();
        let mut outcome = CycleOutcome {
            updated: vec![false; n],
            fresh_duration: vec![0.0; n],
            cycle_length: end - start,
            start,
        };
        for i in 0..n {
            if self.state.node_versions[i] == self.state.source_version {
                let d = end - self.fresh_since[i];
                outcome.updated[i] = true;
                outcome.fresh_duration[i] = d;
                self.state.fresh_time_accum[i] += d;
            }
            self.fresh_since[i] = f64::NAN;
        }
        self.state.source_version += 1;
        self.fresh_heads = 0;
        for g in &mut self.groups {
            g.fresh = 0;
        }
        outcome
    }
}

/// Simulates one renewal cycle of `spec` from an all-stale start.
pub fn simulate_cycle<R: Rng + ?Sized>(spec: &NetworkSpec, rng: &mut R) -> Result<CycleOutcome> {
    Ok(Simulator::new(spec)?.run_cycle(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Rates;
    use GossipPolicy::*;

    #[test]
    fn outcome_invariants_hold() {
        let rates = Rates::new(0.4, 2.0, 1.5, 1.0);
        let spec = NetworkSpec::clustered(12, 4, DcRc, FcAllRc, rates);
        let mut sim = Simulator::new(&spec).unwrap();
        for c in 0..500 {
            let before = sim.state().clone();
            let out = sim.run_cycle(&mut cycle_rng(9, c));
            let after = sim.state();
            assert_eq!(after.source_version, before.source_version + 1);
            assert!(out.cycle_length > 0.0);
            for i in 0..12 {
                assert_eq!(out.updated[i], out.fresh_duration[i] > 0.0);
                assert!(out.fresh_duration[i] <= out.cycle_length);
                assert!(after.fresh_time_accum[i] >= before.fresh_time_accum[i]);
                let head = after.head_versions[i / 4];
                assert!(after.node_versions[i] <= head);
                assert!(head <= after.source_version);
            }
        }
    }

    #[test]
    fn stale_heads_never_refresh_nodes() {
        // no source to head deliveries: heads never become fresh
        let spec = NetworkSpec::clustered(6, 3, DcNoRc, FcAllRc, Rates::new(1.0, 0.0, 5.0, 5.0));
        let mut sim = Simulator::new(&spec).unwrap();
        for c in 0..200 {
            let out = sim.run_cycle(&mut cycle_rng(1, c));
            assert!(out.updated.iter().all(|u| !u));
        }
    }

    #[test]
    fn stale_heads_relay_old_versions() {
        // a node holding a version it never held while fresh got it by relay
        let spec = NetworkSpec::clustered(4, 2, DcRc, DcNoRc, Rates::new(1.0, 3.0, 0.5, 0.0));
        let mut sim = Simulator::new(&spec).unwrap();
        let mut fresh_with = vec![vec![0u64]; 4];
        let mut relayed = 0;
        for c in 0..300 {
            let version = sim.state().source_version;
            let out = sim.run_cycle(&mut cycle_rng(2, c));
            for (i, held) in fresh_with.iter_mut().enumerate() {
                if out.updated[i] {
                    held.push(version);
                }
                if !held.contains(&sim.state().node_versions[i]) {
                    relayed += 1;
                }
            }
        }
        assert!(relayed > 0);
    }

    #[test]
    fn cycles_are_deterministic_per_stream() {
        let spec = NetworkSpec::flat(5, FcSrcRc, Rates::new(1.0, 1.0, 0.0, 1.0));
        let a = simulate_cycle(&spec, &mut cycle_rng(42, 7)).unwrap();
        let b = simulate_cycle(&spec, &mut cycle_rng(42, 7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let spec = NetworkSpec::flat(0, DcRc, Rates::default());
        assert!(Simulator::new(&spec).is_err());
    }
}
