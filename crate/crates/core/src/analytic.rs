//! Exact freshness values.
//!
//! Freshness equals the probability that a node receives the current version
//! before the source updates again: cycles between source self-updates are
//! i.i.d. exponential and, by memorylessness, a node updated mid-cycle stays
//! fresh for an exponential remainder with the same mean as the cycle.
//!
//! Two independent routes are provided. The closed forms evaluate the known
//! formulas for `DC_noRC`, `DC_RC`, `FC_allRC` and the traditional FC cluster
//! factor directly. [`renewal_freshness`] walks the embedded jump chain of the
//! fresh-node count for any per-stale-node rate and serves as the exact oracle,
//! including for `FC_sRC`, which has no closed form.

use crate::error::{Error, Result};
use crate::model::{per_stale_rate, FreshnessValue, GossipPolicy, NetworkSpec, Rates, Shape};

fn check_inputs(lambda_e: f64, others: &[(&str, f64)], n: usize) -> Result<()> {
    if !(lambda_e.is_finite() && lambda_e > 0.0) {
        return Err(Error::domain(format!("lambda_e must be finite and > 0, got {lambda_e}")));
    }
    for &(name, v) in others {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::domain(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    if n == 0 {
        return Err(Error::domain("node count must be >= 1"));
    }
    Ok(())
}

/// Disconnected receivers, fixed even split: `λs / (λs + n·λe)`.
pub fn freshness_dc_norc(lambda_s: f64, lambda_e: f64, n: usize) -> Result<FreshnessValue> {
    check_inputs(lambda_e, &[("lambda_s", lambda_s)], n)?;
    FreshnessValue::new(lambda_s / (lambda_s + n as f64 * lambda_e))
}

/// Disconnected receivers, rate-changing source:
/// `λs / (n·λe) · [1 − (λs / (λs + λe))^n]`, and 0 when `λs = 0`.
pub fn freshness_dc_rc(lambda_s: f64, lambda_e: f64, n: usize) -> Result<FreshnessValue> {
    check_inputs(lambda_e, &[("lambda_s", lambda_s)], n)?;
    if lambda_s == 0.0 {
        return FreshnessValue::new(0.0);
    }
    // 1 − a^n with a = λs/(λs+λe), computed without cancellation when a ≈ 1.
    let one_minus_pow = -(n as f64 * (-lambda_e / (lambda_s + lambda_e)).ln_1p()).exp_m1();
    FreshnessValue::new(lambda_s / (n as f64 * lambda_e) * one_minus_pow)
}

/// Fully connected receivers with rate changing at the source and at every
/// gossiper: `(1/n) Σ_{k=1..n} Π_{j=1..k} (λs + (j−1)λg) / (λs + (j−1)λg + λe)`.
pub fn freshness_fc_allrc(
    lambda_s: f64,
    lambda_g: f64,
    lambda_e: f64,
    n: usize,
) -> Result<FreshnessValue> {
    check_inputs(lambda_e, &[("lambda_s", lambda_s), ("lambda_g", lambda_g)], n)?;
    let mut prod = 1.0;
    let mut sum = 0.0;
    for j in 1..=n {
        let push = lambda_s + (j - 1) as f64 * lambda_g;
        prod *= push / (push + lambda_e);
        sum += prod;
    }
    FreshnessValue::new(sum / n as f64)
}

/// Traditional fully connected group of `k` nodes fed at total rate
/// `lambda_src`, written out as the explicit sum over the capture position `r`
/// of the tagged node.
pub fn freshness_fc_norc(
    lambda_src: f64,
    lambda_g: f64,
    lambda_e: f64,
    k: usize,
) -> Result<FreshnessValue> {
    check_inputs(lambda_e, &[("lambda_src", lambda_src), ("lambda_g", lambda_g)], k)?;
    let kf = k as f64;
    let link = if k > 1 { lambda_g / (kf - 1.0) } else { 0.0 };
    let x = |i: usize| lambda_src / kf + (i - 1) as f64 * link;
    let mut total = 0.0;
    for r in 1..=k {
        let mut pass = 1.0;
        for i in 1..r {
            let xi = x(i);
            pass *= (kf - i as f64) * xi / ((kf - i as f64 + 1.0) * xi + lambda_e);
        }
        let xr = x(r);
        total += pass * xr / ((kf - r as f64 + 1.0) * xr + lambda_e);
    }
    FreshnessValue::new(total)
}

/// Outcome split of the next event while `fresh` nodes are fresh and the
/// tagged node is not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub fresh: usize,
    /// The tagged node is updated next.
    pub tagged: f64,
    /// Some other stale node is updated next.
    pub other: f64,
    /// The source self-updates first and the cycle ends.
    pub reset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecursionTrace {
    /// `q[k-1]`: probability the tagged node is captured as the k-th update,
    /// given the first k−1 updates went elsewhere.
    pub q: Vec<f64>,
    /// `tau[j-1]`: probability the j-th update goes to another stale node.
    pub tau: Vec<f64>,
    pub steps: Vec<StepOutcome>,
    pub p: f64,
}

/// Exact per-cycle update probability of a tagged node among `n` symmetric
/// receivers, where `u(j)` is the intensity towards each stale receiver while
/// `j` are fresh.
pub fn renewal_freshness<F>(u: F, n: usize, lambda_e: f64) -> Result<(FreshnessValue, RecursionTrace)>
where
    F: Fn(usize) -> f64,
{
    check_inputs(lambda_e, &[], n)?;
    let mut trace = RecursionTrace {
        q: Vec::with_capacity(n),
        tau: Vec::with_capacity(n.saturating_sub(1)),
        steps: Vec::with_capacity(n),
        p: 0.0,
    };
    let mut reach = 1.0;
    for j in 0..n {
        let rate = u(j);
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::domain(format!(
                "per-stale rate at j = {j} must be finite and >= 0, got {rate}"
            )));
        }
        let stale = (n - j) as f64;
        let total = stale * rate + lambda_e;
        let step = StepOutcome {
            fresh: j,
            tagged: rate / total,
            other: (stale - 1.0) * rate / total,
            reset: lambda_e / total,
        };
        trace.q.push(step.tagged);
        trace.p += reach * step.tagged;
        if j + 1 < n {
            trace.tau.push(step.other);
            reach *= step.other;
        }
        trace.steps.push(step);
    }
    let p = FreshnessValue::new(trace.p)?;
    trace.p = p.value();
    Ok((p, trace))
}

/// Flat freshness via the renewal recursion (works for every policy).
pub fn flat_trace(
    policy: GossipPolicy,
    source: f64,
    gossip: f64,
    lambda_e: f64,
    n: usize,
) -> Result<(FreshnessValue, RecursionTrace)> {
    check_inputs(lambda_e, &[("source rate", source), ("gossip rate", gossip)], n)?;
    renewal_freshness(
        |j| per_stale_rate(policy, source, gossip, n, j).unwrap_or(f64::NAN),
        n,
        lambda_e,
    )
}

pub fn flat_freshness(
    policy: GossipPolicy,
    source: f64,
    gossip: f64,
    lambda_e: f64,
    n: usize,
) -> Result<FreshnessValue> {
    flat_trace(policy, source, gossip, lambda_e, n).map(|(p, _)| p)
}

/// Closed-form flat freshness, `None` for `FC_sRC`. DC policies ignore `gossip`.
pub fn flat_closed_form(
    policy: GossipPolicy,
    source: f64,
    gossip: f64,
    lambda_e: f64,
    n: usize,
) -> Result<Option<FreshnessValue>> {
    Ok(Some(match policy {
        GossipPolicy::DcNoRc => freshness_dc_norc(source, lambda_e, n)?,
        GossipPolicy::DcRc => freshness_dc_rc(source, lambda_e, n)?,
        GossipPolicy::FcNoRc => freshness_fc_norc(source, gossip, lambda_e, n)?,
        GossipPolicy::FcAllRc => freshness_fc_allrc(source, gossip, lambda_e, n)?,
        GossipPolicy::FcSrcRc => return Ok(None),
    }))
}

/// The two stages of a clustered network.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ClusteredBreakdown {
    /// A clusterhead is updated within the cycle.
    pub p_ch: f64,
    /// A node is updated by its already fresh clusterhead within the cycle.
    pub p_node_given_ch: f64,
    pub p: f64,
}

struct ClusterParts {
    m: usize,
    k: usize,
    source_policy: GossipPolicy,
    cluster_policy: GossipPolicy,
}

fn cluster_parts(spec: &NetworkSpec) -> Result<ClusterParts> {
    spec.ensure_valid()?;
    match spec.shape {
        Shape::Clustered {
            k,
            m,
            source_policy,
            cluster_policy,
            ..
        } => Ok(ClusterParts {
            m,
            k,
            source_policy,
            cluster_policy,
        }),
        Shape::Flat { .. } => Err(Error::domain("expected a clustered network")),
    }
}

/// `p = p_CH · p_node|CH`, both factors from the renewal recursion.
pub fn clustered_freshness(spec: &NetworkSpec) -> Result<(FreshnessValue, ClusteredBreakdown)> {
    let c = cluster_parts(spec)?;
    let r = &spec.rates;
    let p_ch = flat_freshness(c.source_policy, r.lambda_s, 0.0, r.lambda_e, c.m)?.value();
    let p_node = flat_freshness(c.cluster_policy, r.lambda_c, r.lambda_g, r.lambda_e, c.k)?.value();
    let p = p_ch * p_node;
    Ok((
        FreshnessValue::new(p)?,
        ClusteredBreakdown {
            p_ch,
            p_node_given_ch: p_node,
            p,
        },
    ))
}

/// Closed-form clustered freshness: the product of the two stage closed forms.
/// Covers every `DC_*`/`FC_noRC`/`FC_allRC` cluster policy; `None` for `FC_sRC`.
pub fn clustered_closed_form(spec: &NetworkSpec) -> Result<Option<FreshnessValue>> {
    let c = cluster_parts(spec)?;
    let r = &spec.rates;
    let ch = flat_closed_form(c.source_policy, r.lambda_s, 0.0, r.lambda_e, c.m)?;
    let node = flat_closed_form(c.cluster_policy, r.lambda_c, r.lambda_g, r.lambda_e, c.k)?;
    match (ch, node) {
        (Some(a), Some(b)) => FreshnessValue::new(a.value() * b.value()).map(Some),
        _ => Ok(None),
    }
}

/// Exact freshness of any valid spec through the recursion.
pub fn freshness(spec: &NetworkSpec) -> Result<FreshnessValue> {
    spec.ensure_valid()?;
    match spec.shape {
        Shape::Flat { n, policy, source } => flat_freshness(
            policy,
            spec.rates.source_rate(source),
            spec.rates.lambda_g,
            spec.rates.lambda_e,
            n,
        ),
        Shape::Clustered { .. } => clustered_freshness(spec).map(|(p, _)| p),
    }
}

/// Closed-form freshness of any valid spec, where one exists.
pub fn closed_form(spec: &NetworkSpec) -> Result<Option<FreshnessValue>> {
    spec.ensure_valid()?;
    match spec.shape {
        Shape::Flat { n, policy, source } => flat_closed_form(
            policy,
            spec.rates.source_rate(source),
            spec.rates.lambda_g,
            spec.rates.lambda_e,
            n,
        ),
        Shape::Clustered { .. } => clustered_closed_form(spec),
    }
}

/// Divisors of `n` in increasing order.
pub fn divisors(n: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalClusterSize {
    pub k_star: usize,
    pub m_star: usize,
    pub p_star: FreshnessValue,
    /// `(k, p)` for every divisor `k` of `n`, sorted by `k`.
    pub profile: Vec<(usize, FreshnessValue)>,
}

/// Scans every cluster size dividing `n`; the smallest `k` wins exact ties.
pub fn optimal_cluster_size(
    n: usize,
    rates: Rates,
    source_policy: GossipPolicy,
    cluster_policy: GossipPolicy,
) -> Result<OptimalClusterSize> {
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    let profile = divisors(n)
        .into_iter()
        .map(|k| {
            let spec = NetworkSpec::clustered(n, k, source_policy, cluster_policy, rates);
            clustered_freshness(&spec).map(|(p, _)| (k, p))
        })
        .collect::<Result<Vec<_>>>()?;
    let &(k_star, p_star) = profile
        .iter()
        .fold(None, |best: Option<&(usize, FreshnessValue)>, cand| match best {
            Some(b) if b.1 >= cand.1 => Some(b),
            _ => Some(cand),
        })
        .expect("n >= 1 has at least one divisor");
    Ok(OptimalClusterSize {
        k_star,
        m_star: n / k_star,
        p_star,
        profile,
    })
}
