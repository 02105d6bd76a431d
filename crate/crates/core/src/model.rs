//! Domain types shared by the analytic and simulation paths.
//!
//! Every gossip policy is described by one function, [`per_stale_rate`]: the
//! intensity at which each stale receiver gets the current version while `j`
//! receivers are already fresh. Node symmetry makes that single number enough
//! to drive the exact recursion, the closed forms and the event engine.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four Poisson intensities of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    /// Source self-update intensity. Ends a renewal cycle.
    pub lambda_e: f64,
    /// Total source to receiver (or clusterhead) intensity.
    pub lambda_s: f64,
    /// Total intensity of each clusterhead towards its own nodes.
    pub lambda_c: f64,
    /// Total gossip intensity of each fresh node.
    pub lambda_g: f64,
}

impl Rates {
    pub fn new(lambda_e: f64, lambda_s: f64, lambda_c: f64, lambda_g: f64) -> Self {
        Rates {
            lambda_e,
            lambda_s,
            lambda_c,
            lambda_g,
        }
    }

    /// Multiplies every intensity by `c`; freshness values are invariant under this.
    pub fn scaled(&self, c: f64) -> Self {
        Rates::new(
            self.lambda_e * c,
            self.lambda_s * c,
            self.lambda_c * c,
            self.lambda_g * c,
        )
    }

    pub fn source_rate(&self, role: SourceRole) -> f64 {
        match role {
            SourceRole::Source => self.lambda_s,
            SourceRole::ClusterHead => self.lambda_c,
        }
    }

    fn violations(&self, out: &mut Vec<Violation>) {
        for (name, v) in [
            ("lambda_e", self.lambda_e),
            ("lambda_s", self.lambda_s),
            ("lambda_c", self.lambda_c),
            ("lambda_g", self.lambda_g),
        ] {
            if !v.is_finite() || v < 0.0 {
                out.push(Violation::new(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if self.lambda_e.is_finite() && self.lambda_e <= 0.0 {
            out.push(Violation::new(
                "lambda_e",
                "must be > 0 so that renewal cycles terminate",
            ));
        }
    }
}

impl Default for Rates {
    fn default() -> Self {
        Rates::new(1.0, 1.0, 1.0, 0.0)
    }
}

/// Gossip variants. `Dc*` receivers never talk to each other; `Fc*`
/// receivers gossip to every other receiver in their group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GossipPolicy {
    #[serde(rename = "DC_noRC")]
    DcNoRc,
    #[serde(rename = "DC_RC")]
    DcRc,
    #[serde(rename = "FC_noRC")]
    FcNoRc,
    /// Rate changing at the source only; gossip keeps the even split.
    #[serde(rename = "FC_sRC")]
    FcSrcRc,
    /// Rate changing at the source and at every gossiping node.
    #[serde(rename = "FC_allRC")]
    FcAllRc,
}

impl GossipPolicy {
    pub const ALL: [GossipPolicy; 5] = [
        GossipPolicy::DcNoRc,
        GossipPolicy::DcRc,
        GossipPolicy::FcNoRc,
        GossipPolicy::FcSrcRc,
        GossipPolicy::FcAllRc,
    ];

    /// Policies allowed between the source and the clusterheads.
    pub const SOURCE_STAGE: [GossipPolicy; 2] = [GossipPolicy::DcNoRc, GossipPolicy::DcRc];

    pub fn name(self) -> &'static str {
        match self {
            GossipPolicy::DcNoRc => "DC_noRC",
            GossipPolicy::DcRc => "DC_RC",
            GossipPolicy::FcNoRc => "FC_noRC",
            GossipPolicy::FcSrcRc => "FC_sRC",
            GossipPolicy::FcAllRc => "FC_allRC",
        }
    }

    pub fn is_fully_connected(self) -> bool {
        matches!(
            self,
            GossipPolicy::FcNoRc | GossipPolicy::FcSrcRc | GossipPolicy::FcAllRc
        )
    }

    /// Whether the feeding source concentrates its rate on stale receivers.
    pub fn source_is_rate_changing(self) -> bool {
        !matches!(self, GossipPolicy::DcNoRc | GossipPolicy::FcNoRc)
    }

    /// The DC policy with the same source-side behavior (gossip stripped).
    pub fn source_stage(self) -> GossipPolicy {
        if self.source_is_rate_changing() {
            GossipPolicy::DcRc
        } else {
            GossipPolicy::DcNoRc
        }
    }
}

impl fmt::Display for GossipPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GossipPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GossipPolicy::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::domain(format!(
                    "unknown policy {s:?}; expected one of DC_noRC, DC_RC, FC_noRC, FC_sRC, FC_allRC"
                ))
            })
    }
}

/// Which intensity feeds a flat network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SourceRole {
    /// `lambda_s`: the source feeds the receivers directly.
    #[default]
    Source,
    /// `lambda_c`: a fresh clusterhead feeds its own cluster.
    ClusterHead,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Flat {
        n: usize,
        policy: GossipPolicy,
        /// Gossip always uses `lambda_g`.
        source: SourceRole,
    },
    Clustered {
        n: usize,
        k: usize,
        m: usize,
        source_policy: GossipPolicy,
        cluster_policy: GossipPolicy,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkSpec {
    pub shape: Shape,
    pub rates: Rates,
}

impl NetworkSpec {
    pub fn flat(n: usize, policy: GossipPolicy, rates: Rates) -> Self {
        NetworkSpec {
            shape: Shape::Flat {
                n,
                policy,
                source: SourceRole::Source,
            },
            rates,
        }
    }

    /// Clustered network of `n` end-nodes in clusters of `k`; `m` is `n / k`
    /// (rounded down, so a non-divisor `k` fails validation).
    pub fn clustered(
        n: usize,
        k: usize,
        source_policy: GossipPolicy,
        cluster_policy: GossipPolicy,
        rates: Rates,
    ) -> Self {
        let m = n.checked_div(k).unwrap_or(0);
        NetworkSpec {
            shape: Shape::Clustered {
                n,
                k,
                m,
                source_policy,
                cluster_policy,
            },
            rates,
        }
    }

    /// Number of end-nodes (clusterheads excluded).
    pub fn node_count(&self) -> usize {
        match self.shape {
            Shape::Flat { n, .. } | Shape::Clustered { n, .. } => n,
        }
    }

    /// Every violated invariant; empty when the spec is usable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        self.rates.violations(&mut out);
        match self.shape {
            Shape::Flat { n, .. } => {
                if n == 0 {
                    out.push(Violation::new("n", "a flat network needs at least one node"));
                }
            }
            Shape::Clustered {
                n,
                k,
                m,
                source_policy,
                ..
            } => {
                if k == 0 {
                    out.push(Violation::new("k", "cluster size must be >= 1"));
                }
                if m == 0 {
                    out.push(Violation::new("m", "cluster count must be >= 1"));
                }
                if m.checked_mul(k) != Some(n) {
                    out.push(Violation::new(
                        "m·k",
                        format!("m·k ≠ n ({m}·{k} ≠ {n})"),
                    ));
                }
                if source_policy.is_fully_connected() {
                    out.push(Violation::new(
                        "source_policy",
                        format!(
                            "CHs form a DC network; {source_policy} is not allowed between source and clusterheads"
                        ),
                    ));
                }
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(v))
        }
    }
}

/// One violated invariant of a [`NetworkSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl Violation {
    fn new(field: &'static str, message: impl Into<String>) -> Self {
        Violation {
            field,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Long-term average binary freshness of a node, a probability.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct FreshnessValue(f64);

impl FreshnessValue {
    const SLACK: f64 = 1e-12;

    /// Accepts values within rounding slack of `[0, 1]` and clamps them.
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || !(-Self::SLACK..=1.0 + Self::SLACK).contains(&p) {
            return Err(Error::domain(format!("freshness {p} outside [0, 1]")));
        }
        Ok(FreshnessValue(p.clamp(0.0, 1.0)))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<FreshnessValue> for f64 {
    fn from(v: FreshnessValue) -> f64 {
        v.0
    }
}

impl fmt::Display for FreshnessValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Intensity delivered to each stale receiver while `j` of the `n` receivers
/// are fresh.
///
/// `total_source` is split over all receivers, or over the stale ones under
/// rate changing. Each fresh receiver gossips with total `total_gossip`,
/// split over its `n - 1` neighbors, or over the stale receivers under
/// `FC_allRC`. With `n = 1` there are no neighbors and gossip contributes
/// nothing.
pub fn per_stale_rate(
    policy: GossipPolicy,
    total_source: f64,
    total_gossip: f64,
    n: usize,
    j: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("per_stale_rate: n must be >= 1"));
    }
    if j >= n {
        return Err(Error::domain(format!(
            "per_stale_rate: j = {j} fresh leaves no stale node among n = {n}"
        )));
    }
    for (name, v) in [("source", total_source), ("gossip", total_gossip)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::domain(format!(
                "per_stale_rate: {name} intensity must be finite and >= 0, got {v}"
            )));
        }
    }
    let nf = n as f64;
    let jf = j as f64;
    let stale = (n - j) as f64;
    let even_gossip = if n > 1 {
        jf * total_gossip / (nf - 1.0)
    } else {
        0.0
    };
    let rate = match policy {
        GossipPolicy::DcNoRc => total_source / nf,
        GossipPolicy::DcRc => total_source / stale,
        GossipPolicy::FcNoRc => total_source / nf + even_gossip,
        GossipPolicy::FcSrcRc => total_source / stale + even_gossip,
        GossipPolicy::FcAllRc => (total_source + jf * total_gossip) / stale,
    };
    Ok(rate)
}
