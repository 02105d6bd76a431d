//! Long-term average binary freshness of gossip networks.
//!
//! A source refreshes its information as a Poisson process; receivers count as
//! fresh while they hold the source's current version. Freshness is computed
//! for flat networks (one tier of receivers) and clustered networks (source to
//! clusterheads to end-nodes), under traditional gossip and rate-changing
//! gossip, where senders redirect their whole rate to receivers that are still
//! stale.
//!
//! - [`model`]: rates, policies, network shapes and the per-stale-node rate rule.
//! - [`analytic`]: closed forms, the exact renewal recursion, clustered
//!   composition and the optimal cluster size search.
//! - [`simulator`]: event-driven Monte Carlo with cycle and time-average
//!   estimators.
//! - [`experiments`]: config-driven sweeps, CSV and plot output, the self test.

pub mod analytic;
pub mod error;
pub mod experiments;
pub mod model;
pub mod simulator;

pub use error::{Error, Result};
pub use model::{FreshnessValue, GossipPolicy, NetworkSpec, Rates, SourceRole};
