//! Browser bindings for the freshness model. Every export returns a JSON
//! string; the plain `*_json` functions carry the logic and are tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use gossip_freshness::analytic::{flat_freshness, optimal_cluster_size};
use gossip_freshness::experiments::presets::{DC_PAIRS, FC_PAIRS};
use gossip_freshness::simulator::estimate_freshness_cycles;
use gossip_freshness::{GossipPolicy, NetworkSpec, Rates};

/// Largest n the page may request, to keep the UI responsive.
pub const MAX_NODES: usize = 1000;
pub const MAX_CYCLES: u64 = 1_000_000;

#[derive(Serialize)]
struct Curve {
    policy: String,
    n: Vec<usize>,
    p: Vec<f64>,
}

#[derive(Serialize)]
struct Profile {
    source: String,
    cluster: String,
    k: Vec<usize>,
    p: Vec<f64>,
    k_star: usize,
    p_star: f64,
}

#[derive(Serialize)]
struct SimPoint {
    policy: String,
    n: usize,
    analytic: f64,
    estimate: f64,
    ci95: (f64, f64),
    cycles: u64,
}

fn check_n(n: usize) -> Result<(), String> {
    if (1..=MAX_NODES).contains(&n) {
        Ok(())
    } else {
        Err(format!("n must be in 1..={MAX_NODES}, got {n}"))
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Freshness against n = 1..=max_n for every flat policy.
pub fn flat_curves_json(lambda_e: f64, lambda_s: f64, lambda_g: f64, max_n: usize) -> Result<String, String> {
    check_n(max_n)?;
    let curves = GossipPolicy::ALL
        .into_iter()
        .map(|policy| {
            let p = (1..=max_n)
                .map(|n| flat_freshness(policy, lambda_s, lambda_g, lambda_e, n).map(|v| v.value()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            Ok(Curve { policy: policy.to_string(), n: (1..=max_n).collect(), p })
        })
        .collect::<Result<Vec<_>, String>>()?;
    to_json(&curves)
}

/// Freshness against cluster size for the seven clustered configurations.
pub fn cluster_profiles_json(
    n: usize,
    lambda_e: f64,
    lambda_s: f64,
    lambda_c: f64,
    lambda_g: f64,
) -> Result<String, String> {
    check_n(n)?;
    let rates = Rates::new(lambda_e, lambda_s, lambda_c, lambda_g);
    let profiles = DC_PAIRS
        .iter()
        .chain(&FC_PAIRS)
        .map(|&[source, cluster]| {
            let best = optimal_cluster_size(n, rates, source, cluster).map_err(|e| e.to_string())?;
            Ok(Profile {
                source: source.to_string(),
                cluster: cluster.to_string(),
                k: best.profile.iter().map(|(k, _)| *k).collect(),
                p: best.profile.iter().map(|(_, p)| p.value()).collect(),
                k_star: best.k_star,
                p_star: best.p_star.value(),
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    to_json(&profiles)
}

/// Monte Carlo estimate for one flat network next to its exact value.
pub fn simulate_flat_json(
    policy: &str,
    n: usize,
    lambda_e: f64,
    lambda_s: f64,
    lambda_g: f64,
    cycles: u64,
    seed: u64,
) -> Result<String, String> {
    check_n(n)?;
    if cycles == 0 || cycles > MAX_CYCLES {
        return Err(format!("cycles must be in 1..={MAX_CYCLES}"));
    }
    let policy: GossipPolicy = policy.parse().map_err(|e: gossip_freshness::Error| e.to_string())?;
    let spec = NetworkSpec::flat(n, policy, Rates::new(lambda_e, lambda_s, 0.0, lambda_g));
    let exact = gossip_freshness::analytic::freshness(&spec).map_err(|e| e.to_string())?;
    let est = estimate_freshness_cycles(&spec, cycles, seed).map_err(|e| e.to_string())?;
    to_json(&SimPoint {
        policy: policy.to_string(),
        n,
        analytic: exact.value(),
        estimate: est.p_hat,
        ci95: est.ci95,
        cycles,
    })
}

#[wasm_bindgen]
pub fn flat_curves(lambda_e: f64, lambda_s: f64, lambda_g: f64, max_n: usize) -> Result<String, JsError> {
    flat_curves_json(lambda_e, lambda_s, lambda_g, max_n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cluster_profiles(
    n: usize,
    lambda_e: f64,
    lambda_s: f64,
    lambda_c: f64,
    lambda_g: f64,
) -> Result<String, JsError> {
    cluster_profiles_json(n, lambda_e, lambda_s, lambda_c, lambda_g).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn simulate_flat(
    policy: &str,
    n: usize,
    lambda_e: f64,
    lambda_s: f64,
    lambda_g: f64,
    cycles: u32,
    seed: u32,
) -> Result<String, JsError> {
    simulate_flat_json(policy, n, lambda_e, lambda_s, lambda_g, cycles.into(), seed.into())
        .map_err(|e| JsError::new(&e))
}
