use serde::Serialize;

use super::{cycle_rng, Simulator};
use crate::analytic::{clustered_freshness, ClusteredBreakdown};
use crate::error::{Error, Result};
use crate::model::{NetworkSpec, Shape};

pub const DEFAULT_BATCHES: usize = 50;

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Fraction of renewal cycles in which a node was updated.
    Cycle,
    /// Fraction of a long horizon a node spent fresh.
    TimeAverage,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreshnessEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    /// Cycle count for [`Estimator::Cycle`], horizon length otherwise.
    pub samples: f64,
    pub seed: u64,
    pub estimator: Estimator,
    /// Per-node estimates, for symmetry checks.
    pub per_node: Vec<f64>,
}

impl FreshnessEstimate {
    fn new(
        p_hat: f64,
        stderr: f64,
        samples: f64,
        seed: u64,
        estimator: Estimator,
        per_node: Vec<f64>,
    ) -> Self {
        let half = Z95 * stderr;
        FreshnessEstimate {
            p_hat,
            stderr,
            ci95: ((p_hat - half).max(0.0), (p_hat + half).min(1.0)),
            samples,
            seed,
            estimator,
            per_node,
        }
    }

    /// `(p_hat - target) / stderr`; 0 when both coincide with no spread.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = self.p_hat - target;
        if self.stderr > 0.0 {
            d / self.stderr
        } else if d == 0.0 {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    }
}

/// Renewal-cycle estimator: averages the per-cycle update indicator over all
/// nodes and cycles.
///
/// Indicators of different nodes in the same cycle are correlated, so the
/// standard error uses `num_cycles` alone as the sample size. Averaging over
/// nodes only lowers the variance, making the interval conservative.
pub fn estimate_freshness_cycles(
    spec: &NetworkSpec,
    num_cycles: u64,
    seed: u64,
) -> Result<FreshnessEstimate> {
    if num_cycles == 0 {
        return Err(Error::domain("num_cycles must be >= 1"));
    }
    let mut sim = Simulator::new(spec)?;
    let n = spec.node_count();
    let mut hits = vec![0u64; n];
    for c in 0..num_cycles {
        let out = sim.run_cycle(&mut cycle_rng(seed, c));
        for (h, &u) in hits.iter_mut().zip(&out.updated) {
            *h += u as u64;
        }
    }
    let cycles = num_cycles as f64;
    let total: u64 = hits.iter().sum();
    let p_hat = total as f64 / (cycles * n as f64);
    let stderr = (p_hat * (1.0 - p_hat) / cycles).sqrt();
    let per_node = hits.iter().map(|&h| h as f64 / cycles).collect();
    Ok(FreshnessEstimate::new(
        p_hat,
        stderr,
        cycles,
        seed,
        Estimator::Cycle,
        per_node,
    ))
}

pub fn estimate_freshness_time(
    spec: &NetworkSpec,
    horizon: f64,
    seed: u64,
) -> Result<FreshnessEstimate> {
    estimate_freshness_time_batches(spec, horizon, seed, DEFAULT_BATCHES)
}

/// Time-average estimator over one unbroken trajectory of length `horizon`;
/// the standard error comes from `batches` equal-length batch means.
pub fn estimate_freshness_time_batches(
    spec: &NetworkSpec,
    horizon: f64,
    seed: u64,
    batches: usize,
) -> Result<FreshnessEstimate> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::domain(format!("horizon must be finite and > 0, got {horizon}")));
    }
    if batches < 2 {
        return Err(Error::domain("batch means need at least 2 batches"));
    }
    let mut sim = Simulator::new(spec)?;
    if horizon < 100.0 / spec.rates.lambda_e {
        log::warn!(
            "horizon {horizon} spans fewer than 100 mean cycles (1/lambda_e = {})",
            1.0 / spec.rates.lambda_e
        );
    }
    let n = spec.node_count();
    let width = horizon / batches as f64;
    let mut batch_fresh = vec![0.0; batches];
    let mut node_fresh = vec![0.0; n];
    let mut c = 0;
    while sim.state().clock < horizon {
        let out = sim.run_cycle(&mut cycle_rng(seed, c));
        c += 1;
        let end = out.start + out.cycle_length;
        for (i, &d) in out.fresh_duration.iter().enumerate() {
            if d <= 0.0 {
                continue;
            }
            let (a, b) = (end - d, end.min(horizon));
            if a >= b {
                continue;
            }
            node_fresh[i] += b - a;
            spread_over_batches(&mut batch_fresh, width, a, b);
        }
    }
    let means: Vec<f64> = batch_fresh.iter().map(|f| f / (width * n as f64)).collect();
    let p_hat = node_fresh.iter().sum::<f64>() / (horizon * n as f64);
    let mean_of_means = means.iter().sum::<f64>() / batches as f64;
    let var = means
        .iter()
        .map(|m| (m - mean_of_means).powi(2))
        .sum::<f64>()
        / (batches - 1) as f64;
    let stderr = (var / batches as f64).sqrt();
    let per_node = node_fresh.iter().map(|f| f / horizon).collect();
    Ok(FreshnessEstimate::new(
        p_hat,
        stderr,
        horizon,
        seed,
        Estimator::TimeAverage,
        per_node,
    ))
}

fn spread_over_batches(acc: &mut [f64], width: f64, a: f64, b: f64) {
    let last = acc.len() - 1;
    let first = ((a / width) as usize).min(last);
    let final_ = ((b / width) as usize).min(last);
    for (idx, slot) in acc.iter_mut().enumerate().take(final_ + 1).skip(first) {
        let lo = a.max(idx as f64 * width);
        let hi = if idx == last { b } else { b.min((idx + 1) as f64 * width) };
        if hi > lo {
            *slot += hi - lo;
        }
    }
}

/// Full two-level simulation against the analytic two-stage product.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub simulated: FreshnessEstimate,
    pub analytic: ClusteredBreakdown,
    /// `(simulated - analytic) / stderr`.
    pub z: f64,
}

pub fn decomposition_check(
    spec: &NetworkSpec,
    num_cycles: u64,
    seed: u64,
) -> Result<DecompositionReport> {
    if !matches!(spec.shape, Shape::Clustered { .. }) {
        return Err(Error::domain("decomposition_check needs a clustered network"));
    }
    let (_, analytic) = clustered_freshness(spec)?;
    let simulated = estimate_freshness_cycles(spec, num_cycles, seed)?;
    let z = simulated.z_score(analytic.p);
    Ok(DecompositionReport {
        simulated,
        analytic,
        z,
    })
}
