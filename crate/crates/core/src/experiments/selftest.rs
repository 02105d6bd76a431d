//! Acceptance checks, runnable from the CLI (`freshness selftest`) and from
//! the `acceptance` test target.

use std::time::{Duration, Instant};

use crate::analytic::{
    self, clustered_closed_form, clustered_freshness, divisors, flat_closed_form, flat_freshness,
    optimal_cluster_size,
};
use crate::error::Result;
use crate::model::{GossipPolicy, GossipPolicy::*, NetworkSpec, Rates};
use crate::simulator::{decomposition_check, estimate_freshness_cycles};

use super::config::{SimConfig, SimEstimator};
use super::presets::{self, DC_PAIRS, FC_PAIRS};
use super::runner::{run_experiment, to_csv_bytes};

/// Closed form against recursion.
pub const EXACT_TOLERANCE: f64 = 1e-12;
/// Slack for non-strict orderings between distinct floating-point evaluations.
pub const ORDER_SLACK: f64 = 1e-15;
/// Monte Carlo acceptance band in standard errors.
pub const Z_LIMIT: f64 = 4.0;
pub const MC_CYCLES: u64 = 100_000;

pub const GRID_RATES: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 10.0];
pub const GRID_MAX_N: usize = 64;

/// `(lambda_e, lambda_s, lambda_g)` points for the flat Monte Carlo check.
pub const MC_FLAT_RATES: [(f64, f64, f64); 3] = [(1.0, 1.0, 1.0), (0.5, 2.0, 1.0), (2.0, 1.0, 3.0)];
pub const MC_FLAT_N: [usize; 5] = [1, 2, 3, 5, 8];
/// `(m, k)` shapes for the decomposition check.
pub const DECOMPOSITION_SHAPES: [(usize, usize); 3] = [(2, 2), (3, 4), (4, 3)];
pub const DECOMPOSITION_RATES: Rates = Rates {
    lambda_e: 0.5,
    lambda_s: 1.5,
    lambda_c: 2.0,
    lambda_g: 1.0,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Deterministic summary (no timings).
    pub detail: String,
    pub elapsed: Duration,
    /// Wall-clock budget; exceeding it fails the criterion.
    pub budget: Option<Duration>,
}

impl CriterionResult {
    fn finish(
        id: u8,
        name: &'static str,
        start: Instant,
        budget: Option<Duration>,
        ok: bool,
        detail: String,
    ) -> Self {
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= b);
        CriterionResult {
            id,
            name,
            passed: ok && in_time,
            detail: if in_time {
                detail
            } else {
                format!("{detail}; over time budget")
            },
            elapsed,
            budget,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {}: {} ({}; {:.2?})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed
        )
    }
}

fn flat(policy: GossipPolicy, s: f64, g: f64, e: f64, n: usize) -> Result<f64> {
    flat_freshness(policy, s, g, e, n).map(|p| p.value())
}

/// Tracks the largest deviation seen and where.
#[derive(Default)]
struct Worst {
    gap: f64,
    at: String,
    checks: usize,
}

impl Worst {
    fn see(&mut self, gap: f64, at: impl FnOnce() -> String) {
        self.checks += 1;
        if gap > self.gap || gap.is_nan() {
            self.gap = gap;
            self.at = at();
        }
    }
}

/// Every closed form (three flat formulas, the traditional FC factor and the
/// seven clustered configurations) against the renewal recursion.
pub fn closed_forms_match_recursion() -> Result<CriterionResult> {
    let start = Instant::now();
    let mut worst = Worst::default();
    for n in 1..=GRID_MAX_N {
        for &e in &GRID_RATES {
            for &s in &GRID_RATES {
                for &g in &GRID_RATES {
                    for policy in [DcNoRc, DcRc, FcNoRc, FcAllRc] {
                        let cf = flat_closed_form(policy, s, g, e, n)?.expect("closed form").value();
                        let rec = flat(policy, s, g, e, n)?;
                        worst.see((cf - rec).abs(), || format!("{policy} n={n} e={e} s={s} g={g}"));
                    }
                }
            }
        }
    }
    for n in 1..=GRID_MAX_N {
        for k in divisors(n) {
            for &e in &GRID_RATES {
                for &s in &GRID_RATES {
                    for &c in &GRID_RATES {
                        for &g in &GRID_RATES {
                            let rates = Rates::new(e, s, c, g);
                            for [sp, cp] in DC_PAIRS.iter().chain(&FC_PAIRS) {
                                let spec = NetworkSpec::clustered(n, k, *sp, *cp, rates);
                                let cf = clustered_closed_form(&spec)?.expect("table row").value();
                                let rec = clustered_freshness(&spec)?.0.value();
                                worst.see((cf - rec).abs(), || format!("({sp},{cp}) n={n} k={k} {rates:?}"));
                            }
                        }
                    }
                }
            }
        }
    }
    let ok = worst.gap <= EXACT_TOLERANCE;
    Ok(CriterionResult::finish(
        1,
        "closed forms match the renewal recursion",
        start,
        Some(Duration::from_secs(10)),
        ok,
        format!("{} comparisons, max |Δ| = {:.3e} at {}", worst.checks, worst.gap, worst.at),
    ))
}

/// Hand-derived values, each to 1e-12.
pub fn spot_values() -> Result<CriterionResult> {
    let start = Instant::now();
    let ones = Rates::new(1.0, 1.0, 1.0, 1.0);
    let checks: Vec<(&str, f64, f64)> = vec![
        ("DC_RC n=3", analytic::freshness_dc_rc(1.0, 1.0, 3)?.value(), 7.0 / 24.0),
        ("FC_allRC n=2", analytic::freshness_fc_allrc(1.0, 1.0, 1.0, 2)?.value(), 5.0 / 12.0),
        ("FC_allRC n=3", analytic::freshness_fc_allrc(1.0, 1.0, 1.0, 3)?.value(), 13.0 / 36.0),
        ("FC_sRC n=3 (recursion)", flat(FcSrcRc, 1.0, 1.0, 1.0, 3)?, 19.0 / 54.0),
        (
            "(DC_RC,DC_RC) m=k=2",
            clustered_closed_form(&NetworkSpec::clustered(4, 2, DcRc, DcRc, ones))?
                .expect("table row")
                .value(),
            9.0 / 64.0,
        ),
        (
            "(DC_RC,FC_allRC) m=k=2",
            clustered_closed_form(&NetworkSpec::clustered(4, 2, DcRc, FcAllRc, ones))?
                .expect("table row")
                .value(),
            5.0 / 32.0,
        ),
    ];
    let failures: Vec<String> = checks
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > EXACT_TOLERANCE)
        .map(|(name, got, want)| format!("{name}: {got} != {want}"))
        .collect();
    Ok(CriterionResult::finish(
        2,
        "hand-derived spot values",
        start,
        None,
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} values within {EXACT_TOLERANCE:e}", checks.len())
        } else {
            failures.join("; ")
        },
    ))
}

/// RC dominance for DC networks, the FC ordering and the zero-gossip collapse.
pub fn inequalities_hold() -> Result<CriterionResult> {
    let start = Instant::now();
    let mut violations = Vec::new();
    let mut checks = 0usize;
    for n in 1..=GRID_MAX_N {
        for &e in &GRID_RATES {
            for &s in &GRID_RATES {
                let dc_rc = flat(DcRc, s, 0.0, e, n)?;
                let dc_norc = flat(DcNoRc, s, 0.0, e, n)?;
                checks += 1;
                let ok = if n >= 2 {
                    dc_rc > dc_norc
                } else {
                    (dc_rc - dc_norc).abs() <= ORDER_SLACK
                };
                if !ok {
                    violations.push(format!("DC n={n} e={e} s={s}: {dc_rc} vs {dc_norc}"));
                }
                // zero gossip: FC policies reduce exactly to their DC counterparts
                checks += 1;
                if flat(FcAllRc, s, 0.0, e, n)? != dc_rc
                    || flat(FcSrcRc, s, 0.0, e, n)? != dc_rc
                    || flat(FcNoRc, s, 0.0, e, n)? != dc_norc
                {
                    violations.push(format!("collapse n={n} e={e} s={s}"));
                }
                checks += 1;
                let geometric = flat_closed_form(FcAllRc, s, 0.0, e, n)?.expect("closed form").value();
                let closed = flat_closed_form(DcRc, s, 0.0, e, n)?.expect("closed form").value();
                if (geometric - closed).abs() > EXACT_TOLERANCE {
                    violations.push(format!("geometric sum n={n} e={e} s={s}: {geometric} vs {closed}"));
                }
                for &g in &GRID_RATES {
                    let all = flat(FcAllRc, s, g, e, n)?;
                    let src = flat(FcSrcRc, s, g, e, n)?;
                    let none = flat(FcNoRc, s, g, e, n)?;
                    checks += 1;
                    if all < src - ORDER_SLACK || src < none - ORDER_SLACK {
                        violations.push(format!("FC order n={n} e={e} s={s} g={g}: {all} {src} {none}"));
                    }
                }
            }
        }
    }
    Ok(CriterionResult::finish(
        3,
        "RC dominance, FC ordering and zero-gossip collapse",
        start,
        None,
        violations.is_empty(),
        if violations.is_empty() {
            format!("{checks} grid checks")
        } else {
            format!("{} violations, first: {}", violations.len(), violations[0])
        },
    ))
}

/// Cycle estimator against the exact value for every flat policy.
pub fn monte_carlo_agrees() -> Result<CriterionResult> {
    let start = Instant::now();
    let mut worst = Worst::default();
    let mut seed = 1_000;
    for policy in GossipPolicy::ALL {
        for n in MC_FLAT_N {
            for (e, s, g) in MC_FLAT_RATES {
                let spec = NetworkSpec::flat(n, policy, Rates::new(e, s, 0.0, g));
                let exact = analytic::freshness(&spec)?.value();
                let est = estimate_freshness_cycles(&spec, MC_CYCLES, seed)?;
                seed += 1;
                worst.see(est.z_score(exact).abs(), || format!("{policy} n={n} e={e} s={s} g={g}"));
            }
        }
    }
    Ok(CriterionResult::finish(
        4,
        "Monte Carlo agrees with the exact value",
        start,
        Some(Duration::from_secs(60)),
        worst.gap <= Z_LIMIT,
        format!("{} runs of {MC_CYCLES} cycles, max |z| = {:.3} at {}", worst.checks, worst.gap, worst.at),
    ))
}

/// Full two-level simulation against the product of the stage probabilities.
pub fn decomposition_holds() -> Result<CriterionResult> {
    let start = Instant::now();
    let mut worst = Worst::default();
    let mut seed = 5_000;
    for sp in GossipPolicy::SOURCE_STAGE {
        for cp in GossipPolicy::ALL {
            for (m, k) in DECOMPOSITION_SHAPES {
                let spec = NetworkSpec::clustered(m * k, k, sp, cp, DECOMPOSITION_RATES);
                let report = decomposition_check(&spec, MC_CYCLES, seed)?;
                seed += 1;
                worst.see(report.z.abs(), || format!("({sp},{cp}) m={m} k={k}"));
            }
        }
    }
    Ok(CriterionResult::finish(
        5,
        "clustered simulation matches p_CH · p_node|CH",
        start,
        None,
        worst.gap <= Z_LIMIT,
        format!("{} runs of {MC_CYCLES} cycles, max |z| = {:.3} at {}", worst.checks, worst.gap, worst.at),
    ))
}

/// Optimal cluster size behavior at n = 120.
pub fn optimal_cluster_claims() -> Result<CriterionResult> {
    let start = Instant::now();
    let n = 120;
    let peak = |rates: Rates, sp, cp| optimal_cluster_size(n, rates, sp, cp);
    let mut failures = Vec::new();
    let mut notes = Vec::new();

    let equal = Rates::new(1.0, 1.0, 1.0, 0.0);
    let rc_rc = peak(equal, DcRc, DcRc)?;
    for [sp, cp] in DC_PAIRS.iter().filter(|p| **p != [DcRc, DcRc]) {
        let other = peak(equal, *sp, *cp)?;
        if rc_rc.p_star.value() <= other.p_star.value() {
            failures.push(format!("(i) (DC_RC,DC_RC) not above ({sp},{cp})"));
        }
    }
    notes.push(format!("(i) p*(DC_RC,DC_RC)={:.6} at k*={}", rc_rc.p_star.value(), rc_rc.k_star));

    let at_source = peak(equal, DcRc, DcNoRc)?;
    let at_cluster = peak(equal, DcNoRc, DcRc)?;
    let gap = (at_source.p_star.value() - at_cluster.p_star.value()).abs();
    if gap > EXACT_TOLERANCE || at_source.k_star == at_cluster.k_star {
        failures.push(format!(
            "(ii) peaks {:.15} at k*={} vs {:.15} at k*={}",
            at_source.p_star.value(),
            at_source.k_star,
            at_cluster.p_star.value(),
            at_cluster.k_star
        ));
    }
    notes.push(format!(
        "(ii) |Δp*|={gap:.1e}, k*={} vs {}",
        at_source.k_star, at_cluster.k_star
    ));

    for (s, c) in [(2.0, 1.0), (1.0, 2.0)] {
        let rates = Rates::new(1.0, s, c, 0.0);
        let src = peak(rates, DcRc, DcNoRc)?.p_star.value();
        let clu = peak(rates, DcNoRc, DcRc)?.p_star.value();
        let ok = if s > c { src >= clu } else { clu >= src };
        if !ok {
            failures.push(format!("(iii) λs={s} λc={c}: source-side {src} cluster-side {clu}"));
        }
        notes.push(format!("(iii) λs={s},λc={c}: {src:.6} vs {clu:.6}"));
    }

    let fc_rates = Rates::new(1.0, 1.0, 1.0, 1.0);
    let best = peak(fc_rates, DcRc, FcAllRc)?;
    for [sp, cp] in FC_PAIRS.iter().filter(|p| **p != [DcRc, FcAllRc]) {
        let other = peak(fc_rates, *sp, *cp)?;
        if best.p_star.value() <= other.p_star.value() {
            failures.push(format!("(iv) (DC_RC,FC_allRC) not above ({sp},{cp})"));
        }
    }
    notes.push(format!("(iv) p*(DC_RC,FC_allRC)={:.6} at k*={}", best.p_star.value(), best.k_star));

    Ok(CriterionResult::finish(
        6,
        "optimal cluster size claims at n = 120",
        start,
        Some(Duration::from_secs(5)),
        failures.is_empty(),
        if failures.is_empty() {
            notes.join("; ")
        } else {
            failures.join("; ")
        },
    ))
}

/// Sweeps with simulation columns give identical CSV bytes when repeated.
pub fn sweeps_are_deterministic() -> Result<CriterionResult> {
    let start = Instant::now();
    let sim = SimConfig {
        cycles: 500,
        seed: 77,
        estimator: SimEstimator::Cycle,
        horizon: None,
    };
    let mut compared = Vec::new();
    let mut ok = true;
    for mut config in [presets::fig3(), presets::fig5()] {
        config.output = None;
        config.sim = Some(sim.clone());
        let a = to_csv_bytes(&run_experiment(&config)?);
        let b = to_csv_bytes(&run_experiment(&config)?);
        ok &= a == b;
        compared.push(format!("{} ({} bytes)", config.name, a.len()));
    }
    Ok(CriterionResult::finish(
        7,
        "sweeps are byte-for-byte reproducible",
        start,
        None,
        ok,
        format!("compared {}", compared.join(", ")),
    ))
}

pub fn run_all() -> Result<Vec<CriterionResult>> {
    Ok(vec![
        closed_forms_match_recursion()?,
        spot_values()?,
        inequalities_hold()?,
        monte_carlo_agrees()?,
        decomposition_holds()?,
        optimal_cluster_claims()?,
        sweeps_are_deterministic()?,
    ])
}

/// `criterion,name,passed,detail` report; timings are left out so the bytes
/// only depend on the outcomes.
pub fn report_csv(results: &[CriterionResult]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["criterion", "name", "passed", "detail"])
        .expect("writing to memory");
    for r in results {
        w.write_record([
            r.id.to_string(),
            r.name.to_owned(),
            r.passed.to_string(),
            r.detail.clone(),
        ])
        .expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}
