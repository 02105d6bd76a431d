use std::path::Path;

use crate::analytic;
use crate::error::{Error, Result};
use crate::model::{GossipPolicy, NetworkSpec, Rates};
use crate::simulator::{estimate_freshness_cycles, estimate_freshness_time};

use super::config::{ExperimentConfig, Mode, PolicyChoice, SimEstimator};

pub const CSV_HEADER: [&str; 17] = [
    "experiment",
    "policy_source",
    "policy_cluster",
    "n",
    "k",
    "m",
    "lambda_e",
    "lambda_s",
    "lambda_c",
    "lambda_g",
    "p_analytic",
    "p_oracle",
    "p_sim",
    "sim_ci_lo",
    "sim_ci_hi",
    "cycles",
    "seed",
];

/// Largest tolerated gap between a closed form and the recursion.
pub const ORACLE_TOLERANCE: f64 = 1e-12;

/// One evaluated grid point. Flat rows leave the cluster columns empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub policy_source: GossipPolicy,
    pub policy_cluster: Option<GossipPolicy>,
    pub n: usize,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub lambda_e: f64,
    pub lambda_s: f64,
    pub lambda_c: Option<f64>,
    pub lambda_g: f64,
    pub p_analytic: Option<f64>,
    pub p_oracle: f64,
    pub p_sim: Option<f64>,
    pub sim_ci_lo: Option<f64>,
    pub sim_ci_hi: Option<f64>,
    pub cycles: Option<u64>,
    pub seed: Option<u64>,
}

impl ResultRow {
    /// `DC_RC` for flat rows, `DC_RC+FC_allRC` for clustered ones.
    pub fn policy_label(&self) -> String {
        match self.policy_cluster {
            Some(c) => format!("{}+{}", self.policy_source, c),
            None => self.policy_source.to_string(),
        }
    }

    /// Rate case identifier, e.g. `e0.1_s1_g1` or `e1_s10_c20_g0`.
    pub fn case_label(&self) -> String {
        match self.lambda_c {
            Some(c) => format!(
                "e{}_s{}_c{}_g{}",
                self.lambda_e, self.lambda_s, c, self.lambda_g
            ),
            None => format!("e{}_s{}_g{}", self.lambda_e, self.lambda_s, self.lambda_g),
        }
    }

    pub fn rates(&self) -> Rates {
        Rates::new(
            self.lambda_e,
            self.lambda_s,
            self.lambda_c.unwrap_or(0.0),
            self.lambda_g,
        )
    }
}

/// Every grid point of `config`, in output order: case, then policy, then n or k.
pub fn grid(config: &ExperimentConfig) -> Result<Vec<NetworkSpec>> {
    config.check()?;
    let mut specs = Vec::new();
    for case in &config.cases {
        let rates = case.rates();
        for policy in &config.policies {
            match (config.mode, *policy) {
                (Mode::FlatSweepN, PolicyChoice::Flat(p)) => {
                    let [lo, hi] = config.n_range.expect("checked");
                    specs.extend((lo..=hi).map(|n| NetworkSpec::flat(n, p, rates)));
                }
                (Mode::ClusteredSweepK, PolicyChoice::Clustered([s, c])) => {
                    let n = config.n.expect("checked");
                    specs.extend(
                        analytic::divisors(n)
                            .into_iter()
                            .map(|k| NetworkSpec::clustered(n, k, s, c, rates)),
                    );
                }
                (Mode::SinglePoint, PolicyChoice::Flat(p)) => {
                    specs.push(NetworkSpec::flat(config.n.expect("checked"), p, rates))
                }
                (Mode::SinglePoint, PolicyChoice::Clustered([s, c])) => specs.push(
                    NetworkSpec::clustered(config.n.expect("checked"), config.k.expect("checked"), s, c, rates),
                ),
                _ => unreachable!("mode/policy combinations are checked"),
            }
        }
    }
    for spec in &specs {
        spec.ensure_valid()?;
    }
    Ok(specs)
}

/// Evaluates one spec: recursion always, closed form when one exists.
pub fn evaluate(experiment: &str, spec: &NetworkSpec) -> Result<ResultRow> {
    let p_oracle = analytic::freshness(spec)?.value();
    let p_analytic = analytic::closed_form(spec)?.map(|p| p.value());
    if let Some(a) = p_analytic {
        if (a - p_oracle).abs() > ORACLE_TOLERANCE {
            return Err(Error::domain(format!(
                "closed form {a} and recursion {p_oracle} disagree for {spec:?}"
            )));
        }
    }
    let r = spec.rates;
    let mut row = ResultRow {
        experiment: experiment.to_owned(),
        policy_source: GossipPolicy::DcNoRc,
        policy_cluster: None,
        n: spec.node_count(),
        k: None,
        m: None,
        lambda_e: r.lambda_e,
        lambda_s: r.lambda_s,
        lambda_c: None,
        lambda_g: r.lambda_g,
        p_analytic,
        p_oracle,
        p_sim: None,
        sim_ci_lo: None,
        sim_ci_hi: None,
        cycles: None,
        seed: None,
    };
    match spec.shape {
        crate::model::Shape::Flat { policy, .. } => row.policy_source = policy,
        crate::model::Shape::Clustered {
            k,
            m,
            source_policy,
            cluster_policy,
            ..
        } => {
            row.policy_source = source_policy;
            row.policy_cluster = Some(cluster_policy);
            row.k = Some(k);
            row.m = Some(m);
            row.lambda_c = Some(r.lambda_c);
        }
    }
    Ok(row)
}

/// Evaluates every grid point, adds Monte Carlo columns when `config.sim` is
/// set, and writes the CSV when `config.output` is set. Row `i` is simulated
/// with seed `sim.seed + i`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let specs = grid(config)?;
    let mut rows = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let mut row = evaluate(&config.name, spec)?;
        if let Some(sim) = &config.sim {
            let seed = sim.seed.wrapping_add(i as u64);
            let est = match sim.estimator {
                SimEstimator::Cycle => {
                    row.cycles = Some(sim.cycles);
                    estimate_freshness_cycles(spec, sim.cycles, seed)?
                }
                SimEstimator::TimeAverage => {
                    estimate_freshness_time(spec, sim.horizon.expect("checked"), seed)?
                }
            };
            row.p_sim = Some(est.p_hat);
            row.sim_ci_lo = Some(est.ci95.0);
            row.sim_ci_hi = Some(est.ci95.1);
            row.seed = Some(seed);
        }
        rows.push(row);
    }
    if let Some(path) = &config.output {
        write_csv(path, &rows)?;
    }
    Ok(rows)
}

fn fmt_f64(x: f64) -> String {
    // 17 significant digits: exact round trip for every f64
    format!("{x:.16e}")
}

fn opt<T>(v: Option<T>, f: impl FnOnce(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn record(row: &ResultRow) -> [String; 17] {
    [
        row.experiment.clone(),
        row.policy_source.to_string(),
        opt(row.policy_cluster, |p| p.to_string()),
        row.n.to_string(),
        opt(row.k, |k| k.to_string()),
        opt(row.m, |m| m.to_string()),
        fmt_f64(row.lambda_e),
        fmt_f64(row.lambda_s),
        opt(row.lambda_c, fmt_f64),
        fmt_f64(row.lambda_g),
        opt(row.p_analytic, fmt_f64),
        fmt_f64(row.p_oracle),
        opt(row.p_sim, fmt_f64),
        opt(row.sim_ci_lo, fmt_f64),
        opt(row.sim_ci_hi, fmt_f64),
        opt(row.cycles, |c| c.to_string()),
        opt(row.seed, |s| s.to_string()),
    ]
}

fn csv_writer<W: std::io::Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// CSV bytes for `rows`, header first, LF line endings.
pub fn to_csv_bytes(rows: &[ResultRow]) -> Vec<u8> {
    let mut w = csv_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("writing to memory");
    for row in rows {
        w.write_record(record(row)).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, to_csv_bytes(rows)).map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&bytes, path)
}

pub fn parse_csv(bytes: &[u8], origin: &Path) -> Result<Vec<ResultRow>> {
    let bad = |line: u64, msg: String| Error::Parse {
        path: origin.to_owned(),
        message: format!("line {line}: {msg}"),
    };
    let mut reader = csv::Reader::from_reader(bytes);
    let header = reader.headers().map_err(|e| Error::Csv {
        path: origin.to_owned(),
        source: e,
    })?;
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(1, format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| Error::Csv {
            path: origin.to_owned(),
            source: e,
        })?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        fn num<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
            s.parse().map_err(|_| format!("cannot parse {s:?}"))
        }
        fn maybe<T: std::str::FromStr>(s: &str) -> std::result::Result<Option<T>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        }
        let parse_row = || -> std::result::Result<ResultRow, String> {
            Ok(ResultRow {
                experiment: field(0).to_owned(),
                policy_source: field(1).parse().map_err(|e: Error| e.to_string())?,
                policy_cluster: if field(2).is_empty() {
                    None
                } else {
                    Some(field(2).parse().map_err(|e: Error| e.to_string())?)
                },
                n: num(field(3))?,
                k: maybe(field(4))?,
                m: maybe(field(5))?,
                lambda_e: num(field(6))?,
                lambda_s: num(field(7))?,
                lambda_c: maybe(field(8))?,
                lambda_g: num(field(9))?,
                p_analytic: maybe(field(10))?,
                p_oracle: num(field(11))?,
                p_sim: maybe(field(12))?,
                sim_ci_lo: maybe(field(13))?,
                sim_ci_hi: maybe(field(14))?,
                cycles: maybe(field(15))?,
                seed: maybe(field(16))?,
            })
        };
        rows.push(parse_row().map_err(|m| bad(line, m))?);
    }
    Ok(rows)
}
