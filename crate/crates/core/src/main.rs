use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gossip_freshness::analytic;
use gossip_freshness::experiments::{
    self, emit_plot_data, presets, report_optimal_k, run_experiment, selftest, ExperimentConfig,
    Mode, PolicyChoice, RateCase, SimConfig, SimEstimator, XAxis,
};
use gossip_freshness::{Error, GossipPolicy, NetworkSpec, Rates};

const EXIT_SELFTEST_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "freshness", version, about = "Binary freshness of flat and clustered gossip networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact freshness of a single network.
    Analytic(AnalyticArgs),
    /// Run a config-driven sweep and write CSV (and optionally plot series).
    Sweep(SweepArgs),
    /// Like `sweep`, but always adds Monte Carlo columns.
    Simulate(SimulateArgs),
    /// Optimal cluster size per policy pair and rate case.
    OptimalK(OptimalArgs),
    /// Run the acceptance checks.
    Selftest {
        /// Write a CSV report here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RateArgs {
    #[arg(long, default_value_t = 1.0)]
    lambda_e: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_s: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_c: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda_g: f64,
}

impl RateArgs {
    fn rates(&self) -> Rates {
        Rates::new(self.lambda_e, self.lambda_s, self.lambda_c, self.lambda_g)
    }
}

#[derive(Args)]
struct AnalyticArgs {
    /// Number of end-nodes.
    #[arg(long)]
    n: usize,
    /// Cluster size; makes the network clustered.
    #[arg(long, requires = "cluster_policy")]
    k: Option<usize>,
    /// Policy of a flat network, or of the source stage when clustered.
    #[arg(long, default_value = "DC_noRC", value_parser = parse_policy)]
    policy: GossipPolicy,
    /// Policy inside each cluster.
    #[arg(long, value_parser = parse_policy)]
    cluster_policy: Option<GossipPolicy>,
    #[command(flatten)]
    rates: RateArgs,
    /// Print the per-step capture probabilities of the recursion.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct Source {
    /// TOML experiment config.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment: fig3, fig4 or fig5.
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> Result<Option<ExperimentConfig>, Error> {
        match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path).map(Some),
            (None, Some(name)) => presets::by_name(name)
                .map(Some)
                .ok_or_else(|| Error::InvalidConfig(vec![format!("unknown preset {name:?}")])),
            (None, None) => Ok(None),
        }
    }

    fn require(&self) -> Result<ExperimentConfig, Error> {
        self.load()?
            .ok_or_else(|| Error::InvalidConfig(vec!["pass --config FILE or --preset NAME".into()]))
    }
}

#[derive(Args)]
struct Overrides {
    /// CSV output path (overrides the config).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Node count (overrides the config).
    #[arg(long)]
    n: Option<usize>,
    /// Directory for `x y` plot series.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long)]
    cycles: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Cycle,
    TimeAverage,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long)]
    cycles: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    estimator: Option<EstimatorArg>,
    /// Trajectory length for the time-average estimator.
    #[arg(long)]
    horizon: Option<f64>,
}

#[derive(Args)]
struct OptimalArgs {
    #[command(flatten)]
    source: Source,
    /// Node count; defaults to the config's, or 120.
    #[arg(long)]
    n: Option<usize>,
    /// Rates used when no config is given.
    #[command(flatten)]
    rates: RateArgs,
}

fn parse_policy(s: &str) -> Result<GossipPolicy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn apply_overrides(config: &mut ExperimentConfig, o: &Overrides) {
    if let Some(path) = &o.output {
        config.output = Some(path.clone());
    }
    if let Some(n) = o.n {
        config.n = Some(n);
    }
}

fn apply_sim(config: &mut ExperimentConfig, cycles: Option<u64>, seed: Option<u64>) {
    if cycles.is_none() && seed.is_none() {
        return;
    }
    let sim = config.sim.get_or_insert(SimConfig {
        cycles: 100_000,
        seed: 0,
        estimator: SimEstimator::Cycle,
        horizon: None,
    });
    if let Some(c) = cycles {
        sim.cycles = c;
    }
    if let Some(s) = seed {
        sim.seed = s;
    }
}

fn run_sweep(mut config: ExperimentConfig, o: &Overrides) -> Result<(), Error> {
    apply_overrides(&mut config, o);
    let rows = run_experiment(&config)?;
    match &config.output {
        Some(path) => eprintln!("{} rows written to {}", rows.len(), path.display()),
        None => print!(
            "{}",
            String::from_utf8(experiments::to_csv_bytes(&rows)).expect("CSV is UTF-8")
        ),
    }
    if let Some(dir) = &o.plot_dir {
        let x = match config.mode {
            Mode::ClusteredSweepK => XAxis::K,
            _ => XAxis::N,
        };
        let out = emit_plot_data(&rows, x, dir)?;
        for w in &out.warnings {
            eprintln!("warning: {w}");
        }
        eprintln!("{} plot series written to {}", out.files.len(), dir.display());
    }
    Ok(())
}

fn analytic_cmd(a: &AnalyticArgs) -> Result<(), Error> {
    let rates = a.rates.rates();
    let spec = match (a.k, a.cluster_policy) {
        (Some(k), Some(cp)) => NetworkSpec::clustered(a.n, k, a.policy, cp, rates),
        _ => NetworkSpec::flat(a.n, a.policy, rates),
    };
    spec.ensure_valid()?;
    let p = analytic::freshness(&spec)?;
    println!("freshness (recursion): {:.15}", p.value());
    match analytic::closed_form(&spec)? {
        Some(cf) => println!("freshness (closed form): {:.15}", cf.value()),
        None => println!("freshness (closed form): n/a"),
    }
    if a.k.is_some() {
        let (_, b) = analytic::clustered_freshness(&spec)?;
        println!("p_CH: {:.15}", b.p_ch);
        println!("p_node|CH: {:.15}", b.p_node_given_ch);
    } else if a.trace {
        let (_, t) = analytic::flat_trace(a.policy, rates.lambda_s, rates.lambda_g, rates.lambda_e, a.n)?;
        println!("{:>5} {:>18} {:>18}", "step", "q_k", "tau_k");
        for (i, q) in t.q.iter().enumerate() {
            let tau = t.tau.get(i).map(|v| format!("{v:.15}")).unwrap_or_default();
            println!("{:>5} {:>18.15} {:>18}", i + 1, q, tau);
        }
    }
    Ok(())
}

fn optimal_cmd(a: &OptimalArgs) -> Result<(), Error> {
    let mut config = match a.source.load()? {
        Some(c) => c,
        None => ExperimentConfig {
            name: "optimal-k".into(),
            mode: Mode::ClusteredSweepK,
            policies: presets::DC_PAIRS
                .iter()
                .chain(&presets::FC_PAIRS)
                .copied()
                .map(PolicyChoice::Clustered)
                .collect(),
            n: Some(120),
            n_range: None,
            k: None,
            output: None,
            cases: vec![{
                let r = a.rates.rates();
                RateCase::explicit(r.lambda_e, r.lambda_s, r.lambda_c, r.lambda_g)
            }],
            sim: None,
        },
    };
    if let Some(n) = a.n {
        config.n = Some(n);
    }
    let report = report_optimal_k(&config)?;
    println!("n = {}", report.n);
    println!("{:<8} {:<20} {:>5} {:>5} {:>18}", "case", "config", "k*", "m*", "p*");
    for e in &report.entries {
        println!(
            "{:<8} {:<20} {:>5} {:>5} {:>18.15}",
            e.case,
            format!("({},{})", e.source, e.cluster),
            e.k_star,
            e.m_star,
            e.p_star
        );
    }
    for (case, s, c, p) in &report.winners {
        println!("best in {case}: ({s},{c}) with p* = {p:.15}");
    }
    for claim in &report.claims {
        println!(
            "[{}] {}: {} ({})",
            if claim.holds { "HOLDS" } else { "FAILS" },
            claim.case,
            claim.statement,
            claim.detail
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Analytic(a) => analytic_cmd(&a)?,
        Command::Sweep(s) => {
            let mut config = s.source.require()?;
            apply_sim(&mut config, s.cycles, s.seed);
            run_sweep(config, &s.overrides)?;
        }
        Command::Simulate(s) => {
            let mut config = s.source.require()?;
            if config.sim.is_none() {
                apply_sim(&mut config, Some(s.cycles.unwrap_or(100_000)), s.seed);
            } else {
                apply_sim(&mut config, s.cycles, s.seed);
            }
            let sim = config.sim.as_mut().expect("set above");
            if let Some(e) = s.estimator {
                sim.estimator = match e {
                    EstimatorArg::Cycle => SimEstimator::Cycle,
                    EstimatorArg::TimeAverage => SimEstimator::TimeAverage,
                };
            }
            if let Some(h) = s.horizon {
                sim.horizon = Some(h);
            }
            run_sweep(config, &s.overrides)?;
        }
        Command::OptimalK(a) => optimal_cmd(&a)?,
        Command::Selftest { output } => {
            let results = selftest::run_all()?;
            for r in &results {
                println!("{}", r.line());
            }
            if let Some(path) = output {
                std::fs::write(&path, selftest::report_csv(&results))
                    .map_err(|e| Error::Io { path, source: e })?;
            }
            if results.iter().any(|r| !r.passed) {
                return Ok(ExitCode::from(EXIT_SELFTEST_FAILED));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
