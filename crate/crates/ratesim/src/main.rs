//! Command-line front end: run experiments, print bound constants,
//! validate traces, synthesize traces, and inspect decision graphs.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ratesim::bounds::{bounds_report, c_graph, BoundsError};
use ratesim::env::{
    check_correlated, check_unimodal, parse_scenario, preset_with_horizon, ScenarioPreset,
    SuccessProfile, MORPH_DEFAULT_HORIZON,
};
use ratesim::graph::{
    check_graph_unimodal, mimo_default_graph, parse_graph, DecisionGraph,
};
use ratesim::policy::{build_policy, BuildContext, PolicyConfig, SampleRateParams};
use ratesim::sim::{
    monte_carlo, monte_carlo_packets, stride_checkpoints, RegretSummary, DEFAULT_PACKET_BITS,
};
use ratesim::trace::{parse_trace, render_trace, synth_trace, trace_env, trace_intervals};

#[derive(Parser)]
#[command(name = "ratesim", version, about = "802.11 rate-adaptation bandit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate policies and write one regret CSV per policy.
    Run(RunArgs),
    /// Print regret lower-bound constants for a scenario.
    Bounds(BoundsArgs),
    /// Check a trace file against the structural assumptions.
    Validate(ValidateArgs),
    /// Synthesize a round-robin probing trace for a scenario.
    GenTrace(GenTraceArgs),
    /// Inspect a decision graph: connectivity, degree, unimodality.
    GraphCheck(GraphCheckArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Slots,
    Packets,
}

#[derive(Args)]
struct RunArgs {
    /// Preset name (steep, gradual, lossy, morph) or a scenario/trace file.
    #[arg(long, default_value = "steep")]
    scenario: String,
    /// Policy name; repeat the flag to run several.
    #[arg(long, required = true)]
    policy: Vec<String>,
    /// Horizon in slots.
    #[arg(short = 'T', long = "horizon", default_value_t = MORPH_DEFAULT_HORIZON)]
    horizon: u64,
    #[arg(long, default_value_t = 100)]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exploration constant of the index threshold.
    #[arg(long, default_value_t = 3.0)]
    c: f64,
    /// Sliding-window length for the sw-* policies.
    #[arg(long)]
    tau: Option<usize>,
    /// Forced-leader divisor override for gors / sw-gors.
    #[arg(long)]
    divisor: Option<u64>,
    /// Decision-graph file for the graphical policies ("mimo" for the
    /// built-in two-mode graph; the rate line otherwise).
    #[arg(long)]
    graph: Option<String>,
    /// Output directory for the per-policy CSV files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Slots)]
    mode: Mode,
    /// Checkpoint stride in slots; 0 picks about 200 rows.
    #[arg(long, default_value_t = 0)]
    stride: u64,
    /// Average realized regret instead of pseudo-regret.
    #[arg(long, default_value_t = false)]
    realized: bool,
    /// Monte-Carlo worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct BoundsArgs {
    /// Preset name or scenario file.
    #[arg(long, default_value = "steep")]
    scenario: String,
    /// Also print the graphical constant for this graph file (or "mimo").
    #[arg(long)]
    graph: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    trace: PathBuf,
    /// Carry estimates over intervals missing a rate instead of failing.
    #[arg(long, default_value_t = false)]
    fill_gaps: bool,
}

#[derive(Args)]
struct GenTraceArgs {
    #[arg(long, default_value = "steep")]
    scenario: String,
    #[arg(short = 'T', long = "horizon", default_value_t = MORPH_DEFAULT_HORIZON)]
    horizon: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GraphCheckArgs {
    /// Graph file; the built-in two-mode MIMO graph when omitted.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Success probabilities (comma separated) to check unimodality with.
    #[arg(long)]
    theta: Option<String>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Validate(args) => cmd_validate(args),
        Command::GenTrace(args) => cmd_gen_trace(args),
        Command::GraphCheck(args) => cmd_graph_check(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

/// Preset name, scenario config file, or trace file.
fn load_scenario(spec: &str, horizon: u64) -> Result<ScenarioPreset> {
    if let Ok(p) = preset_with_horizon(spec, horizon) {
        return Ok(p);
    }
    let path = Path::new(spec);
    if !path.exists() {
        bail!("`{spec}` is neither a preset (steep, gradual, lossy, morph) nor a file");
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
    if text.starts_with("#rates=") {
        let trace = parse_trace(&text)?;
        let profile = trace_env(&trace, true)?;
        let rates = ratesim::env::RateTable::new(trace.rates.clone())?;
        return Ok(ScenarioPreset { name: spec.to_string(), rates, profile });
    }
    Ok(parse_scenario(&text)?)
}

fn load_graph(spec: &str) -> Result<DecisionGraph> {
    if spec == "mimo" {
        return Ok(mimo_default_graph());
    }
    let text = fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    Ok(parse_graph(&text)?)
}

fn render_summary(summary: &RegretSummary) -> String {
    let mut out = String::from("slot,mean_regret,stderr\n");
    for i in 0..summary.checkpoints.len() {
        out.push_str(&format!(
            "{},{},{}\n",
            summary.checkpoints[i], summary.mean[i], summary.stderr[i]
        ));
    }
    out
}

fn cmd_run(args: RunArgs) -> Result<()> {
    if args.horizon == 0 || args.runs == 0 {
        bail!("horizon and runs must be at least 1");
    }
    let scenario = load_scenario(&args.scenario, args.horizon)?;
    let env = scenario.environment();
    let graph = args.graph.as_deref().map(load_graph).transpose()?;
    let stride = if args.stride == 0 { (args.horizon / 200).max(1) } else { args.stride };
    let checkpoints = stride_checkpoints(args.horizon, stride);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .context("building thread pool")?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    for name in &args.policy {
        let mut cfg = PolicyConfig::new(name);
        cfg.c = args.c;
        cfg.tau = args.tau;
        cfg.divisor = args.divisor;
        cfg.samplerate = SampleRateParams::default();
        let mut ctx = BuildContext::new(&env);
        if let Some(g) = &graph {
            ctx = ctx.with_graph(g);
        }
        // fail early on bad names or missing parameters
        build_policy(&cfg, &ctx)?;
        let factory = || build_policy(&cfg, &ctx).expect("validated above");
        let summary = pool.install(|| match args.mode {
            Mode::Slots => monte_carlo(
                &factory,
                &env,
                args.horizon,
                args.runs,
                args.seed,
                &checkpoints,
                args.realized,
            ),
            Mode::Packets => monte_carlo_packets(
                &factory,
                &env,
                args.horizon,
                DEFAULT_PACKET_BITS,
                args.runs,
                args.seed,
                &checkpoints,
                args.realized,
            ),
        })?;
        let path = args.out.join(format!("{name}.csv"));
        fs::write(&path, render_summary(&summary))
            .with_context(|| format!("writing {}", path.display()))?;
        println!(
            "{name}: {} runs over {} slots -> {}",
            args.runs,
            args.horizon,
            path.display()
        );
    }
    Ok(())
}

fn cmd_bounds(args: BoundsArgs) -> Result<()> {
    let scenario = load_scenario(&args.scenario, MORPH_DEFAULT_HORIZON)?;
    let theta = match &scenario.profile {
        SuccessProfile::Stationary { theta } => theta.clone(),
        SuccessProfile::Trajectory { .. } => {
            bail!("bounds are defined for stationary scenarios; got a trajectory")
        }
    };
    match bounds_report(&scenario.rates, &theta) {
        Ok(report) => {
            // 1-based indices for display
            println!("scenario: {}", scenario.name);
            println!("k_star: {}", report.k_star + 1);
            println!(
                "neighbors: {}",
                report
                    .n_kstar
                    .iter()
                    .map(|k| (k + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            );
            println!("k0: {}", report.k0 + 1);
            println!("c: {:.6}", report.c);
            println!("c_prime: {:.6}", report.c_prime);
            for t in &report.c_terms {
                println!(
                    "c_term k={} gap={:.6} kl={:.6} value={:.6}",
                    t.index + 1,
                    t.gap,
                    t.divergence,
                    t.value
                );
            }
            for t in &report.c_prime_terms {
                println!(
                    "c_prime_term k={} gap={:.6} kl={:.6} value={:.6}",
                    t.index + 1,
                    t.gap,
                    t.divergence,
                    t.value
                );
            }
        }
        Err(BoundsError::StructureViolation) => {
            println!("scenario: {}", scenario.name);
            println!("structure: violated (theta not correlated unimodal); no bounds");
        }
        Err(e) => return Err(e.into()),
    }
    if let Some(gspec) = &args.graph {
        let graph = load_graph(gspec)?;
        match c_graph(&graph, &theta) {
            Ok(cg) => println!("c_graph: {cg:.6}"),
            Err(BoundsError::StructureViolation) => {
                println!("c_graph: structure violated on this graph")
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<()> {
    let text = fs::read_to_string(&args.trace)
        .with_context(|| format!("reading {}", args.trace.display()))?;
    let trace = parse_trace(&text)?;
    let intervals = trace_intervals(&trace, args.fill_gaps)?;
    let rates = ratesim::env::RateTable::new(trace.rates.clone())?;
    let total = intervals.len();
    let correlated = intervals.iter().filter(|(_, th)| check_correlated(th)).count();
    let unimodal = intervals.iter().filter(|(_, th)| check_unimodal(&rates, th)).count();
    let profile = trace_env(&trace, args.fill_gaps)?;
    println!("intervals: {total}");
    println!(
        "correlated: {correlated}/{total} ({:.1}%)",
        100.0 * correlated as f64 / total as f64
    );
    println!(
        "unimodal: {unimodal}/{total} ({:.1}%)",
        100.0 * unimodal as f64 / total as f64
    );
    println!("sigma: {:.6e}", profile.declared_sigma());
    Ok(())
}

fn cmd_gen_trace(args: GenTraceArgs) -> Result<()> {
    if args.horizon == 0 {
        bail!("horizon must be at least 1");
    }
    let scenario = load_scenario(&args.scenario, args.horizon)?;
    let trace = synth_trace(&scenario, args.horizon, args.seed);
    let text = render_trace(&trace);
    match &args.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            println!("{} rows -> {}", trace.rows.len(), path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_graph_check(args: GraphCheckArgs) -> Result<()> {
    let graph = match &args.graph {
        Some(path) => load_graph(&path.display().to_string())?,
        None => mimo_default_graph(),
    };
    println!("vertices: {}", graph.len());
    println!("edges: {}", graph.edges().len());
    println!("gamma: {}", graph.gamma());
    println!("connected: {}", graph.is_connected());
    if let Some(theta) = &args.theta {
        let theta: Vec<f64> = theta
            .split(',')
            .map(|v| v.trim().parse::<f64>().context("bad theta value"))
            .collect::<Result<_>>()?;
        if theta.len() != graph.len() {
            bail!("theta has {} entries for {} vertices", theta.len(), graph.len());
        }
        let mu: Vec<f64> =
            (0..graph.len()).map(|d| graph.rate(d) * theta[d]).collect();
        println!("correlated_modes: {}", graph.check_correlated_modes(&theta)?);
        println!("unimodal: {}", check_graph_unimodal(&graph, &mu)?);
    }
    Ok(())
}
