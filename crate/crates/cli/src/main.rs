//! `rnlab`: generate weighted graphs, query them through the oracles, and run
//! the canned experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use rnlab::distances::{absolute_distance, distance_to_property};
use rnlab::generators::{random_lipschitz_weights, GeneratorSpec, WeightProfile};
use rnlab::local::{estimate_matching, local_independent_set};
use rnlab::oracles::{observe, query_rng, uniform_query, OracleConfig, RnOracle};
use rnlab::partitions::{build_uniform_cover, find_weighted_partition, CoverFamily};
use rnlab::properties::PropertySpec;
use rnlab::scenarios::{render_jsonl, run_scenario, ExperimentConfig, Scenario};
use rnlab::stats::{
    edge_entropy, empirical_stats, exact_stats, exact_stats_by_radius, exact_uniform_stats, statistical_distance,
    vertex_entropy, BallStatistics,
};
use rnlab::testers::{observable_test, test_property_with, TesterConfig, Verdict};
use rnlab::{canonicalize, WeightedGraph};

mod csv_out;

/// Exit status of `test` when the verdict is REJECT.
const REJECT_EXIT: u8 = 3;

#[derive(Parser)]
#[command(name = "rnlab", version, about = "Radon-Nikodym oracles and local algorithms on weighted graphs")]
struct Cli {
    /// Master seed; every random choice derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON file with defaults for `seed`, `threads` and `out`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph family.
    Gen(GenArgs),
    /// Draw oracle queries and count canonical balls.
    Sample(SampleArgs),
    /// Exact or empirical ball statistics, or entropies.
    Stats(StatsArgs),
    /// Statistical distance d_S between two graphs.
    Distance(DistanceArgs),
    /// Weighted distance to a property.
    Dist(DistArgs),
    /// Hyperfinite partition certificate.
    Partition(PartitionArgs),
    /// Local estimate of the independence or matching number.
    Estimate(EstimateArgs),
    /// Property tester; exits with status 3 on REJECT.
    Test(TestArgs),
    /// Observing-oracle table of induced connected subgraphs.
    Observe(ObserveArgs),
    /// Run a named experiment and write a JSON-lines report.
    Scenario(ScenarioArgs),
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Family {
    BinaryTree,
    Path,
    Cycle,
    Grid,
    RandomRegular,
    PerturbedUnion,
    OrbitTree,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = std::f64::consts::LN_2)]
    beta: f64,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Weight profile of a perturbed union.
    #[arg(long, value_enum, default_value = "uniform")]
    profile: Profile,
    /// Replace the weights by random ones with this ratio bound.
    #[arg(long = "lipschitz-K")]
    lipschitz_k: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Uniform,
    Adversarial,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Rn,
    Uniform,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum, default_value = "rn")]
    oracle: OracleKind,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 2)]
    t: u32,
    #[arg(long)]
    queries: usize,
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Exact statistics over all roots (the default).
    #[arg(long, conflicts_with = "empirical")]
    exact: bool,
    /// Empirical statistics from `--queries` oracle samples.
    #[arg(long)]
    empirical: bool,
    /// Unlabeled balls under the uniform vertex distribution.
    #[arg(long)]
    uniform: bool,
    /// Vertex and edge entropy in nats instead of ball statistics.
    #[arg(long)]
    entropy: bool,
    #[arg(long, default_value_t = 2)]
    r: usize,
    #[arg(long, default_value_t = 2)]
    t: u32,
    #[arg(long, default_value_t = 100_000)]
    queries: usize,
}

#[derive(Args)]
struct DistanceArgs {
    #[arg(long, default_value_t = 5)]
    rmax: usize,
    #[arg(long, default_value_t = 2)]
    t: u32,
    a: PathBuf,
    b: PathBuf,
}

#[derive(Args)]
struct DistArgs {
    /// forest, bipartite, triangle_free, or k_colorable:<k>.
    #[arg(long, value_parser = parse_property)]
    property: PropertySpec,
    #[arg(long)]
    graph: PathBuf,
    /// Worst case over all distributions with ratio bound `K`.
    #[arg(long)]
    absolute: bool,
    #[arg(long = "K")]
    k: Option<f64>,
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    graph: PathBuf,
    /// Largest allowed component.
    #[arg(long)]
    k_target: Option<usize>,
    /// Build a uniform cover for this family instead.
    #[arg(long, value_enum)]
    cover: Option<CoverKind>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoverKind {
    Path,
    Cycle,
    Grid,
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimand {
    Independence,
    Matching,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long, value_enum)]
    what: Estimand,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long, value_parser = parse_property)]
    property: PropertySpec,
    #[arg(long)]
    epsilon: f64,
    /// Ratio bound the tester is configured for; the graph's own by default.
    #[arg(long = "K")]
    k: Option<f64>,
    #[arg(long)]
    graph: PathBuf,
    /// Deterministic observing test (forest and bipartite only).
    #[arg(long)]
    observing: bool,
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    depth: Option<u32>,
}

#[derive(Args)]
struct ObserveArgs {
    /// Largest subgraph order.
    #[arg(long)]
    s: usize,
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Experiment config file with `scenario`, `params`, `seed`, `output_path`.
    file: Option<PathBuf>,
    /// Scenario name, when no file is given.
    #[arg(long, conflicts_with = "file")]
    name: Option<String>,
    /// Scenario parameters as inline JSON.
    #[arg(long, requires = "name")]
    params: Option<String>,
    /// Write a CSV projection instead of JSON lines.
    #[arg(long)]
    csv: bool,
}

fn parse_property(text: &str) -> std::result::Result<PropertySpec, String> {
    match text {
        "forest" => Ok(PropertySpec::Forest),
        "bipartite" => Ok(PropertySpec::Bipartite),
        "triangle_free" => Ok(PropertySpec::triangle_free()),
        _ => {
            if let Some(k) = text.strip_prefix("k_colorable:") {
                let k = k.parse().map_err(|e| format!("bad k in {text}: {e}"))?;
                return Ok(PropertySpec::KColorable { k });
            }
            serde_json::from_str(text).map_err(|_| {
                format!("unknown property {text}; use forest, bipartite, triangle_free, k_colorable:<k> or JSON")
            })
        }
    }
}

/// Global settings after merging the config file with the flags.
struct Settings {
    seed: u64,
    out: Option<PathBuf>,
}

fn settings(cli: &Cli) -> Result<Settings> {
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<FileConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => FileConfig::default(),
    };
    if let Some(threads) = cli.threads.or(file.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(Settings {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        out: cli.out.clone().or(file.out),
    })
}

fn load(path: &Path) -> Result<WeightedGraph> {
    WeightedGraph::load(path).with_context(|| format!("loading graph {}", path.display()))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}

fn need<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.with_context(|| format!("--{flag} is required for this family"))
}

fn gen(args: &GenArgs, s: &Settings) -> Result<()> {
    let spec = match args.family {
        Family::BinaryTree => GeneratorSpec::BinaryTree {
            depth: need(args.depth, "depth")?,
            beta: args.beta,
        },
        Family::Path => GeneratorSpec::Path { n: need(args.n, "n")? },
        Family::Cycle => GeneratorSpec::Cycle { n: need(args.n, "n")? },
        Family::Grid => GeneratorSpec::Grid {
            rows: need(args.rows, "rows")?,
            cols: need(args.cols, "cols")?,
        },
        Family::RandomRegular => GeneratorSpec::RandomRegular {
            n: need(args.n, "n")?,
            d: args.d,
            seed: s.seed,
        },
        Family::PerturbedUnion => GeneratorSpec::PerturbedUnion {
            n: need(args.n, "n")?,
            seed: s.seed,
            profile: match args.profile {
                Profile::Uniform => WeightProfile::Uniform,
                Profile::Adversarial => WeightProfile::Adversarial,
            },
        },
        Family::OrbitTree => GeneratorSpec::OrbitTree { depth: need(args.depth, "depth")? },
    };
    let mut g = spec.generate()?;
    if let Some(k) = args.lipschitz_k {
        g = random_lipschitz_weights(&g, k, s.seed)?;
    }
    emit(&s.out, &(g.to_json()? + "\n"))
}

fn sample(args: &SampleArgs, s: &Settings) -> Result<()> {
    let g = load(&args.graph)?;
    let keys: Vec<String> = match args.oracle {
        OracleKind::Rn => RnOracle::new(&g)
            .run(&OracleConfig::new(args.r, args.t, args.queries, s.seed)?)
            .iter()
            .map(|q| canonicalize(&q.ball).to_hex())
            .collect(),
        OracleKind::Uniform => (0..args.queries as u64)
            .map(|i| canonicalize(&uniform_query(&g, args.r, &mut query_rng(s.seed, i))).to_hex())
            .collect(),
    };
    let mut counts = std::collections::BTreeMap::new();
    for k in keys {
        *counts.entry(k).or_insert(0u64) += 1;
    }
    let text: String = counts
        .into_iter()
        .map(|(key, count)| json!({ "key": key, "count": count }).to_string() + "\n")
        .collect();
    emit(&s.out, &text)
}

fn stats(args: &StatsArgs, s: &Settings) -> Result<()> {
    let g = load(&args.graph)?;
    if args.entropy {
        return emit_json(
            &s.out,
            &json!({ "units": "nats", "vertex_entropy": vertex_entropy(&g), "edge_entropy": edge_entropy(&g) }),
        );
    }
    let st: BallStatistics = if args.empirical {
        if args.uniform {
            bail!("empirical statistics use the Radon-Nikodym oracle; drop --uniform");
        }
        empirical_stats(&g, &OracleConfig::new(args.r, args.t, args.queries, s.seed)?)
    } else if args.uniform {
        exact_uniform_stats(&g, args.r)
    } else {
        exact_stats(&g, args.r, args.t)
    };
    emit_json(&s.out, &st)
}

fn distance(args: &DistanceArgs, s: &Settings) -> Result<()> {
    if args.rmax == 0 {
        bail!("--rmax must be at least 1");
    }
    let (a, b) = (load(&args.a)?, load(&args.b)?);
    // Statistics are only comparable under a common degree and ratio bound.
    let d = a.degree_bound().max(b.degree_bound());
    let k = a.ratio_bound().max(b.ratio_bound());
    let sa = exact_stats_by_radius(&a.with_bounds(d, k)?, args.rmax, args.t);
    let sb = exact_stats_by_radius(&b.with_bounds(d, k)?, args.rmax, args.t);
    let value = statistical_distance(&sa, &sb, args.rmax)?;
    emit_json(
        &s.out,
        &json!({ "d_s": value, "r_max": args.rmax, "t": args.t, "tail_bound": 0.5f64.powi(args.rmax as i32) }),
    )
}

fn dist(args: &DistArgs, s: &Settings) -> Result<()> {
    let g = load(&args.graph)?;
    if args.absolute {
        let k = args.k.unwrap_or(g.ratio_bound());
        emit_json(&s.out, &absolute_distance(&g, &args.property, k)?)
    } else {
        if args.k.is_some() {
            bail!("--K only applies with --absolute");
        }
        emit_json(&s.out, &distance_to_property(&g, &args.property)?)
    }
}

fn partition(args: &PartitionArgs, s: &Settings) -> Result<()> {
    let g = load(&args.graph)?;
    match args.cover {
        None => emit_json(&s.out, &find_weighted_partition(&g, args.epsilon, args.k_target)?),
        Some(kind) => {
            let family = match kind {
                CoverKind::Path => CoverFamily::Path,
                CoverKind::Cycle => CoverFamily::Cycle,
                CoverKind::Grid => CoverFamily::Grid {
                    rows: need(args.rows, "rows")?,
                    cols: need(args.cols, "cols")?,
                },
            };
            emit_json(&s.out, &build_uniform_cover(&g, args.epsilon, family)?)
        }
    }
}

fn estimate(args: &EstimateArgs, s: &Settings) -> Result<()> {
    let g = load(&args.graph)?;
    let report = match args.what {
        Estimand::Independence => {
            let r = local_independent_set(&g, args.epsilon, s.seed)?;
            json!({
                "value": r.value,
                "witness": r.members,
                "certificate": r.certificate,
                "warning": r.warning,
            })
        }
        Estimand::Matching => {
            let r = estimate_matching(&g, args.epsilon, s.seed)?;
            json!({ "value": r.value, "witness": r.matching, "certificate": r.certificate })
        }
    };
    emit_json(&s.out, &report)
}

fn test(args: &TestArgs, s: &Settings) -> Result<Verdict> {
    let g = load(&args.graph)?;
    let verdict = if args.observing {
        observable_test(&g, &args.property, args.epsilon)?
    } else {
        let cfg = TesterConfig {
            radius: args.radius,
            threshold: args.threshold,
            budget: args.budget,
            depth: args.depth,
        };
        let k = args.k.unwrap_or(g.ratio_bound());
        test_property_with(&g, &args.property, args.epsilon, k, s.seed, &cfg)?
    };
    emit_json(&s.out, &verdict)?;
    Ok(verdict.verdict)
}

fn observe_cmd(args: &ObserveArgs, s: &Settings) -> Result<()> {
    let g = load(&args.graph)?;
    emit_json(&s.out, &observe(&g, args.s)?)
}

fn scenario(args: &ScenarioArgs, s: &Settings) -> Result<()> {
    let cfg = match (&args.file, &args.name) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<ExperimentConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        (None, Some(name)) => {
            let scenario: Scenario = serde_json::from_value(Value::String(name.clone()))
                .with_context(|| format!("unknown scenario {name}"))?;
            let mut cfg = ExperimentConfig::new(scenario, s.seed);
            if let Some(p) = &args.params {
                cfg.params = serde_json::from_str(p).context("parsing --params")?;
            }
            cfg
        }
        (None, None) => bail!("give a config file or --name"),
    };
    let rows = run_scenario(&cfg)?;
    let text = if args.csv { csv_out::project(&rows)? } else { render_jsonl(&rows) };
    let out = s.out.clone().or(cfg.output_path.as_ref().map(PathBuf::from));
    emit(&out, &text)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let s = settings(cli)?;
    match &cli.command {
        Command::Gen(a) => gen(a, &s)?,
        Command::Sample(a) => sample(a, &s)?,
        Command::Stats(a) => stats(a, &s)?,
        Command::Distance(a) => distance(a, &s)?,
        Command::Dist(a) => dist(a, &s)?,
        Command::Partition(a) => partition(a, &s)?,
        Command::Estimate(a) => estimate(a, &s)?,
        Command::Test(a) => {
            if test(a, &s)? == Verdict::Reject {
                return Ok(ExitCode::from(REJECT_EXIT));
            }
        }
        Command::Observe(a) => observe_cmd(a, &s)?,
        Command::Scenario(a) => scenario(a, &s)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
