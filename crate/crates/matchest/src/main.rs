//! Command-line harness: generate / estimate / distinguish / probe /
//! experiment, all reproducible from (argv, seed).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use matchest::analysis::{
    experiment_csv, run_experiment, summarize, wilson_interval, ExperimentConfig, ExperimentModel,
};
use matchest::distinguish::{
    birthday_distinguisher, third_root_distinguisher, two_round_distinguisher, DistinguishVerdict,
    DistinguisherKind, Verdict, DEFAULT_CONSTANT,
};
use matchest::estimator::{estimate_matching_size_with_constant, DEFAULT_SAMPLE_CONSTANT};
use matchest::graph::{exact_maximum_matching, BipartiteMultigraph};
use matchest::instance::{generate, InstanceParams, World, WorldChoice};
use matchest::rng::{self, purpose};
use matchest::tree_probe::{execute_tree_plan, read_plan_file, transcript_to_csv};
use matchest::trials::{run_trials, Parallelism};
use matchest::SCHEMA_VERSION;

#[derive(Parser)]
#[command(
    name = "matchest",
    about = "Non-adaptive matching-size estimation testbed",
    version = concat!(env!("CARGO_PKG_VERSION"), " (schema 1)"),
    disable_version_flag = true
)]
struct Cli {
    /// Print library and schema versions.
    #[arg(long, global = true)]
    version: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one instance: public graph file plus ground-truth sidecar.
    Generate(GenerateArgs),
    /// Run the matching-size estimator over seeded trials.
    Estimate(EstimateArgs),
    /// Run a yes/no distinguisher over seeded mixed-world trials.
    Distinguish(DistinguishArgs),
    /// Execute a committed tree/forest probe plan and dump the transcript.
    Probe(ProbeArgs),
    /// Multi-trial structural-event experiment with CSV output.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum WorldArg {
    Yes,
    No,
    Mixed,
}

impl From<WorldArg> for WorldChoice {
    fn from(w: WorldArg) -> Self {
        match w {
            WorldArg::Yes => WorldChoice::Yes,
            WorldArg::No => WorldChoice::No,
            WorldArg::Mixed => WorldChoice::Mixed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Birthday,
    #[value(name = "third-root")]
    ThirdRoot,
    #[value(name = "two-round")]
    TwoRound,
}

impl From<MethodArg> for DistinguisherKind {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Birthday => DistinguisherKind::Birthday,
            MethodArg::ThirdRoot => DistinguisherKind::ThirdRoot,
            MethodArg::TwoRound => DistinguisherKind::TwoRound,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Flat,
    Tree,
    Forest,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, value_enum)]
    world: WorldArg,
    #[arg(long)]
    seed: u64,
    /// Output path for the public graph; the sidecar goes to `<out>.truth`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    /// Load a public graph from a file instead of generating instances.
    #[arg(long, conflicts_with_all = ["world", "delta_instance"])]
    graph: Option<PathBuf>,
    /// World for generated instances (fresh instance per trial).
    #[arg(long, value_enum, default_value = "yes")]
    world: WorldArg,
    /// Scale parameter n of the estimator.
    #[arg(long)]
    n: u64,
    /// Approximation exponent of the estimator.
    #[arg(long)]
    delta: f64,
    /// Instance exponent when generating (defaults to --delta).
    #[arg(long)]
    delta_instance: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Override the leading constant in the sample-count formula.
    #[arg(long, default_value_t = DEFAULT_SAMPLE_CONSTANT)]
    constant: f64,
    /// Skip the exact matching oracle (emits empty exact_mu).
    #[arg(long)]
    no_mu: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct DistinguishArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Budget constant (birthday and two-round).
    #[arg(long, default_value_t = DEFAULT_CONSTANT)]
    c: f64,
    /// Vertex-sample constant (third-root).
    #[arg(long, default_value_t = DEFAULT_CONSTANT)]
    c1: f64,
    /// Neighbor-sample constant (third-root).
    #[arg(long, default_value_t = DEFAULT_CONSTANT)]
    c2: f64,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ProbeArgs {
    /// Plan file: `root <id|random> delta_bound <D>` then `a b` lines;
    /// blank-line separated blocks form a forest.
    #[arg(long)]
    plan: PathBuf,
    /// Public graph file to probe; omit to generate an instance.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, required_unless_present = "graph")]
    n: Option<u64>,
    #[arg(long, required_unless_present = "graph")]
    delta: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "mixed")]
    world: WorldArg,
    #[arg(long)]
    seed: u64,
    /// Transcript CSV output path (stdout if omitted).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, value_enum, default_value = "flat")]
    model: ModelArg,
    /// Committed plan file for the tree/forest models.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Override the charged-probe budget (default n^(1+epsilon)).
    #[arg(long)]
    q: Option<u64>,
    /// Also run a distinguisher per trial.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Skip the exact matching oracle per trial.
    #[arg(long)]
    no_mu: bool,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    csv: PathBuf,
}

fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).with_context(|| format!("create {p:?}"))?);
            w.write_all(content.as_bytes())?;
            w.flush()?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn load_graph(path: &Path) -> Result<BipartiteMultigraph> {
    let f = File::open(path).with_context(|| format!("open {path:?}"))?;
    Ok(BipartiteMultigraph::read_text(BufReader::new(f))?)
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let params = InstanceParams::new(a.n, a.delta, a.epsilon, a.seed)?;
    let inst = generate(&params, a.world.into());
    let f = File::create(&a.out).with_context(|| format!("create {:?}", a.out))?;
    inst.graph.write_text(BufWriter::new(f))?;
    let truth_path = a.out.with_extension(format!(
        "{}truth",
        a.out
            .extension()
            .map(|e| format!("{}.", e.to_string_lossy()))
            .unwrap_or_default()
    ));
    let f = File::create(&truth_path).with_context(|| format!("create {truth_path:?}"))?;
    inst.write_sidecar(BufWriter::new(f))?;
    println!(
        "generated world={} n={} delta={} k={} g={} d*={} vertices={} edges={} -> {:?} (+ sidecar {:?})",
        inst.world,
        params.n,
        params.delta,
        params.k(),
        params.g(),
        params.d_star(),
        inst.graph.total_count(),
        inst.graph.edge_count(),
        a.out,
        truth_path
    );
    if !params.regime_plausible() {
        eprintln!(
            "note: n^(2e+3d) ln^3 n / n = {:.3} >= 1; the small-observed-core regime is not \
             satisfied at this scale",
            params.regime_ratio()
        );
    }
    Ok(())
}

fn cmd_estimate(a: EstimateArgs) -> Result<()> {
    struct Row {
        seed: u64,
        estimate: u64,
        mu: Option<u64>,
        charged: u64,
    }
    let rows: Vec<Row> = match &a.graph {
        Some(path) => {
            let g = load_graph(path)?;
            let mu = (!a.no_mu).then(|| exact_maximum_matching(&g).size() as u64);
            run_trials(a.trials, Parallelism::default(), |t| {
                let mut r = rng::stream(a.seed, purpose::ESTIMATOR, t);
                let res =
                    estimate_matching_size_with_constant(&g, a.n, a.delta, a.constant, &mut r)
                        .expect("delta validated by CLI");
                Row {
                    seed: rng::derive_seed(a.seed, purpose::ESTIMATOR, t),
                    estimate: res.estimate,
                    mu,
                    charged: res.charged_queries,
                }
            })
        }
        None => {
            let delta_inst = a.delta_instance.unwrap_or(a.delta);
            let base = InstanceParams::new(a.n, delta_inst, a.epsilon, a.seed)?;
            run_trials(a.trials, Parallelism::default(), |t| {
                let mut params = base;
                params.seed = rng::derive_seed(a.seed, purpose::INSTANCE, t);
                let inst = generate(&params, a.world.into());
                let mu = (!a.no_mu).then(|| exact_maximum_matching(&inst.graph).size() as u64);
                let mut r = rng::stream(a.seed, purpose::ESTIMATOR, t);
                let res = estimate_matching_size_with_constant(
                    &inst.graph,
                    a.n,
                    a.delta,
                    a.constant,
                    &mut r,
                )
                .expect("delta validated by CLI");
                Row {
                    seed: params.seed,
                    estimate: res.estimate,
                    mu,
                    charged: res.charged_queries,
                }
            })
        }
    };
    let mut out = String::from("seed,estimate,exact_mu,charged_queries\n");
    for row in &rows {
        let mu = row.mu.map(|m| m.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.seed, row.estimate, mu, row.charged
        ));
    }
    write_output(a.csv.as_deref(), &out)?;
    let within: Vec<&Row> = rows.iter().filter(|r| r.mu.is_some()).collect();
    if !within.is_empty() {
        let ok = within
            .iter()
            .filter(|r| {
                let mu = r.mu.unwrap() as f64;
                let lo = (a.n as f64).powf(-a.delta) * mu / 2.0;
                (r.estimate as f64) >= lo && r.estimate <= r.mu.unwrap()
            })
            .count();
        eprintln!(
            "estimate within [n^-delta*mu/2, mu] in {ok}/{} trials; charged {} per trial",
            within.len(),
            rows[0].charged
        );
    }
    Ok(())
}

fn cmd_distinguish(a: DistinguishArgs) -> Result<()> {
    let base = InstanceParams::new(a.n, a.delta, a.epsilon, a.seed)?;
    let kind: DistinguisherKind = a.method.into();
    if kind == DistinguisherKind::ThirdRoot && base.k() != base.g() * base.g() {
        bail!(
            "third-root distinguisher requires delta = 1/3 (k = g^2); got k={}, g={}",
            base.k(),
            base.g()
        );
    }
    struct Row {
        trial: u64,
        world: World,
        verdict: DistinguishVerdict,
    }
    let rows: Vec<Row> = run_trials(a.trials, Parallelism::default(), |t| {
        let mut params = base;
        params.seed = rng::derive_seed(a.seed, purpose::INSTANCE, t);
        let inst = generate(&params, WorldChoice::Mixed);
        let mut r = rng::stream(a.seed, purpose::DISTINGUISHER, t);
        let verdict = match kind {
            DistinguisherKind::Birthday => {
                birthday_distinguisher(&inst.graph, &params, a.c, &mut r)
            }
            DistinguisherKind::ThirdRoot => {
                third_root_distinguisher(&inst.graph, &params, a.c1, a.c2, &mut r)
                    .expect("delta checked above")
            }
            DistinguisherKind::TwoRound => {
                two_round_distinguisher(&inst.graph, &params, a.c, &mut r)
            }
        };
        Row {
            trial: t,
            world: inst.world,
            verdict,
        }
    });

    let mut out = String::from("trial,world,verdict,correct,charged_queries,evidence\n");
    for row in &rows {
        let expect = match row.world {
            World::Yes => Verdict::Yes,
            World::No => Verdict::No,
        };
        out.push_str(&format!(
            "{},{},{},{},{},\"{}\"\n",
            row.trial,
            row.world,
            row.verdict.verdict,
            row.verdict.verdict == expect,
            row.verdict.charged_queries,
            row.verdict.evidence
        ));
    }
    write_output(a.csv.as_deref(), &out)?;

    for world in [World::Yes, World::No] {
        let expect = match world {
            World::Yes => Verdict::Yes,
            World::No => Verdict::No,
        };
        let in_world: Vec<&Row> = rows.iter().filter(|r| r.world == world).collect();
        let correct = in_world
            .iter()
            .filter(|r| r.verdict.verdict == expect)
            .count() as u64;
        let (lo, hi) = wilson_interval(correct, in_world.len() as u64, 1.96);
        eprintln!(
            "{world}: {correct}/{} correct, Wilson 95% [{lo:.3}, {hi:.3}]",
            in_world.len()
        );
    }
    Ok(())
}

fn cmd_probe(a: ProbeArgs) -> Result<()> {
    let f = File::open(&a.plan).with_context(|| format!("open {:?}", a.plan))?;
    let plans = read_plan_file(BufReader::new(f))?;
    if plans.is_empty() {
        bail!("plan file {:?} holds no plans", a.plan);
    }
    let graph = match &a.graph {
        Some(path) => load_graph(path)?,
        None => {
            let params = InstanceParams::new(a.n.unwrap(), a.delta.unwrap(), a.epsilon, a.seed)?;
            generate(&params, a.world.into()).graph
        }
    };
    let mut out = String::new();
    let mut root_rng = rng::stream(a.seed, purpose::TREE_ROOT, 0);
    let mut total = 0u64;
    for plan in &plans {
        let t = execute_tree_plan(&graph, plan, &mut root_rng)?;
        total += t.charged_queries;
        out.push_str(&transcript_to_csv(plan, &t));
    }
    write_output(a.csv.as_deref(), &out)?;
    eprintln!("executed {} plan(s), charged {total} queries", plans.len());
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs) -> Result<()> {
    let params = InstanceParams::new(a.n, a.delta, a.epsilon, a.seed)?;
    let mut cfg = ExperimentConfig::new(params, a.trials);
    cfg.model = match a.model {
        ModelArg::Flat => ExperimentModel::Flat,
        ModelArg::Tree => ExperimentModel::Tree,
        ModelArg::Forest => ExperimentModel::Forest,
    };
    if let Some(q) = a.q {
        cfg.budget_q = q;
    }
    cfg.method = a.method.map(Into::into);
    cfg.compute_mu = !a.no_mu;
    if !matches!(cfg.model, ExperimentModel::Flat) {
        let path = a
            .plan
            .as_ref()
            .context("--plan is required for tree/forest models")?;
        let f = File::open(path).with_context(|| format!("open {path:?}"))?;
        cfg.plans = read_plan_file(BufReader::new(f))?;
        if cfg.plans.is_empty() {
            bail!("plan file {path:?} holds no plans");
        }
        if matches!(cfg.model, ExperimentModel::Tree) && cfg.plans.len() != 1 {
            bail!(
                "tree model expects exactly one plan block, found {}",
                cfg.plans.len()
            );
        }
    }
    let records = run_experiment(&cfg);
    write_output(Some(&a.csv), &experiment_csv(&params, &records))?;
    let s = summarize(&records);
    eprint!(
        "trials={} star_ok_rate={:.3} mean_obs_core_edges={:.2}",
        s.trials, s.star_ok_rate, s.mean_observed_core_edges
    );
    match s.verdict_accuracy {
        Some(acc) => eprintln!(" verdict_accuracy={acc:.3}"),
        None => eprintln!(),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.version {
        println!(
            "matchest {} schema {}",
            env!("CARGO_PKG_VERSION"),
            SCHEMA_VERSION
        );
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: a subcommand is required (try --help)");
        return ExitCode::from(2);
    };
    let result = match command {
        Command::Generate(a) => cmd_generate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Distinguish(a) => cmd_distinguish(a),
        Command::Probe(a) => cmd_probe(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
