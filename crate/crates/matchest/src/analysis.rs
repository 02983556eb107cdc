//! Structural-event metrics over observed graphs, and the multi-trial
//! experiment runner with CSV reporting.
//!
//! A queried vertex is happy when its answered probes reveal at least one
//! core edge. With few enough queries the observed core should decompose
//! into a disjoint union of stars: happy centers pointing at petals that
//! carry no other observed core edge. The report counts the three possible
//! violations (an edge into a happy vertex, a petal shared by two centers,
//! an observed core multi-edge), the census of edges whose petal received
//! at least tau = 2^i probes, and the maximum observed in-degree from D
//! into the core.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;

use crate::distinguish::{
    birthday_distinguisher, third_root_distinguisher, two_round_distinguisher, DistinguisherKind,
    Verdict, DEFAULT_CONSTANT,
};
use crate::graph::exact_maximum_matching;
use crate::instance::{generate, Class, InstanceParams, LabeledInstance, World, WorldChoice};
use crate::query::{answer_plan, observed_graph_from, ObservedGraph, QueryPlan};
use crate::rng::{self, purpose};
use crate::tree_probe::{execute_tree_plan, ProbeTranscript, TreeProbePlan};
use crate::trials::{run_trials, Parallelism};

/// Structural report over one observed graph against its ground truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreStructureReport {
    pub observed_core_edge_count: u64,
    pub happy_vertex_count: u64,
    pub star_union_ok: bool,
    /// Core edges whose incoming endpoint is itself happy.
    pub happy_endpoint_edges: u64,
    /// Unordered pairs of distinct centers observing the same petal.
    pub shared_petal_pairs: u64,
    /// Repeated observations of the same (source, target) core pair.
    pub observed_multi_edges: u64,
    /// (tau = 2^i, count of core edges with a tau-heavy petal) for integer
    /// i in [alpha, beta].
    pub heavy_census: Vec<(u64, u64)>,
    /// Maximum observed in-degree from D into any core vertex.
    pub max_d_indegree: u64,
}

/// The census exponent range: alpha = log2(n^eps * ln n) and
/// beta = log2(16 * n^(2*eps+delta) * ln^2 n), inclusive on integers.
pub fn census_exponent_range(params: &InstanceParams) -> (f64, f64) {
    let n = params.n as f64;
    let alpha = (n.powf(params.epsilon) * n.ln()).log2();
    let beta = (16.0 * n.powf(2.0 * params.epsilon + params.delta) * n.ln() * n.ln()).log2();
    (alpha, beta)
}

/// The census bound at level tau = 2^i: 2^-i * 8 * n^(2*eps+delta) * ln^2 n.
pub fn census_bound(params: &InstanceParams, i: u32) -> f64 {
    let n = params.n as f64;
    8.0 * n.powf(2.0 * params.epsilon + params.delta) * n.ln() * n.ln() / (1u64 << i) as f64
}

/// Analyzes the observed core structure. `probe_counts` holds the number of
/// charged probes aimed at each vertex under the committed plan.
pub fn analyze_observed_core(
    obs: &ObservedGraph,
    inst: &LabeledInstance,
    probe_counts: &[u64],
) -> CoreStructureReport {
    let core_edges: Vec<(u32, u32)> = obs
        .edges
        .iter()
        .filter(|e| inst.is_core(e.source) && inst.is_core(e.target))
        .map(|e| (e.source, e.target))
        .collect();

    let mut happy: Vec<u32> = core_edges.iter().map(|&(s, _)| s).collect();
    happy.sort_unstable();
    happy.dedup();
    let is_happy = |v: u32| happy.binary_search(&v).is_ok();

    let happy_endpoint_edges = core_edges.iter().filter(|&&(_, t)| is_happy(t)).count() as u64;

    let mut sources_per_target: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut pair_multiplicity: HashMap<(u32, u32), u64> = HashMap::new();
    for &(s, t) in &core_edges {
        sources_per_target.entry(t).or_default().push(s);
        *pair_multiplicity.entry((s, t)).or_insert(0) += 1;
    }
    let shared_petal_pairs: u64 = sources_per_target
        .values()
        .map(|sources| {
            let mut distinct = sources.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let d = distinct.len() as u64;
            d * (d - 1) / 2
        })
        .sum();
    let observed_multi_edges: u64 = pair_multiplicity.values().map(|&m| m - 1).sum();

    let (alpha, beta) = census_exponent_range(&inst.params);
    let mut heavy_census = Vec::new();
    if beta >= alpha && beta >= 0.0 {
        let lo = alpha.ceil().max(0.0) as u32;
        let hi = (beta.floor() as u32).min(62);
        for i in lo..=hi {
            let tau = 1u64 << i;
            let count = core_edges
                .iter()
                .filter(|&&(_, t)| probe_counts[t as usize] >= tau)
                .count() as u64;
            heavy_census.push((tau, count));
        }
    }

    let max_d_indegree = d_indegree_check(obs, inst).max;

    CoreStructureReport {
        observed_core_edge_count: core_edges.len() as u64,
        happy_vertex_count: happy.len() as u64,
        star_union_ok: happy_endpoint_edges == 0
            && shared_petal_pairs == 0
            && observed_multi_edges == 0,
        happy_endpoint_edges,
        shared_petal_pairs,
        observed_multi_edges,
        heavy_census,
        max_d_indegree,
    }
}

/// Observed in-degree from D into core vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DInDegreeReport {
    pub max: u64,
    /// (in-degree, number of core vertices with that in-degree), sorted,
    /// zero omitted.
    pub histogram: Vec<(u64, u64)>,
}

pub fn d_indegree_check(obs: &ObservedGraph, inst: &LabeledInstance) -> DInDegreeReport {
    let mut indeg: HashMap<u32, u64> = HashMap::new();
    for e in &obs.edges {
        if inst.class(e.source) == Class::D && inst.is_core(e.target) {
            *indeg.entry(e.target).or_insert(0) += 1;
        }
    }
    let max = indeg.values().copied().max().unwrap_or(0);
    let mut histogram: HashMap<u64, u64> = HashMap::new();
    for &d in indeg.values() {
        *histogram.entry(d).or_insert(0) += 1;
    }
    let mut histogram: Vec<(u64, u64)> = histogram.into_iter().collect();
    histogram.sort_unstable();
    DInDegreeReport { max, histogram }
}

/// Counts directed 2-paths in a query tree whose both edges are core edges.
pub fn core_two_path_count(
    plan: &TreeProbePlan,
    t: &ProbeTranscript,
    inst: &LabeledInstance,
) -> u64 {
    // Instruction idx (0-based) discovers slot idx+2; its parent edge is
    // the instruction that discovered slot a (none when a is the root).
    let edge_is_core = |idx: usize| -> bool {
        let (a, _) = plan.instructions[idx];
        match (t.discovered[a as usize - 1], t.discovered[idx + 1]) {
            (Some(s), Some(tg)) => inst.is_core(s) && inst.is_core(tg),
            _ => false,
        }
    };
    let mut count = 0;
    for (idx, &(a, _)) in plan.instructions.iter().enumerate() {
        if a >= 2 && edge_is_core(idx) && edge_is_core(a as usize - 2) {
            count += 1;
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentModel {
    Flat,
    Tree,
    Forest,
}

/// Configuration for a multi-trial experiment. Each trial draws a world
/// from the fair mixture, commits one plan, and reports the structural
/// events against the hidden ground truth.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub params: InstanceParams,
    pub model: ExperimentModel,
    /// Charged-probe budget; the flat uniform plan uses exactly this many.
    pub budget_q: u64,
    pub trials: u64,
    /// Committed plans for the tree/forest models.
    pub plans: Vec<TreeProbePlan>,
    pub method: Option<DistinguisherKind>,
    /// Skip the exact matching oracle on very large instances.
    pub compute_mu: bool,
    pub parallelism: Parallelism,
}

impl ExperimentConfig {
    pub fn new(params: InstanceParams, trials: u64) -> Self {
        Self {
            budget_q: params.budget_q(),
            params,
            model: ExperimentModel::Flat,
            trials,
            plans: Vec::new(),
            method: None,
            compute_mu: true,
            parallelism: Parallelism::default(),
        }
    }
}

/// One CSV row of an experiment.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial: u64,
    pub world: World,
    pub charged: u64,
    pub report: CoreStructureReport,
    pub mu_exact: Option<u64>,
    pub verdict: Option<Verdict>,
    pub verdict_correct: Option<bool>,
    pub core_two_paths: Option<u64>,
}

#[derive(Debug, Clone, Copy)]
pub struct ExperimentSummary {
    pub trials: u64,
    pub star_ok_rate: f64,
    pub mean_observed_core_edges: f64,
    pub verdict_accuracy: Option<f64>,
}

/// The canonical committed plan for flat experiments: `q` probes, vertices
/// uniform over all labels, indices uniform over [1, d*]. Adversarial plans
/// enter through the tree/forest models instead.
pub fn flat_uniform_plan(params: &InstanceParams, q: u64, rng: &mut impl Rng) -> QueryPlan {
    let total = params.total_count();
    let d_star = params.d_star() as u32;
    let mut plan = QueryPlan::default();
    for _ in 0..q {
        plan.push(rng.random_range(0..total), rng.random_range(1..=d_star));
    }
    plan
}

fn run_one_trial(cfg: &ExperimentConfig, trial: u64) -> TrialRecord {
    let mut params = cfg.params;
    params.seed = rng::derive_seed(cfg.params.seed, purpose::INSTANCE, trial);
    let inst = generate(&params, WorldChoice::Mixed);
    let total = inst.graph.total_count();

    let (obs, charged, probe_counts, core_two_paths) = match cfg.model {
        ExperimentModel::Flat => {
            let mut plan_rng = rng::stream(cfg.params.seed, purpose::FLAT_PLAN, trial);
            let plan = flat_uniform_plan(&params, cfg.budget_q, &mut plan_rng);
            assert_eq!(plan.charged_queries(), cfg.budget_q);
            let answers = answer_plan(&inst.graph, &plan).expect("plan in range");
            let obs = observed_graph_from(&plan, &answers).expect("answers match plan");
            let mut counts = vec![0u64; total as usize];
            for p in &plan.probes {
                counts[p.vertex as usize] += 1;
            }
            (obs, plan.charged_queries(), counts, None)
        }
        ExperimentModel::Tree | ExperimentModel::Forest => {
            let mut root_rng = rng::stream(cfg.params.seed, purpose::TREE_ROOT, trial);
            let mut edges = Vec::new();
            let mut queried = Vec::new();
            let mut counts = vec![0u64; total as usize];
            let mut charged = 0u64;
            let mut two_paths = 0u64;
            for plan in &cfg.plans {
                let t = execute_tree_plan(&inst.graph, plan, &mut root_rng)
                    .expect("plan validated at load time");
                charged += t.charged_queries;
                two_paths += core_two_path_count(plan, &t, &inst);
                for &(a, _) in &plan.instructions {
                    if let Some(v) = t.discovered[a as usize - 1] {
                        counts[v as usize] += 1;
                    }
                }
                let o = crate::tree_probe::transcript_to_observed_graph(&t);
                edges.extend(o.edges);
                queried.extend(o.queried);
            }
            queried.sort_unstable();
            queried.dedup();
            (
                ObservedGraph { edges, queried },
                charged,
                counts,
                Some(two_paths),
            )
        }
    };

    let report = analyze_observed_core(&obs, &inst, &probe_counts);
    let mu_exact = cfg
        .compute_mu
        .then(|| exact_maximum_matching(&inst.graph).size() as u64);

    let (verdict, verdict_correct) = match cfg.method {
        None => (None, None),
        Some(kind) => {
            let mut r = rng::stream(cfg.params.seed, purpose::DISTINGUISHER, trial);
            let v = match kind {
                DistinguisherKind::Birthday => {
                    birthday_distinguisher(&inst.graph, &params, DEFAULT_CONSTANT, &mut r)
                }
                DistinguisherKind::ThirdRoot => third_root_distinguisher(
                    &inst.graph,
                    &params,
                    DEFAULT_CONSTANT,
                    DEFAULT_CONSTANT,
                    &mut r,
                )
                .expect("third-root experiment requires delta = 1/3"),
                DistinguisherKind::TwoRound => {
                    two_round_distinguisher(&inst.graph, &params, DEFAULT_CONSTANT, &mut r)
                }
            };
            let expect = match inst.world {
                World::Yes => Verdict::Yes,
                World::No => Verdict::No,
            };
            (Some(v.verdict), Some(v.verdict == expect))
        }
    };

    TrialRecord {
        trial,
        world: inst.world,
        charged,
        report,
        mu_exact,
        verdict,
        verdict_correct,
        core_two_paths,
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Vec<TrialRecord> {
    run_trials(cfg.trials, cfg.parallelism, |t| run_one_trial(cfg, t))
}

pub fn summarize(records: &[TrialRecord]) -> ExperimentSummary {
    let trials = records.len() as u64;
    let star_ok = records.iter().filter(|r| r.report.star_union_ok).count() as f64;
    let mean_core = records
        .iter()
        .map(|r| r.report.observed_core_edge_count as f64)
        .sum::<f64>()
        / (trials.max(1) as f64);
    let decided: Vec<&TrialRecord> = records.iter().filter(|r| r.verdict.is_some()).collect();
    let verdict_accuracy = if decided.is_empty() {
        None
    } else {
        let correct = decided
            .iter()
            .filter(|r| r.verdict_correct == Some(true))
            .count();
        Some(correct as f64 / decided.len() as f64)
    };
    ExperimentSummary {
        trials,
        star_ok_rate: star_ok / (trials.max(1) as f64),
        mean_observed_core_edges: mean_core,
        verdict_accuracy,
    }
}

pub const EXPERIMENT_CSV_HEADER: &str = "trial,world,n,delta,epsilon,q,obs_core_edges,happy,\
star_ok,multi_edge_viol,shared_petal_viol,happy_endpoint_viol,max_d_indeg,mu_exact,verdict,\
verdict_correct";

/// Renders records in the fixed experiment CSV schema.
pub fn experiment_csv(params: &InstanceParams, records: &[TrialRecord]) -> String {
    let mut out = String::from(EXPERIMENT_CSV_HEADER);
    out.push('\n');
    for r in records {
        let mu = r.mu_exact.map(|m| m.to_string()).unwrap_or_default();
        let verdict = r.verdict.map(|v| v.to_string()).unwrap_or_default();
        let correct = r.verdict_correct.map(|c| c.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.trial,
            r.world,
            params.n,
            params.delta,
            params.epsilon,
            r.charged,
            r.report.observed_core_edge_count,
            r.report.happy_vertex_count,
            r.report.star_union_ok,
            r.report.observed_multi_edges,
            r.report.shared_petal_pairs,
            r.report.happy_endpoint_edges,
            r.report.max_d_indegree,
            mu,
            verdict,
            correct,
        )
        .unwrap();
    }
    out
}

/// Wilson score interval for a binomial rate at confidence z (1.96 = 95%).
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}
