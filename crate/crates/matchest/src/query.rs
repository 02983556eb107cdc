//! The non-adaptive adjacency-list oracle.
//!
//! Clients commit to a whole [`QueryPlan`] up front and receive every answer
//! in one batch; there is no incremental query entry point, so a flat plan
//! cannot depend on any answer by construction. A probe `(v, i)` asks for
//! the i-th neighbor (1-based) of `v` and returns NULL when `i > deg(v)`.
//! Degree probes are answered exactly and are not charged against the
//! neighbor-probe budget.

use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::graph::BipartiteMultigraph;

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("probe on out-of-range vertex id {vertex} (total {total})")]
    VertexOutOfRange { vertex: u32, total: u32 },
    #[error("probe index must be >= 1 (vertex {vertex})")]
    ZeroIndex { vertex: u32 },
    #[error("answer set has {answers} answers for {probes} probes")]
    Mismatched { answers: usize, probes: usize },
}

/// One neighbor probe: (vertex, 1-based index).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Probe {
    pub vertex: u32,
    pub index: u32,
}

/// A fixed-in-advance batch of probes. Plan content is a pure function of
/// parameters and a seed; nothing here can observe an oracle answer.
#[derive(Debug, Clone, Default)]
pub struct QueryPlan {
    pub probes: Vec<Probe>,
    pub degree_probes: Vec<u32>,
}

impl QueryPlan {
    /// The charged query count q. Degree probes are free.
    pub fn charged_queries(&self) -> u64 {
        self.probes.len() as u64
    }

    pub fn push(&mut self, vertex: u32, index: u32) {
        self.probes.push(Probe { vertex, index });
    }

    /// Serializes the plan with its answers as `vertex,index,answer` rows.
    pub fn to_csv(&self, answers: &QueryAnswerSet) -> String {
        let mut out = String::from("vertex,index,answer\n");
        for (p, a) in self.probes.iter().zip(&answers.answers) {
            match a {
                Some(u) => writeln!(out, "{},{},{}", p.vertex, p.index, u).unwrap(),
                None => writeln!(out, "{},{},NULL", p.vertex, p.index).unwrap(),
            }
        }
        out
    }
}

/// Batch answers: one entry per probe (None = NULL), plus exact degrees for
/// every requested degree probe.
#[derive(Debug, Clone)]
pub struct QueryAnswerSet {
    pub answers: Vec<Option<u32>>,
    /// Degrees aligned with the plan's `degree_probes`.
    pub degrees: Vec<u32>,
}

impl QueryAnswerSet {
    /// Looks up a degree answered by this set. Panics if `v` was not probed;
    /// degree information must flow through the oracle.
    pub fn degree_of(&self, plan: &QueryPlan, v: u32) -> u32 {
        let pos = plan
            .degree_probes
            .iter()
            .position(|&u| u == v)
            .expect("degree was not probed for vertex");
        self.degrees[pos]
    }
}

/// Answers a whole plan. Read-only on the graph; (g, plan) -> answers is a
/// pure function.
pub fn answer_plan(
    g: &BipartiteMultigraph,
    plan: &QueryPlan,
) -> Result<QueryAnswerSet, QueryError> {
    let total = g.total_count();
    let mut answers = Vec::with_capacity(plan.probes.len());
    for p in &plan.probes {
        if p.vertex >= total {
            return Err(QueryError::VertexOutOfRange {
                vertex: p.vertex,
                total,
            });
        }
        if p.index == 0 {
            return Err(QueryError::ZeroIndex { vertex: p.vertex });
        }
        answers.push(g.neighbor_at(p.vertex, p.index));
    }
    let mut degrees = Vec::with_capacity(plan.degree_probes.len());
    for &v in &plan.degree_probes {
        if v >= total {
            return Err(QueryError::VertexOutOfRange { vertex: v, total });
        }
        degrees.push(g.degree(v));
    }
    Ok(QueryAnswerSet { answers, degrees })
}

/// A directed observed edge: out of the probed vertex, labeled with the
/// position in its adjacency list that revealed it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObservedEdge {
    pub source: u32,
    pub target: u32,
    pub position: u32,
}

/// The directed, position-labeled subgraph revealed by a plan's answers.
#[derive(Debug, Clone, Default)]
pub struct ObservedGraph {
    pub edges: Vec<ObservedEdge>,
    /// Sorted, deduplicated set of vertices that received neighbor probes.
    pub queried: Vec<u32>,
}

impl ObservedGraph {
    pub fn was_queried(&self, v: u32) -> bool {
        self.queried.binary_search(&v).is_ok()
    }
}

/// Builds the observed graph from a plan and its answers. Repeated probes of
/// the same (vertex, position) contribute a single edge, keeping at most one
/// edge per (source, position); each repeat is still charged.
pub fn observed_graph_from(
    plan: &QueryPlan,
    answers: &QueryAnswerSet,
) -> Result<ObservedGraph, QueryError> {
    if plan.probes.len() != answers.answers.len() {
        return Err(QueryError::Mismatched {
            answers: answers.answers.len(),
            probes: plan.probes.len(),
        });
    }
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    let mut queried: Vec<u32> = plan.probes.iter().map(|p| p.vertex).collect();
    queried.sort_unstable();
    queried.dedup();
    for (p, a) in plan.probes.iter().zip(&answers.answers) {
        if let Some(target) = a {
            if seen.insert((p.vertex, p.index)) {
                edges.push(ObservedEdge {
                    source: p.vertex,
                    target: *target,
                    position: p.index,
                });
            }
        }
    }
    Ok(ObservedGraph { edges, queried })
}

/// Query accounting against a budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryBudgetReport {
    pub charged_queries: u64,
    pub budget: u64,
    pub within_budget: bool,
}

impl QueryBudgetReport {
    pub fn new(charged_queries: u64, budget: u64) -> Self {
        Self {
            charged_queries,
            budget,
            within_budget: charged_queries <= budget,
        }
    }
}

/// Per-vertex sampling intensity for the random-neighbor simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleSpec {
    /// A fixed number of random-neighbor samples per vertex.
    PerVertex(u32),
    /// Each vertex is sampled once with the given probability (the q < 1
    /// branch of the estimator).
    Bernoulli(f64),
}

/// The probes for one requested sample: one probe per degree-guess level
/// j = 0..=ceil(log2(max_degree_bound)), each with an index uniform in
/// [1, 2^j]. The level matching the true degree yields a uniform random
/// neighbor after NULL filtering.
#[derive(Debug, Clone)]
pub struct RandomNeighborPlan {
    pub plan: QueryPlan,
    /// Number of guess levels per sample.
    pub levels: u32,
    /// (vertex, sample count) in plan layout order; probes are laid out
    /// vertex-major, sample-major, level-minor.
    pub groups: Vec<(u32, u32)>,
}

/// Number of guess levels for a degree bound: j = 0..=ceil(log2(bound)).
pub fn guess_levels(max_degree_bound: u32) -> u32 {
    assert!(max_degree_bound >= 1, "max_degree_bound must be >= 1");
    (max_degree_bound as u64)
        .next_power_of_two()
        .trailing_zeros()
        + 1
}

/// The level whose index range [1, 2^j] tightly covers a degree:
/// 2^(j-1) < deg <= 2^j. Degree 0 has no level.
pub fn level_for_degree(degree: u32) -> Option<u32> {
    if degree == 0 {
        None
    } else {
        Some((degree as u64).next_power_of_two().trailing_zeros())
    }
}

/// Builds the degree-guessing random-neighbor plan for `vertices`. The plan
/// also requests (free) degree probes for every vertex so the extraction
/// step can identify each vertex's true level from oracle answers alone.
pub fn build_random_neighbor_plan(
    vertices: &[u32],
    spec: SampleSpec,
    max_degree_bound: u32,
    rng: &mut impl Rng,
) -> RandomNeighborPlan {
    let levels = guess_levels(max_degree_bound);
    let mut plan = QueryPlan::default();
    let mut groups = Vec::with_capacity(vertices.len());
    for &v in vertices {
        let samples = match spec {
            SampleSpec::PerVertex(s) => s,
            SampleSpec::Bernoulli(p) => u32::from(rng.random_bool(p.clamp(0.0, 1.0))),
        };
        groups.push((v, samples));
        for _ in 0..samples {
            for j in 0..levels {
                plan.push(v, rng.random_range(1..=(1u32 << j)));
            }
        }
    }
    plan.degree_probes = vertices.to_vec();
    RandomNeighborPlan {
        plan,
        levels,
        groups,
    }
}

/// Filters a random-neighbor plan's answers down to the retained samples:
/// for each vertex only probes at the level matching its true degree count,
/// and only non-NULL ones. Each retained entry is a uniformly random
/// neighbor of its vertex, independent across entries.
pub fn extract_random_neighbor_answers(
    rn: &RandomNeighborPlan,
    answers: &QueryAnswerSet,
) -> Vec<(u32, u32)> {
    let mut retained = Vec::new();
    let mut cursor = 0usize;
    for (gi, &(v, samples)) in rn.groups.iter().enumerate() {
        debug_assert_eq!(rn.plan.degree_probes[gi], v);
        let degree = answers.degrees[gi];
        let target = level_for_degree(degree);
        for _ in 0..samples {
            if let Some(j) = target {
                let slot = cursor + j as usize;
                if let Some(neighbor) = answers.answers[slot] {
                    retained.push((v, neighbor));
                }
            }
            cursor += rn.levels as usize;
        }
    }
    retained
}

/// Streaming equivalent of build + answer + extract for large plans: probes
/// are generated, answered, and filtered one at a time without materializing
/// the plan. The probe sequence is a pure function of the RNG stream, so the
/// plan is still fixed before any answer is consumed; `on_retained` receives
/// exactly what [`extract_random_neighbor_answers`] would retain, in order.
/// Returns (charged probes, retained count).
pub fn stream_random_neighbor_samples(
    g: &BipartiteMultigraph,
    vertices: impl Iterator<Item = u32>,
    spec: SampleSpec,
    max_degree_bound: u32,
    rng: &mut impl Rng,
    mut on_retained: impl FnMut(u32, u32),
) -> (u64, u64) {
    let levels = guess_levels(max_degree_bound);
    let mut charged = 0u64;
    let mut kept = 0u64;
    for v in vertices {
        let samples = match spec {
            SampleSpec::PerVertex(s) => s,
            SampleSpec::Bernoulli(p) => u32::from(rng.random_bool(p.clamp(0.0, 1.0))),
        };
        let degree = g.degree(v);
        let target = level_for_degree(degree);
        for _ in 0..samples {
            for j in 0..levels {
                let index = rng.random_range(1..=(1u32 << j));
                charged += 1;
                if target == Some(j) && index <= degree {
                    // Non-NULL answer at the vertex's own level.
                    on_retained(v, g.adjacency(v)[index as usize - 1]);
                    kept += 1;
                }
            }
        }
    }
    (charged, kept)
}
