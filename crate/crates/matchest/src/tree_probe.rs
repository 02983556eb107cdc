//! Executor for the non-adaptive tree probe model and its forest
//! generalization.
//!
//! A plan commits, before any answer is seen, to a root and a sequence of
//! instructions `(a_i, b_i)` with `a_i <= i`: step i sets the newly
//! discovered slot `u_(i+1)` to the b_i-th neighbor of the vertex in slot
//! `a_i`. A failed probe (index past the degree, or a probe on a failed
//! slot) yields the absorbing null value, and the degrees of all vertices
//! are revealed only after execution.

use std::fmt::Write as _;
use std::io::BufRead;

use rand::Rng;
use thiserror::Error;

use crate::graph::BipartiteMultigraph;
use crate::query::{ObservedEdge, ObservedGraph};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("instruction {step}: parent slot {parent} exceeds discovered slot {limit}")]
    ParentAhead {
        step: usize,
        parent: u32,
        limit: usize,
    },
    #[error("instruction {step}: position {position} outside [1, {bound}]")]
    PositionOutOfBounds {
        step: usize,
        position: u32,
        bound: u32,
    },
    #[error("root vertex {root} out of range (total {total})")]
    RootOutOfRange { root: u32, total: u32 },
    #[error("malformed plan file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootChoice {
    Fixed(u32),
    UniformRandom,
}

/// A committed tree exploration: root selection plus instruction sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeProbePlan {
    pub root: RootChoice,
    /// (a_i, b_i) pairs, in order; a_i is a 1-based slot index.
    pub instructions: Vec<(u32, u32)>,
    /// Declared degree bound limiting every b_i.
    pub delta_bound: u32,
}

impl TreeProbePlan {
    pub fn validate(&self) -> Result<(), PlanError> {
        for (idx, &(a, b)) in self.instructions.iter().enumerate() {
            let step = idx + 1;
            if a == 0 || a as usize > step {
                return Err(PlanError::ParentAhead {
                    step,
                    parent: a,
                    limit: step,
                });
            }
            if b == 0 || b > self.delta_bound {
                return Err(PlanError::PositionOutOfBounds {
                    step,
                    position: b,
                    bound: self.delta_bound,
                });
            }
        }
        Ok(())
    }

    pub fn charged_queries(&self) -> u64 {
        self.instructions.len() as u64
    }
}

/// One realized edge of the query tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TranscriptEdge {
    /// Slot index of the expanded vertex (1-based).
    pub parent_slot: u32,
    pub source: u32,
    pub target: u32,
    /// Position in the source's adjacency list.
    pub position: u32,
}

/// Everything an execution reveals: the discovered slot sequence (None is
/// the absorbing null), the realized edges, and the post-hoc degrees of all
/// vertices.
#[derive(Debug, Clone)]
pub struct ProbeTranscript {
    /// Slots u_1..u_(q+1); slot 1 is the root.
    pub discovered: Vec<Option<u32>>,
    pub edges: Vec<TranscriptEdge>,
    pub revealed_degrees: Vec<u32>,
    pub charged_queries: u64,
}

impl ProbeTranscript {
    /// Null absorption invariant: a probe on a failed slot never succeeds.
    pub fn null_absorption_holds(&self, plan: &TreeProbePlan) -> bool {
        plan.instructions.iter().enumerate().all(|(idx, &(a, _))| {
            self.discovered[a as usize - 1].is_some() || self.discovered[idx + 1].is_none()
        })
    }
}

/// Executes one committed plan. The RNG is consulted only for a
/// uniform-random root, never inside the instruction loop.
pub fn execute_tree_plan(
    g: &BipartiteMultigraph,
    plan: &TreeProbePlan,
    rng: &mut impl Rng,
) -> Result<ProbeTranscript, PlanError> {
    plan.validate()?;
    let total = g.total_count();
    let root = match plan.root {
        RootChoice::Fixed(r) => {
            if r >= total {
                return Err(PlanError::RootOutOfRange { root: r, total });
            }
            r
        }
        RootChoice::UniformRandom => rng.random_range(0..total),
    };

    let mut discovered: Vec<Option<u32>> = Vec::with_capacity(plan.instructions.len() + 1);
    discovered.push(Some(root));
    let mut edges = Vec::new();
    for &(a, b) in &plan.instructions {
        let slot = discovered[a as usize - 1];
        let next = slot.and_then(|v| g.neighbor_at(v, b));
        if let (Some(v), Some(u)) = (slot, next) {
            edges.push(TranscriptEdge {
                parent_slot: a,
                source: v,
                target: u,
                position: b,
            });
        }
        discovered.push(next);
    }
    let revealed_degrees = (0..total).map(|v| g.degree(v)).collect();
    let transcript = ProbeTranscript {
        discovered,
        edges,
        revealed_degrees,
        charged_queries: plan.charged_queries(),
    };
    debug_assert!(transcript.null_absorption_holds(plan));
    Ok(transcript)
}

/// Executes each plan independently; total charge is the sum. Degenerate
/// single-instruction trees on fixed roots reproduce flat probes exactly.
pub fn execute_forest_plan(
    g: &BipartiteMultigraph,
    plans: &[TreeProbePlan],
    rng: &mut impl Rng,
) -> Result<Vec<ProbeTranscript>, PlanError> {
    plans.iter().map(|p| execute_tree_plan(g, p, rng)).collect()
}

/// Converts a transcript into the same observed-graph shape the flat model
/// produces, so the analysis layer runs unchanged on tree experiments.
/// Queried vertices are those actually expanded (non-null parents).
pub fn transcript_to_observed_graph(t: &ProbeTranscript) -> ObservedGraph {
    let edges = t
        .edges
        .iter()
        .map(|e| ObservedEdge {
            source: e.source,
            target: e.target,
            position: e.position,
        })
        .collect();
    let mut queried: Vec<u32> = t.edges.iter().map(|e| e.source).collect();
    queried.sort_unstable();
    queried.dedup();
    ObservedGraph { edges, queried }
}

/// Merges several transcripts into one observed graph (forest experiments).
pub fn transcripts_to_observed_graph(ts: &[ProbeTranscript]) -> ObservedGraph {
    let mut edges = Vec::new();
    let mut queried = Vec::new();
    for t in ts {
        let o = transcript_to_observed_graph(t);
        edges.extend(o.edges);
        queried.extend(o.queried);
    }
    queried.sort_unstable();
    queried.dedup();
    ObservedGraph { edges, queried }
}

/// Instructions executed per vertex (the per-vertex query count for
/// heavy-vertex statistics): each instruction charges its parent vertex.
pub fn probes_per_vertex(ts: &[ProbeTranscript], plans: &[TreeProbePlan], total: u32) -> Vec<u64> {
    let mut counts = vec![0u64; total as usize];
    for (t, p) in ts.iter().zip(plans) {
        for &(a, _) in &p.instructions {
            if let Some(v) = t.discovered[a as usize - 1] {
                counts[v as usize] += 1;
            }
        }
    }
    counts
}

/// Plan file format: first line `root <id|random> delta_bound <D>`, then
/// one `a b` pair per line. A forest file repeats the block, separated by
/// blank lines.
pub fn write_plan_file(plans: &[TreeProbePlan]) -> String {
    let mut out = String::new();
    for (i, plan) in plans.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match plan.root {
            RootChoice::Fixed(r) => writeln!(out, "root {} delta_bound {}", r, plan.delta_bound),
            RootChoice::UniformRandom => {
                writeln!(out, "root random delta_bound {}", plan.delta_bound)
            }
        }
        .unwrap();
        for &(a, b) in &plan.instructions {
            writeln!(out, "{a} {b}").unwrap();
        }
    }
    out
}

pub fn read_plan_file(r: impl BufRead) -> Result<Vec<TreeProbePlan>, PlanError> {
    let mut plans = Vec::new();
    let mut current: Option<TreeProbePlan> = None;
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            if let Some(p) = current.take() {
                plans.push(p);
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("root ") {
            if let Some(p) = current.take() {
                plans.push(p);
            }
            let mut parts = rest.split_whitespace();
            let root = match parts.next() {
                Some("random") => RootChoice::UniformRandom,
                Some(id) => RootChoice::Fixed(
                    id.parse()
                        .map_err(|e| PlanError::Parse(format!("bad root id: {e}")))?,
                ),
                None => return Err(PlanError::Parse("missing root".into())),
            };
            match (parts.next(), parts.next()) {
                (Some("delta_bound"), Some(d)) => {
                    let delta_bound = d
                        .parse()
                        .map_err(|e| PlanError::Parse(format!("bad delta_bound: {e}")))?;
                    current = Some(TreeProbePlan {
                        root,
                        instructions: Vec::new(),
                        delta_bound,
                    });
                }
                _ => return Err(PlanError::Parse("missing delta_bound".into())),
            }
        } else {
            let plan = current
                .as_mut()
                .ok_or_else(|| PlanError::Parse("instruction before root line".into()))?;
            let mut parts = line.split_whitespace();
            let a: u32 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| PlanError::Parse(format!("bad instruction: {line}")))?;
            let b: u32 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| PlanError::Parse(format!("bad instruction: {line}")))?;
            plan.instructions.push((a, b));
        }
    }
    if let Some(p) = current.take() {
        plans.push(p);
    }
    for p in &plans {
        p.validate()?;
    }
    Ok(plans)
}

/// Transcript CSV: `step,parent_slot,position,result`.
pub fn transcript_to_csv(plan: &TreeProbePlan, t: &ProbeTranscript) -> String {
    let mut out = String::from("step,parent_slot,position,result\n");
    for (idx, &(a, b)) in plan.instructions.iter().enumerate() {
        match t.discovered[idx + 1] {
            Some(v) => writeln!(out, "{},{},{},{}", idx + 1, a, b, v).unwrap(),
            None => writeln!(out, "{},{},{},NULL", idx + 1, a, b).unwrap(),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{answer_plan, observed_graph_from, QueryPlan};
    use crate::rng;

    fn fixed_graph() -> BipartiteMultigraph {
        // L = {0, 1, 2}, R = {3, 4, 5}; vertex 2 is isolated.
        BipartiteMultigraph::from_adjacency(
            3,
            3,
            vec![vec![4, 3, 5], vec![3], vec![], vec![0, 1], vec![0], vec![0]],
        )
        .unwrap()
    }

    fn chain_plan(root: u32, len: usize, b: u32) -> TreeProbePlan {
        TreeProbePlan {
            root: RootChoice::Fixed(root),
            instructions: (1..=len as u32).map(|i| (i, b)).collect(),
            delta_bound: 8,
        }
    }

    #[test]
    fn rejects_parent_ahead() {
        let plan = TreeProbePlan {
            root: RootChoice::Fixed(0),
            instructions: vec![(2, 1)],
            delta_bound: 4,
        };
        assert!(matches!(
            plan.validate(),
            Err(PlanError::ParentAhead { .. })
        ));
    }

    #[test]
    fn rejects_position_beyond_bound() {
        let plan = TreeProbePlan {
            root: RootChoice::Fixed(0),
            instructions: vec![(1, 5)],
            delta_bound: 4,
        };
        assert!(matches!(
            plan.validate(),
            Err(PlanError::PositionOutOfBounds { .. })
        ));
    }

    #[test]
    fn null_propagates_from_isolated_root() {
        let g = fixed_graph();
        let plan = chain_plan(2, 3, 1);
        let mut r = rng::stream(0, rng::purpose::TREE_ROOT, 0);
        let t = execute_tree_plan(&g, &plan, &mut r).unwrap();
        assert_eq!(t.discovered, vec![Some(2), None, None, None]);
        assert!(t.edges.is_empty());
        assert_eq!(t.charged_queries, 3);
    }

    #[test]
    fn chain_plan_walks() {
        let g = fixed_graph();
        // 0 -(1st)-> 4 -(1st)-> 0 -(1st)-> 4
        let plan = chain_plan(0, 3, 1);
        let mut r = rng::stream(0, rng::purpose::TREE_ROOT, 0);
        let t = execute_tree_plan(&g, &plan, &mut r).unwrap();
        assert_eq!(t.discovered, vec![Some(0), Some(4), Some(0), Some(4)]);
        assert_eq!(t.edges.len(), 3);
    }

    #[test]
    fn star_plan_reads_root_positions() {
        let g = fixed_graph();
        let plan = TreeProbePlan {
            root: RootChoice::Fixed(0),
            instructions: (1..=5).map(|b| (1, b)).collect(),
            delta_bound: 8,
        };
        let mut r = rng::stream(0, rng::purpose::TREE_ROOT, 0);
        let t = execute_tree_plan(&g, &plan, &mut r).unwrap();
        // deg(0) = 3: positions 1..3 resolve, 4..5 are null.
        assert_eq!(
            t.discovered,
            vec![Some(0), Some(4), Some(3), Some(5), None, None]
        );
        assert_eq!(t.edges.len(), 3);
        assert_eq!(t.revealed_degrees, vec![3, 1, 0, 2, 1, 1]);
    }

    #[test]
    fn forest_of_degenerate_trees_equals_flat_plan() {
        let g = fixed_graph();
        let probes = [(0u32, 1u32), (0, 2), (3, 1), (1, 2), (4, 1)];
        let mut flat = QueryPlan::default();
        for &(v, i) in &probes {
            flat.push(v, i);
        }
        let answers = answer_plan(&g, &flat).unwrap();
        let flat_obs = observed_graph_from(&flat, &answers).unwrap();

        let plans: Vec<TreeProbePlan> = probes
            .iter()
            .map(|&(v, i)| TreeProbePlan {
                root: RootChoice::Fixed(v),
                instructions: vec![(1, i)],
                delta_bound: 8,
            })
            .collect();
        let mut r = rng::stream(0, rng::purpose::TREE_ROOT, 0);
        let ts = execute_forest_plan(&g, &plans, &mut r).unwrap();
        let forest_obs = transcripts_to_observed_graph(&ts);

        assert_eq!(forest_obs.edges, flat_obs.edges);
        let total: u64 = plans.iter().map(|p| p.charged_queries()).sum();
        assert_eq!(total, flat.charged_queries());
    }

    #[test]
    fn empty_forest_is_empty() {
        let g = fixed_graph();
        let mut r = rng::stream(0, rng::purpose::TREE_ROOT, 0);
        let ts = execute_forest_plan(&g, &[], &mut r).unwrap();
        assert!(ts.is_empty());
    }

    #[test]
    fn random_root_is_seed_deterministic() {
        let g = fixed_graph();
        let plan = TreeProbePlan {
            root: RootChoice::UniformRandom,
            instructions: vec![(1, 1)],
            delta_bound: 4,
        };
        let a =
            execute_tree_plan(&g, &plan, &mut rng::stream(5, rng::purpose::TREE_ROOT, 1)).unwrap();
        let b =
            execute_tree_plan(&g, &plan, &mut rng::stream(5, rng::purpose::TREE_ROOT, 1)).unwrap();
        assert_eq!(a.discovered, b.discovered);
    }

    #[test]
    fn plan_file_round_trip() {
        let plans = vec![
            TreeProbePlan {
                root: RootChoice::Fixed(3),
                instructions: vec![(1, 2), (2, 1)],
                delta_bound: 8,
            },
            TreeProbePlan {
                root: RootChoice::UniformRandom,
                instructions: vec![(1, 1)],
                delta_bound: 4,
            },
        ];
        let text = write_plan_file(&plans);
        let back = read_plan_file(text.as_bytes()).unwrap();
        assert_eq!(back, plans);
    }

    #[test]
    fn transcript_csv_marks_nulls() {
        let g = fixed_graph();
        let plan = chain_plan(1, 2, 1);
        let mut r = rng::stream(0, rng::purpose::TREE_ROOT, 0);
        let t = execute_tree_plan(&g, &plan, &mut r).unwrap();
        let csv = transcript_to_csv(&plan, &t);
        // 1 -> 3 (its only neighbor), then 3's first neighbor is 0.
        assert_eq!(csv, "step,parent_slot,position,result\n1,1,1,3\n2,2,1,0\n");
    }
}
