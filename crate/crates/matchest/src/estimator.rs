//! The non-adaptive matching-size estimator and its vertex-cover variant.
//!
//! Every vertex is asked for `q = 80 * n^(1-2*delta) * ln(n)` random
//! neighbors (when q < 1, each vertex is instead sampled once with
//! probability q), realized through the degree-guessing simulator as one
//! flat non-adaptive probe sequence. The answer is the size of a greedy
//! maximal matching over the returned edges in plan order. The greedy step
//! costs at most a factor 2 against the maximum matching of the sample, and
//! a matching in a subgraph is a matching, so the estimate never exceeds
//! the true matching size.

use rand::Rng;
use thiserror::Error;

use crate::graph::{BipartiteMultigraph, GreedyMatcher};
use crate::query::{stream_random_neighbor_samples, SampleSpec};

/// Default leading constant in the per-vertex sample count.
pub const DEFAULT_SAMPLE_CONSTANT: f64 = 80.0;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("delta must lie in (0, 1), got {0}")]
    DeltaOutOfRange(f64),
    #[error("scale parameter n must be positive")]
    ZeroScale,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateResult {
    /// Size of the greedy maximal matching over the sampled edges.
    pub estimate: u64,
    /// Neighbor probes charged, including all degree-guess levels.
    pub charged_queries: u64,
    /// Retained random-neighbor answers fed to the greedy matcher.
    pub sampled_edge_count: u64,
    /// The per-vertex rate q; below 1 the Bernoulli branch was taken.
    pub per_vertex_rate: f64,
}

/// The per-vertex sample count q = c * n^(1-2*delta) * ln(n).
pub fn per_vertex_rate(n: u64, delta: f64, constant: f64) -> f64 {
    let n = n as f64;
    constant * n.powf(1.0 - 2.0 * delta) * n.ln()
}

/// Estimates the maximum matching size of `g` through oracle access only.
pub fn estimate_matching_size(
    g: &BipartiteMultigraph,
    n: u64,
    delta: f64,
    rng: &mut impl Rng,
) -> Result<EstimateResult, EstimatorError> {
    estimate_matching_size_with_constant(g, n, delta, DEFAULT_SAMPLE_CONSTANT, rng)
}

/// Same as [`estimate_matching_size`] with an explicit leading constant.
pub fn estimate_matching_size_with_constant(
    g: &BipartiteMultigraph,
    n: u64,
    delta: f64,
    constant: f64,
    rng: &mut impl Rng,
) -> Result<EstimateResult, EstimatorError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(EstimatorError::DeltaOutOfRange(delta));
    }
    if n == 0 {
        return Err(EstimatorError::ZeroScale);
    }
    let q = per_vertex_rate(n, delta, constant);
    let spec = if q >= 1.0 {
        SampleSpec::PerVertex(q.round() as u32)
    } else {
        SampleSpec::Bernoulli(q)
    };
    let max_degree_bound = g.left_count().max(g.right_count()).max(1);

    // One flat plan over every vertex; the probe stream is a pure function
    // of the RNG, generated and answered without materialization. Retained
    // edges reach the greedy matcher in plan order.
    let mut matcher = GreedyMatcher::new(g.total_count());
    let mut sampled = 0u64;
    let (charged, _) = stream_random_neighbor_samples(
        g,
        0..g.total_count(),
        spec,
        max_degree_bound,
        rng,
        |v, u| {
            sampled += 1;
            let (l, r) = if g.is_left(v) { (v, u) } else { (u, v) };
            matcher.offer(l, r);
        },
    );

    let result = EstimateResult {
        estimate: matcher.size() as u64,
        charged_queries: charged,
        sampled_edge_count: sampled,
        per_vertex_rate: q,
    };
    debug_assert!(result.estimate <= g.left_count() as u64);
    debug_assert!(result.sampled_edge_count == 0 || result.estimate >= 1);
    Ok(result)
}

/// Vertex-cover size estimate: the identical sampling and greedy
/// computation, reinterpreted through the cover/matching duality. Exact
/// equality of the two optima holds on bipartite inputs; on general graphs
/// the guarantee weakens by one extra factor of 2.
pub fn estimate_vertex_cover_size(
    g: &BipartiteMultigraph,
    n: u64,
    delta: f64,
    rng: &mut impl Rng,
) -> Result<EstimateResult, EstimatorError> {
    estimate_matching_size(g, n, delta, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::exact_maximum_matching;
    use crate::rng;

    #[test]
    fn rate_matches_formula() {
        // 80 * ln(10^4) with the n^0 factor at delta = 1/2.
        let q = per_vertex_rate(10_000, 0.5, 80.0);
        assert!((q - 736.8).abs() < 0.05, "q = {q}");
        // delta = 0.9 drops the rate below 1, triggering the Bernoulli branch.
        let q = per_vertex_rate(10_000, 0.9, 80.0);
        assert!((q - 0.465).abs() < 0.005, "q = {q}");
    }

    #[test]
    fn rejects_bad_delta() {
        let g = BipartiteMultigraph::from_edges(1, 1, &[(0, 1)]).unwrap();
        let mut r = rng::stream(0, rng::purpose::ESTIMATOR, 0);
        assert!(estimate_matching_size(&g, 2, 0.0, &mut r).is_err());
        assert!(estimate_matching_size(&g, 2, 1.0, &mut r).is_err());
    }

    #[test]
    fn empty_graph_estimates_zero() {
        let g = BipartiteMultigraph::from_edges(3, 3, &[]).unwrap();
        let mut r = rng::stream(1, rng::purpose::ESTIMATOR, 0);
        let res = estimate_matching_size(&g, 6, 0.5, &mut r).unwrap();
        assert_eq!(res.estimate, 0);
        assert_eq!(res.sampled_edge_count, 0);
    }

    #[test]
    fn single_edge_graph_estimates_one() {
        let g = BipartiteMultigraph::from_edges(1, 1, &[(0, 1)]).unwrap();
        let mut r = rng::stream(2, rng::purpose::ESTIMATOR, 0);
        let res = estimate_vertex_cover_size(&g, 2, 0.5, &mut r).unwrap();
        assert_eq!(res.estimate, 1);
    }

    #[test]
    fn estimate_never_exceeds_true_matching_size() {
        // A small random-ish bipartite graph; soundness is unconditional.
        let edges: Vec<(u32, u32)> = (0..40).map(|i| (i % 8, 8 + ((i * 7 + 3) % 8))).collect();
        let g = BipartiteMultigraph::from_edges(8, 8, &edges).unwrap();
        let mu = exact_maximum_matching(&g).size() as u64;
        for trial in 0..20 {
            let mut r = rng::stream(9, rng::purpose::ESTIMATOR, trial);
            let res = estimate_matching_size(&g, 16, 0.5, &mut r).unwrap();
            assert!(res.estimate <= mu);
            assert!(res.estimate >= 1);
        }
    }

    #[test]
    fn bernoulli_branch_charges_about_qn_levels() {
        let edges: Vec<(u32, u32)> = (0..100u32).map(|i| (i, 100 + i)).collect();
        let g = BipartiteMultigraph::from_edges(100, 100, &edges).unwrap();
        let mut r = rng::stream(4, rng::purpose::ESTIMATOR, 0);
        // delta = 0.9 at n = 10^4: q ~= 0.465 per vertex.
        let res = estimate_matching_size(&g, 10_000, 0.9, &mut r).unwrap();
        assert!(res.per_vertex_rate < 1.0);
        let levels = crate::query::guess_levels(100) as u64;
        // 200 vertices, each sampled with probability ~0.465.
        let expect = (200.0 * res.per_vertex_rate) * levels as f64;
        assert!((res.charged_queries as f64) > 0.4 * expect);
        assert!((res.charged_queries as f64) < 2.0 * expect);
    }

    #[test]
    fn charged_count_is_deterministic_and_matches_layout() {
        let edges: Vec<(u32, u32)> = (0..50u32).map(|i| (i, 50 + i)).collect();
        let g = BipartiteMultigraph::from_edges(50, 50, &edges).unwrap();
        let q = per_vertex_rate(100, 0.5, 80.0).round() as u64;
        let levels = crate::query::guess_levels(50) as u64;
        let mut r = rng::stream(6, rng::purpose::ESTIMATOR, 0);
        let res = estimate_matching_size(&g, 100, 0.5, &mut r).unwrap();
        assert_eq!(res.charged_queries, 100 * q * levels);
    }
}
