//! Bipartite multigraph representation and the matching oracles used as
//! ground truth.
//!
//! Vertex ids are dense integers `0..left_count + right_count`; ids below
//! `left_count` are left vertices, the rest are right vertices. Adjacency
//! entries may repeat (multi-edges) and their order is part of the graph's
//! identity: it is exactly the answer order of the adjacency-list oracle.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("adjacency entry {neighbor} of vertex {vertex} is on the same side")]
    NotBipartite { vertex: u32, neighbor: u32 },
    #[error("edge ({u},{v}) has asymmetric multiplicity ({forward} forward, {backward} backward)")]
    AsymmetricEdge {
        u: u32,
        v: u32,
        forward: usize,
        backward: usize,
    },
    #[error("vertex id {vertex} out of range (total {total})")]
    VertexOutOfRange { vertex: u32, total: u32 },
    #[error("malformed graph file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Immutable bipartite multigraph in CSR form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteMultigraph {
    left_count: u32,
    right_count: u32,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl BipartiteMultigraph {
    /// Builds a graph from per-vertex adjacency lists (length must be
    /// `left_count + right_count`). List order is preserved.
    pub fn from_adjacency(
        left_count: u32,
        right_count: u32,
        adjacency: Vec<Vec<u32>>,
    ) -> Result<Self, GraphError> {
        let total = left_count as usize + right_count as usize;
        assert_eq!(
            adjacency.len(),
            total,
            "adjacency length must match vertex count"
        );
        let mut offsets = Vec::with_capacity(total + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for list in &adjacency {
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len());
        }
        let g = Self {
            left_count,
            right_count,
            offsets,
            neighbors,
        };
        g.validate()?;
        Ok(g)
    }

    /// Builds a graph from undirected edges given as (left id, right global id)
    /// pairs. Each edge is appended to both endpoint lists in stream order.
    pub fn from_edges(
        left_count: u32,
        right_count: u32,
        edges: &[(u32, u32)],
    ) -> Result<Self, GraphError> {
        let total = left_count as usize + right_count as usize;
        let mut adjacency = vec![Vec::new(); total];
        for &(l, r) in edges {
            adjacency[l as usize].push(r);
            adjacency[r as usize].push(l);
        }
        Self::from_adjacency(left_count, right_count, adjacency)
    }

    /// CSR assembly from a repeatable edge stream: `emit` must produce the
    /// same (left, right-global) sequence on both invocations. Keeps peak
    /// memory at one copy of the adjacency arrays.
    pub fn from_edge_stream(
        left_count: u32,
        right_count: u32,
        mut emit: impl FnMut(&mut dyn FnMut(u32, u32)),
    ) -> Self {
        let total = left_count as usize + right_count as usize;
        let mut degree = vec![0usize; total];
        emit(&mut |l, r| {
            degree[l as usize] += 1;
            degree[r as usize] += 1;
        });
        let mut offsets = Vec::with_capacity(total + 1);
        let mut acc = 0usize;
        offsets.push(0);
        for d in &degree {
            acc += d;
            offsets.push(acc);
        }
        let mut cursor = offsets[..total].to_vec();
        let mut neighbors = vec![0u32; acc];
        emit(&mut |l, r| {
            neighbors[cursor[l as usize]] = r;
            cursor[l as usize] += 1;
            neighbors[cursor[r as usize]] = l;
            cursor[r as usize] += 1;
        });
        Self {
            left_count,
            right_count,
            offsets,
            neighbors,
        }
    }

    pub fn left_count(&self) -> u32 {
        self.left_count
    }

    pub fn right_count(&self) -> u32 {
        self.right_count
    }

    pub fn total_count(&self) -> u32 {
        self.left_count + self.right_count
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn is_left(&self, v: u32) -> bool {
        v < self.left_count
    }

    pub fn degree(&self, v: u32) -> u32 {
        let v = v as usize;
        (self.offsets[v + 1] - self.offsets[v]) as u32
    }

    pub fn adjacency(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// The i-th neighbor (1-based), or None past the end of the list.
    pub fn neighbor_at(&self, v: u32, index: u32) -> Option<u32> {
        if index == 0 {
            return None;
        }
        self.adjacency(v).get(index as usize - 1).copied()
    }

    pub fn adjacency_mut(&mut self, v: u32) -> &mut [u32] {
        let v = v as usize;
        &mut self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Every edge once, as (left id, right global id), in left list order.
    pub fn edges_from_left(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.left_count).flat_map(move |l| self.adjacency(l).iter().map(move |&r| (l, r)))
    }

    /// Checks the bipartite and reverse-entry invariants.
    pub fn validate(&self) -> Result<(), GraphError> {
        let total = self.total_count();
        for v in 0..total {
            for &u in self.adjacency(v) {
                if u >= total {
                    return Err(GraphError::VertexOutOfRange { vertex: u, total });
                }
                if self.is_left(v) == self.is_left(u) {
                    return Err(GraphError::NotBipartite {
                        vertex: v,
                        neighbor: u,
                    });
                }
            }
        }
        // Multiplicity symmetry: count (l, r) from both directions.
        let mut counts: std::collections::HashMap<(u32, u32), (usize, usize)> =
            std::collections::HashMap::new();
        for l in 0..self.left_count {
            for &r in self.adjacency(l) {
                counts.entry((l, r)).or_insert((0, 0)).0 += 1;
            }
        }
        for r in self.left_count..total {
            for &l in self.adjacency(r) {
                counts.entry((l, r)).or_insert((0, 0)).1 += 1;
            }
        }
        for ((l, r), (f, b)) in counts {
            if f != b {
                return Err(GraphError::AsymmetricEdge {
                    u: l,
                    v: r,
                    forward: f,
                    backward: b,
                });
            }
        }
        Ok(())
    }

    /// Text serialization: header `n_left n_right`, then one line of
    /// neighbor ids in adjacency order per left vertex, then per right
    /// vertex (both sides so the oracle's answer order round-trips).
    pub fn write_text(&self, mut w: impl Write) -> Result<(), GraphError> {
        let mut buf = String::new();
        writeln!(buf, "{} {}", self.left_count, self.right_count).unwrap();
        for v in 0..self.total_count() {
            let mut first = true;
            for &u in self.adjacency(v) {
                if !first {
                    buf.push(' ');
                }
                write!(buf, "{u}").unwrap();
                first = false;
            }
            buf.push('\n');
            if buf.len() > 1 << 20 {
                w.write_all(buf.as_bytes())?;
                buf.clear();
            }
        }
        w.write_all(buf.as_bytes())?;
        Ok(())
    }

    pub fn read_text(r: impl BufRead) -> Result<Self, GraphError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| GraphError::Parse("empty file".into()))??;
        let mut parts = header.split_whitespace();
        let left_count: u32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| GraphError::Parse("bad header".into()))?;
        let right_count: u32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| GraphError::Parse("bad header".into()))?;
        let total = left_count as usize + right_count as usize;
        let mut adjacency = Vec::with_capacity(total);
        for line in lines.take(total) {
            let line = line?;
            let list: Result<Vec<u32>, _> = line.split_whitespace().map(str::parse).collect();
            adjacency.push(list.map_err(|e| GraphError::Parse(format!("bad neighbor id: {e}")))?);
        }
        if adjacency.len() != total {
            return Err(GraphError::Parse(format!(
                "expected {total} adjacency lines, found {}",
                adjacency.len()
            )));
        }
        Self::from_adjacency(left_count, right_count, adjacency)
    }
}

/// A matching: edges as (left id, right global id) pairs, no shared endpoints.
#[derive(Debug, Clone, Default)]
pub struct Matching {
    pub pairs: Vec<(u32, u32)>,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.pairs.len()
    }

    /// Verifies no vertex repeats and every pair crosses the bipartition.
    pub fn is_valid_for(&self, g: &BipartiteMultigraph) -> bool {
        let mut seen = vec![false; g.total_count() as usize];
        for &(l, r) in &self.pairs {
            if !g.is_left(l) || g.is_left(r) {
                return false;
            }
            if seen[l as usize] || seen[r as usize] {
                return false;
            }
            seen[l as usize] = true;
            seen[r as usize] = true;
        }
        true
    }
}

/// Maximum matching via Hopcroft-Karp (BFS layering + layered DFS
/// augmentation). Multi-edges are harmless: a duplicate entry can never
/// augment twice. Deterministic for a fixed graph.
pub fn exact_maximum_matching(g: &BipartiteMultigraph) -> Matching {
    const FREE: u32 = u32::MAX;
    let ln = g.left_count() as usize;
    let total = g.total_count();
    let mut match_left = vec![FREE; ln]; // left idx -> right global id
    let mut match_right = vec![FREE; (total as usize) - ln]; // right idx -> left id
    let mut dist = vec![u32::MAX; ln];
    let mut queue = VecDeque::new();

    loop {
        // BFS phase: layer free left vertices at distance 0.
        queue.clear();
        for l in 0..ln {
            if match_left[l] == FREE {
                dist[l] = 0;
                queue.push_back(l as u32);
            } else {
                dist[l] = u32::MAX;
            }
        }
        let mut found_free_right = false;
        while let Some(l) = queue.pop_front() {
            let dl = dist[l as usize];
            for &r in g.adjacency(l) {
                let ri = (r - g.left_count()) as usize;
                let l2 = match_right[ri];
                if l2 == FREE {
                    found_free_right = true;
                } else if dist[l2 as usize] == u32::MAX {
                    dist[l2 as usize] = dl + 1;
                    queue.push_back(l2);
                }
            }
        }
        if !found_free_right {
            break;
        }
        // DFS phase along layered distances.
        fn augment(
            g: &BipartiteMultigraph,
            l: u32,
            match_left: &mut [u32],
            match_right: &mut [u32],
            dist: &mut [u32],
        ) -> bool {
            let dl = dist[l as usize];
            dist[l as usize] = u32::MAX;
            for &r in g.adjacency(l) {
                let ri = (r - g.left_count()) as usize;
                let l2 = match_right[ri];
                let ok = if l2 == u32::MAX {
                    true
                } else {
                    dist[l2 as usize] == dl + 1 && augment(g, l2, match_left, match_right, dist)
                };
                if ok {
                    match_left[l as usize] = r;
                    match_right[ri] = l;
                    return true;
                }
            }
            false
        }
        let mut progressed = false;
        for l in 0..ln {
            if match_left[l] == FREE && dist[l] == 0 {
                progressed |= augment(g, l as u32, &mut match_left, &mut match_right, &mut dist);
            }
        }
        if !progressed {
            break;
        }
    }

    let pairs = match_left
        .iter()
        .enumerate()
        .filter(|&(_, &r)| r != FREE)
        .map(|(l, &r)| (l as u32, r))
        .collect();
    Matching { pairs }
}

/// Greedy maximal matching over an edge stream in stream order. Edges may
/// repeat and appear in either orientation; a later copy of a taken or
/// blocked edge is skipped, so pre-deduplication is unnecessary.
pub fn greedy_maximal_matching(
    total_vertices: u32,
    edges: impl IntoIterator<Item = (u32, u32)>,
) -> Matching {
    let mut matcher = GreedyMatcher::new(total_vertices);
    for (u, v) in edges {
        matcher.offer(u, v);
    }
    matcher.finish()
}

/// Incremental greedy matcher so edge streams can be consumed on the fly.
pub struct GreedyMatcher {
    matched: Vec<bool>,
    pairs: Vec<(u32, u32)>,
}

impl GreedyMatcher {
    pub fn new(total_vertices: u32) -> Self {
        Self {
            matched: vec![false; total_vertices as usize],
            pairs: Vec::new(),
        }
    }

    /// Offers one edge; takes it iff both endpoints are still free.
    /// Returns true when the edge was added.
    pub fn offer(&mut self, u: u32, v: u32) -> bool {
        if u == v || self.matched[u as usize] || self.matched[v as usize] {
            return false;
        }
        self.matched[u as usize] = true;
        self.matched[v as usize] = true;
        self.pairs.push((u.min(v), u.max(v)));
        true
    }

    pub fn size(&self) -> usize {
        self.pairs.len()
    }

    pub fn finish(self) -> Matching {
        Matching { pairs: self.pairs }
    }
}

/// Minimum vertex cover size via the alternating-reachability construction
/// (cover = (L \ Z) ∪ (R ∩ Z) for Z reached from free left vertices). The
/// returned cover is verified against every edge before the size is
/// reported, so this is an independent check of the matching oracle even
/// though it starts from the same matching.
pub fn min_vertex_cover_size_exact(g: &BipartiteMultigraph) -> usize {
    let matching = exact_maximum_matching(g);
    let ln = g.left_count() as usize;
    let total = g.total_count() as usize;
    let mut match_of = vec![u32::MAX; total];
    for &(l, r) in &matching.pairs {
        match_of[l as usize] = r;
        match_of[r as usize] = l;
    }
    // Alternating BFS from unmatched left vertices: left->right along
    // non-matching edges, right->left along matching edges.
    let mut reached = vec![false; total];
    let mut queue: VecDeque<u32> = (0..ln as u32)
        .filter(|&l| match_of[l as usize] == u32::MAX)
        .collect();
    for &l in &queue {
        reached[l as usize] = true;
    }
    while let Some(v) = queue.pop_front() {
        if g.is_left(v) {
            for &r in g.adjacency(v) {
                if match_of[v as usize] != r && !reached[r as usize] {
                    reached[r as usize] = true;
                    queue.push_back(r);
                }
            }
        } else {
            let l = match_of[v as usize];
            if l != u32::MAX && !reached[l as usize] {
                reached[l as usize] = true;
                queue.push_back(l);
            }
        }
    }
    let mut in_cover = vec![false; total];
    for l in 0..ln {
        if !reached[l] {
            in_cover[l] = true;
        }
    }
    for r in ln..total {
        if reached[r] {
            in_cover[r] = true;
        }
    }
    // König's construction must cover every edge; a miss would mean the
    // matching was not maximum.
    for (l, r) in g.edges_from_left() {
        assert!(
            in_cover[l as usize] || in_cover[r as usize],
            "vertex cover construction missed edge ({l},{r})"
        );
    }
    in_cover.iter().filter(|&&c| c).count()
}
