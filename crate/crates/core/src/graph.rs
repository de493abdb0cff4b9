//! Graph representations and shortest-path primitives shared by the rest of
//! the crate: simple unweighted graphs, non-negatively weighted graphs
//! (zero-weight edges allowed), BFS/heap searches and induced subgraphs.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

/// Dense vertex identifier, `0..n`.
pub type Vertex = u32;

/// A distance value with a dedicated infinity sentinel and saturating addition.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dist(u64);

impl Dist {
    pub const ZERO: Dist = Dist(0);
    pub const INFINITY: Dist = Dist(u64::MAX);

    pub fn new(d: u64) -> Self {
        debug_assert!(d != u64::MAX, "u64::MAX is reserved for INFINITY");
        Dist(d)
    }

    pub fn is_finite(self) -> bool {
        self.0 != u64::MAX
    }

    /// The finite value, or `None` for the infinity sentinel.
    pub fn finite(self) -> Option<u64> {
        if self.is_finite() {
            Some(self.0)
        } else {
            None
        }
    }
}

impl std::ops::Add for Dist {
    type Output = Dist;

    fn add(self, other: Dist) -> Dist {
        if self.is_finite() && other.is_finite() {
            Dist(self.0.checked_add(other.0).expect("distance overflow"))
        } else {
            Dist::INFINITY
        }
    }
}

impl fmt::Debug for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.finite() {
            Some(d) => write!(f, "{d}"),
            None => write!(f, "inf"),
        }
    }
}

/// Per-vertex distances from a source vertex or source set.
pub type DistanceVector = Vec<Dist>;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(Vertex, Vertex),
    #[error("vertex {0} out of range (n = {1})")]
    VertexOutOfRange(Vertex, usize),
    #[error("edge list parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A simple undirected graph with dense vertex ids and optional external names.
#[derive(Debug, Clone)]
pub struct Graph {
    adj: Vec<Vec<Vertex>>,
    m: usize,
    names: Option<Vec<String>>,
}

impl Graph {
    /// Builds a graph from an edge list, rejecting self-loops and parallel edges.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Graph, GraphError> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u as usize >= n {
                return Err(GraphError::VertexOutOfRange(u, n));
            }
            if v as usize >= n {
                return Err(GraphError::VertexOutOfRange(v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for (u, nbrs) in adj.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if nbrs.windows(2).any(|w| w[0] == w[1]) {
                let d = nbrs.windows(2).find(|w| w[0] == w[1]).unwrap()[0];
                return Err(GraphError::DuplicateEdge(u as Vertex, d));
            }
        }
        Ok(Graph { adj, m: edges.len(), names: None })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Graph {
        assert_eq!(names.len(), self.n());
        self.names = Some(names);
        self
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v as usize].len()
    }

    /// Adjacency test by binary search on the sorted neighbor list.
    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// The display name of a vertex: its external name if present, else its id.
    pub fn name_of(&self, v: Vertex) -> String {
        match &self.names {
            Some(names) => names[v as usize].clone(),
            None => v.to_string(),
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, nbrs)| {
            nbrs.iter()
                .filter(move |&&v| (u as Vertex) < v)
                .map(move |&v| (u as Vertex, v))
        })
    }
}

/// A graph with non-negative integer edge weights; zero weights are allowed.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    adj: Vec<Vec<(Vertex, u32)>>,
    m: usize,
    all_unit: bool,
}

impl WeightedGraph {
    /// Unit-weight view of an unweighted graph.
    pub fn unit_from(g: &Graph) -> WeightedGraph {
        let adj = g
            .adj
            .iter()
            .map(|nbrs| nbrs.iter().map(|&v| (v, 1)).collect())
            .collect();
        WeightedGraph { adj, m: g.m, all_unit: true }
    }

    pub fn from_weighted_edges(
        n: usize,
        edges: &[(Vertex, Vertex, u32)],
    ) -> Result<WeightedGraph, GraphError> {
        let mut adj: Vec<Vec<(Vertex, u32)>> = vec![Vec::new(); n];
        let mut all_unit = true;
        for &(u, v, w) in edges {
            if u as usize >= n {
                return Err(GraphError::VertexOutOfRange(u, n));
            }
            if v as usize >= n {
                return Err(GraphError::VertexOutOfRange(v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            all_unit &= w == 1;
            adj[u as usize].push((v, w));
            adj[v as usize].push((u, w));
        }
        for (u, nbrs) in adj.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if nbrs.windows(2).any(|w| w[0].0 == w[1].0) {
                let d = nbrs.windows(2).find(|w| w[0].0 == w[1].0).unwrap()[0].0;
                return Err(GraphError::DuplicateEdge(u as Vertex, d));
            }
        }
        Ok(WeightedGraph { adj, m: edges.len(), all_unit })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn all_unit(&self) -> bool {
        self.all_unit
    }

    pub fn neighbors(&self, v: Vertex) -> &[(Vertex, u32)] {
        &self.adj[v as usize]
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex, u32)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, nbrs)| {
            nbrs.iter()
                .filter(move |&&(v, _)| (u as Vertex) < v)
                .map(move |&(v, w)| (u as Vertex, v, w))
        })
    }

    /// Neighbor ids with weights stripped, for code that only looks at adjacency.
    pub fn neighbor_ids(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.adj[v as usize].iter().map(|&(u, _)| u)
    }
}

/// Exact single-source shortest paths; plain BFS on unit graphs, a binary-heap
/// search otherwise (zero-weight edges are fine). Unreachable vertices get
/// [`Dist::INFINITY`].
pub fn sssp(g: &WeightedGraph, source: Vertex) -> DistanceVector {
    multi_source_dist(g, &[source])
}

/// Distance from every vertex to the nearest vertex of `sources`; all
/// INFINITY when `sources` is empty.
pub fn multi_source_dist(g: &WeightedGraph, sources: &[Vertex]) -> DistanceVector {
    let mut dist = vec![Dist::INFINITY; g.n()];
    if g.all_unit {
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s as usize] != Dist::ZERO {
                dist[s as usize] = Dist::ZERO;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &(v, _) in g.neighbors(u) {
                if !dist[v as usize].is_finite() {
                    dist[v as usize] = du + Dist::new(1);
                    queue.push_back(v);
                }
            }
        }
    } else {
        let mut heap = std::collections::BinaryHeap::new();
        for &s in sources {
            dist[s as usize] = Dist::ZERO;
            heap.push(std::cmp::Reverse((Dist::ZERO, s)));
        }
        while let Some(std::cmp::Reverse((d, u))) = heap.pop() {
            if d != dist[u as usize] {
                continue;
            }
            for &(v, w) in g.neighbors(u) {
                let nd = d + Dist::new(w as u64);
                if nd < dist[v as usize] {
                    dist[v as usize] = nd;
                    heap.push(std::cmp::Reverse((nd, v)));
                }
            }
        }
    }
    dist
}

/// Bidirectional id maps between a graph and one of its induced subgraphs.
#[derive(Debug, Clone)]
pub struct SubgraphMap {
    /// Old id -> new id, `None` for vertices outside the subgraph.
    pub to_sub: Vec<Option<Vertex>>,
    /// New id -> old id.
    pub to_super: Vec<Vertex>,
}

/// The subgraph induced by `keep`: exactly the edges with both ends in `keep`,
/// weights preserved. New ids follow the order of `keep`.
pub fn induced_subgraph(g: &WeightedGraph, keep: &[Vertex]) -> (WeightedGraph, SubgraphMap) {
    let mut to_sub = vec![None; g.n()];
    for (new, &old) in keep.iter().enumerate() {
        debug_assert!(to_sub[old as usize].is_none(), "duplicate vertex in keep set");
        to_sub[old as usize] = Some(new as Vertex);
    }
    let mut adj: Vec<Vec<(Vertex, u32)>> = vec![Vec::new(); keep.len()];
    let mut m = 0;
    let mut all_unit = true;
    for (new, &old) in keep.iter().enumerate() {
        for &(v, w) in g.neighbors(old) {
            if let Some(nv) = to_sub[v as usize] {
                adj[new].push((nv, w));
                if nv > new as Vertex {
                    m += 1;
                    all_unit &= w == 1;
                }
            }
        }
        adj[new].sort_unstable();
    }
    (
        WeightedGraph { adj, m, all_unit },
        SubgraphMap { to_sub, to_super: keep.to_vec() },
    )
}

pub fn is_connected(g: &WeightedGraph) -> bool {
    if g.n() <= 1 {
        return true;
    }
    let dist = sssp(g, 0);
    dist.iter().all(|d| d.is_finite())
}

/// Parses the edge-list format: a header `p <n> <m>`, then `e <u> <v> [w]`
/// lines with 0-indexed endpoints and a default weight of 1. Lines starting
/// with `c` and blank lines are ignored.
pub fn parse_edgelist(text: &str) -> Result<WeightedGraph, GraphError> {
    let mut n: Option<usize> = None;
    let mut declared_m = 0usize;
    let mut edges: Vec<(Vertex, Vertex, u32)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('c') {
            continue;
        }
        let mut it = l.split_whitespace();
        match it.next() {
            Some("p") => {
                if n.is_some() {
                    return Err(GraphError::Parse { line, msg: "duplicate header".into() });
                }
                let nv = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| GraphError::Parse { line, msg: "bad vertex count".into() })?;
                declared_m = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| GraphError::Parse { line, msg: "bad edge count".into() })?;
                n = Some(nv);
            }
            Some("e") => {
                if n.is_none() {
                    return Err(GraphError::Parse { line, msg: "edge before header".into() });
                }
                let u: Vertex = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| GraphError::Parse { line, msg: "bad endpoint".into() })?;
                let v: Vertex = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| GraphError::Parse { line, msg: "bad endpoint".into() })?;
                let w: u32 = match it.next() {
                    Some(t) => t
                        .parse()
                        .map_err(|_| GraphError::Parse { line, msg: "bad weight".into() })?,
                    None => 1,
                };
                edges.push((u, v, w));
            }
            _ => {
                return Err(GraphError::Parse { line, msg: format!("unknown line: {l}") });
            }
        }
    }
    let n = n.ok_or(GraphError::Parse { line: 0, msg: "missing `p` header".into() })?;
    if edges.len() != declared_m {
        return Err(GraphError::Parse {
            line: 0,
            msg: format!("header declares {declared_m} edges, found {}", edges.len()),
        });
    }
    WeightedGraph::from_weighted_edges(n, &edges)
}

/// Writes the edge-list format; vertex names, when given, go into `c` comments.
pub fn write_edgelist(g: &WeightedGraph, names: Option<&[String]>) -> String {
    let mut out = String::new();
    out.push_str(&format!("p {} {}\n", g.n(), g.m()));
    if let Some(names) = names {
        for (v, name) in names.iter().enumerate() {
            out.push_str(&format!("c v {v} {name}\n"));
        }
    }
    for (u, v, w) in g.edges() {
        if w == 1 {
            out.push_str(&format!("e {u} {v}\n"));
        } else {
            out.push_str(&format!("e {u} {v} {w}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn path4() -> WeightedGraph {
        WeightedGraph::from_weighted_edges(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap()
    }

    #[test]
    fn sssp_path() {
        let g = path4();
        let d = sssp(&g, 0);
        assert_eq!(d, vec![Dist::new(0), Dist::new(1), Dist::new(2), Dist::new(3)]);
    }

    #[test]
    fn sssp_single_vertex() {
        let g = WeightedGraph::from_weighted_edges(1, &[]).unwrap();
        assert_eq!(sssp(&g, 0), vec![Dist::ZERO]);
    }

    #[test]
    fn sssp_unreachable() {
        let g = WeightedGraph::from_weighted_edges(3, &[(0, 1, 1)]).unwrap();
        let d = sssp(&g, 0);
        assert_eq!(d[2], Dist::INFINITY);
    }

    #[test]
    fn multi_source_two_ends() {
        let g = path4();
        let d = multi_source_dist(&g, &[0, 3]);
        assert_eq!(d, vec![Dist::new(0), Dist::new(1), Dist::new(1), Dist::new(0)]);
    }

    #[test]
    fn multi_source_empty_is_all_infinity() {
        let g = path4();
        assert!(multi_source_dist(&g, &[]).iter().all(|d| *d == Dist::INFINITY));
    }

    #[test]
    fn multi_source_single() {
        let g = path4();
        let d = multi_source_dist(&g, &[1]);
        assert_eq!(d, vec![Dist::new(1), Dist::new(0), Dist::new(1), Dist::new(2)]);
    }

    #[test]
    fn induced_edge() {
        let g = path4();
        let (sub, map) = induced_subgraph(&g, &[0, 1]);
        assert_eq!(sub.n(), 2);
        assert_eq!(sub.m(), 1);
        assert_eq!(map.to_super, vec![0, 1]);
    }

    #[test]
    fn induced_identity() {
        let g = path4();
        let (sub, _) = induced_subgraph(&g, &[0, 1, 2, 3]);
        assert_eq!(sub.m(), 3);
        assert_eq!(sssp(&sub, 0), sssp(&g, 0));
    }

    #[test]
    fn induced_nonadjacent_pair() {
        let g = path4();
        let (sub, _) = induced_subgraph(&g, &[0, 2]);
        assert_eq!(sub.m(), 0);
    }

    #[test]
    fn connectivity() {
        assert!(is_connected(&path4()));
        let g = WeightedGraph::from_weighted_edges(2, &[]).unwrap();
        assert!(!is_connected(&g));
        let k1 = WeightedGraph::from_weighted_edges(1, &[]).unwrap();
        assert!(is_connected(&k1));
    }

    #[test]
    fn zero_weight_edges() {
        // a -0- b -1- c: d(a,c) = 1 through the zero edge
        let g = WeightedGraph::from_weighted_edges(3, &[(0, 1, 0), (1, 2, 1)]).unwrap();
        assert!(!g.all_unit());
        let d = sssp(&g, 0);
        assert_eq!(d, vec![Dist::new(0), Dist::new(0), Dist::new(1)]);
    }

    #[test]
    fn saturating_infinity() {
        assert_eq!(Dist::INFINITY + Dist::new(5), Dist::INFINITY);
        assert_eq!(Dist::new(5) + Dist::INFINITY, Dist::INFINITY);
        assert_eq!(Dist::new(2) + Dist::new(3), Dist::new(5));
    }

    #[test]
    fn rejects_malformed() {
        assert!(Graph::from_edges(2, &[(0, 0)]).is_err());
        assert!(Graph::from_edges(2, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(2, &[(0, 5)]).is_err());
    }

    #[test]
    fn edgelist_round_trip() {
        let g = WeightedGraph::from_weighted_edges(4, &[(0, 1, 1), (1, 2, 3), (2, 3, 0)]).unwrap();
        let text = write_edgelist(&g, None);
        let h = parse_edgelist(&text).unwrap();
        assert_eq!(h.n(), 4);
        assert_eq!(h.m(), 3);
        assert_eq!(sssp(&h, 0), sssp(&g, 0));
    }

    #[test]
    fn edgelist_default_weight_and_errors() {
        let g = parse_edgelist("p 2 1\ne 0 1\n").unwrap();
        assert!(g.all_unit());
        assert!(parse_edgelist("e 0 1\n").is_err());
        assert!(parse_edgelist("p 2 2\ne 0 1\n").is_err());
        assert!(parse_edgelist("p 2 1\nq 0 1\n").is_err());
    }

    // sssp agrees with a Floyd-Warshall oracle on small random graphs.
    #[test]
    fn sssp_matches_floyd_warshall() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..40 {
            let n = rng.gen_range(1..=64usize);
            let mut edges = Vec::new();
            for u in 0..n as Vertex {
                for v in u + 1..n as Vertex {
                    if rng.gen_bool(0.12) {
                        let w = if trial % 2 == 0 { 1 } else { rng.gen_range(0..=4) };
                        edges.push((u, v, w));
                    }
                }
            }
            let g = WeightedGraph::from_weighted_edges(n, &edges).unwrap();
            let fw = floyd_warshall(&g);
            for s in 0..n as Vertex {
                assert_eq!(sssp(&g, s), fw[s as usize], "source {s}");
            }
        }
    }

    fn floyd_warshall(g: &WeightedGraph) -> Vec<Vec<Dist>> {
        let n = g.n();
        let mut d = vec![vec![Dist::INFINITY; n]; n];
        for v in 0..n {
            d[v][v] = Dist::ZERO;
        }
        for (u, v, w) in g.edges() {
            let w = Dist::new(w as u64);
            if w < d[u as usize][v as usize] {
                d[u as usize][v as usize] = w;
                d[v as usize][u as usize] = w;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        d
    }

    // multi_source_dist is the pointwise min of per-source runs.
    #[test]
    fn multi_source_is_min_of_sssp() {
        use rand::{seq::SliceRandom, Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let n = rng.gen_range(2..=40usize);
            let mut edges = Vec::new();
            for u in 0..n as Vertex {
                for v in u + 1..n as Vertex {
                    if rng.gen_bool(0.15) {
                        edges.push((u, v, rng.gen_range(0..=3)));
                    }
                }
            }
            let g = WeightedGraph::from_weighted_edges(n, &edges).unwrap();
            let mut all: Vec<Vertex> = (0..n as Vertex).collect();
            all.shuffle(&mut rng);
            let s = &all[..rng.gen_range(1..=n)];
            let multi = multi_source_dist(&g, s);
            for v in 0..n {
                let best = s
                    .iter()
                    .map(|&src| sssp(&g, src)[v])
                    .min()
                    .unwrap_or(Dist::INFINITY);
                assert_eq!(multi[v], best);
            }
        }
    }
}
