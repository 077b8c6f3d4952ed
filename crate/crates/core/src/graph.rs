//! Finite and lazily-infinite graph representations: vertex keys, rooted
//! oracles, balls with BFS distances, shortest paths, and cluster
//! decomposition. Everything downstream builds on this module.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::unionfind::UnionFind;

/// Default cap on ball sizes; guards super-polynomial inputs.
pub const DEFAULT_BALL_CAP: usize = 5_000_000;

/// Canonical vertex key: a fixed-width signed coordinate tuple.
///
/// Two `VertexId`s are equal iff they denote the same vertex; constructors
/// are responsible for normalizing coordinates (e.g. modular reduction)
/// before building one.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(Vec<i64>);

impl VertexId {
    pub fn new(coords: Vec<i64>) -> Self {
        VertexId(coords)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self)
    }
}

/// A rooted, lazily enumerable, vertex-transitive graph.
///
/// Implementations must be pure: repeated `neighbors` calls return the
/// same list in the same order, with no self-loops and no duplicates,
/// and `u in neighbors(v)` iff `v in neighbors(u)`.
pub trait GraphOracle: Send + Sync {
    fn root(&self) -> VertexId;
    fn neighbors(&self, v: &VertexId) -> Vec<VertexId>;
    fn label(&self) -> String;
}

/// An induced finite subgraph, typically a ball of an oracle.
///
/// Vertex order is construction order (BFS discovery order for balls);
/// adjacency lists are stored sorted by vertex index.
#[derive(Clone)]
pub struct FiniteGraph {
    vertices: Vec<VertexId>,
    index: HashMap<VertexId, u32>,
    adj: Vec<Vec<u32>>,
    root: Option<u32>,
    dist_from_root: Option<Vec<u32>>,
}

impl FiniteGraph {
    /// Builds a graph from explicit vertices and undirected edges.
    /// Edges must reference listed vertices; duplicates are rejected.
    pub fn from_edges(vertices: Vec<VertexId>, edges: &[(u32, u32)], root: Option<u32>) -> Self {
        let n = vertices.len();
        let index: HashMap<VertexId, u32> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i as u32))
            .collect();
        assert_eq!(index.len(), n, "duplicate vertex ids");
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            assert!(a != b, "self-loop");
            assert!((a as usize) < n && (b as usize) < n, "edge out of range");
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let mut g = FiniteGraph {
            vertices,
            index,
            adj,
            root,
            dist_from_root: None,
        };
        if root.is_some() {
            g.dist_from_root = Some(g.bfs_distances_from(root.unwrap()));
        }
        g
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: u32) -> &VertexId {
        &self.vertices[i as usize]
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn index_of(&self, v: &VertexId) -> Option<u32> {
        self.index.get(v).copied()
    }

    pub fn neighbors(&self, i: u32) -> &[u32] {
        &self.adj[i as usize]
    }

    pub fn degree(&self, i: u32) -> usize {
        self.adj[i as usize].len()
    }

    pub fn root(&self) -> Option<u32> {
        self.root
    }

    pub fn dist_from_root(&self) -> Option<&[u32]> {
        self.dist_from_root.as_deref()
    }

    /// Radius of the window: the largest BFS distance from the root.
    pub fn radius(&self) -> Option<u32> {
        self.dist_from_root.as_ref().map(|d| d.iter().copied().max().unwrap_or(0))
    }

    /// Undirected edges as (i, j) with i < j, ascending. This order is the
    /// canonical edge indexing used by bond percolation and serialization.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (i, list) in self.adj.iter().enumerate() {
            for &j in list {
                if (i as u32) < j {
                    out.push((i as u32, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|l| l.len()).sum::<usize>() / 2
    }

    /// BFS distances from `start` within this graph; u32::MAX marks
    /// unreachable vertices.
    pub fn bfs_distances_from(&self, start: u32) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.len()];
        let mut queue = VecDeque::new();
        dist[start as usize] = 0;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &w in &self.adj[u as usize] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// BFS distances truncated at `max_depth` (entries beyond stay u32::MAX).
    pub fn bfs_distances_capped(&self, start: u32, max_depth: u32) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.len()];
        let mut queue = VecDeque::new();
        dist[start as usize] = 0;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            if du == max_depth {
                continue;
            }
            for &w in &self.adj[u as usize] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Exact shortest-path distance between two vertices, or None if
    /// unreachable.
    pub fn distance(&self, u: &VertexId, v: &VertexId) -> Result<Option<u32>> {
        let ui = self
            .index_of(u)
            .ok_or_else(|| Error::UnknownVertex(u.to_string()))?;
        let vi = self
            .index_of(v)
            .ok_or_else(|| Error::UnknownVertex(v.to_string()))?;
        Ok(self.distance_idx(ui, vi))
    }

    pub fn distance_idx(&self, u: u32, v: u32) -> Option<u32> {
        if u == v {
            return Some(0);
        }
        // Bidirectional would be faster; plain BFS is fine at our sizes.
        let dist = self.bfs_distances_from(u);
        match dist[v as usize] {
            u32::MAX => None,
            d => Some(d),
        }
    }

    /// The induced subgraph on `keep` (indices into this graph), preserving
    /// relative vertex order. Root is carried over when kept.
    pub fn induced(&self, keep: &[u32]) -> FiniteGraph {
        let vertices: Vec<VertexId> = keep.iter().map(|&i| self.vertices[i as usize].clone()).collect();
        let old_to_new: HashMap<u32, u32> = keep
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new as u32))
            .collect();
        let mut edges = Vec::new();
        for (new_i, &old_i) in keep.iter().enumerate() {
            for &old_j in &self.adj[old_i as usize] {
                if let Some(&new_j) = old_to_new.get(&old_j) {
                    if (new_i as u32) < new_j {
                        edges.push((new_i as u32, new_j));
                    }
                }
            }
        }
        let root = self.root.and_then(|r| old_to_new.get(&r).copied());
        FiniteGraph::from_edges(vertices, &edges, root)
    }
}

impl fmt::Debug for FiniteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FiniteGraph({} vertices, {} edges, root {:?})",
            self.len(),
            self.edge_count(),
            self.root
        )
    }
}

/// The ball of radius `r` around `center`: the induced subgraph on
/// vertices at distance <= r, rooted, with BFS distances populated.
/// Vertex order is BFS discovery order with neighbor lists iterated in
/// oracle order.
pub fn ball(oracle: &dyn GraphOracle, center: &VertexId, r: u32) -> Result<FiniteGraph> {
    ball_capped(oracle, center, r, DEFAULT_BALL_CAP)
}

pub fn ball_capped(
    oracle: &dyn GraphOracle,
    center: &VertexId,
    r: u32,
    cap: usize,
) -> Result<FiniteGraph> {
    ball_inner(oracle, center, r, cap, true)
}

/// The exploration ball of radius `r`: same vertex set as [`ball`], but
/// carrying only the edges witnessed by a depth-`r` exploration (those
/// with an endpoint at depth <= r-1). Edges between two depth-`r`
/// vertices are invisible at this depth and excluded. This is the ball
/// flavor that local-convergence comparisons use.
pub fn exploration_ball(
    oracle: &dyn GraphOracle,
    center: &VertexId,
    r: u32,
    cap: usize,
) -> Result<FiniteGraph> {
    ball_inner(oracle, center, r, cap, false)
}

fn ball_inner(
    oracle: &dyn GraphOracle,
    center: &VertexId,
    r: u32,
    cap: usize,
    include_sphere_edges: bool,
) -> Result<FiniteGraph> {
    let mut vertices = vec![center.clone()];
    let mut index: HashMap<VertexId, u32> = HashMap::new();
    index.insert(center.clone(), 0);
    let mut dist = vec![0u32];
    let mut adj: Vec<Vec<u32>> = vec![Vec::new()];
    let mut queue = VecDeque::new();
    queue.push_back(0u32);

    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        if du == r {
            continue;
        }
        let here = vertices[u as usize].clone();
        for w in oracle.neighbors(&here) {
            debug_assert_ne!(w, here, "oracle returned a self-loop");
            let wi = match index.get(&w) {
                Some(&wi) => wi,
                None => {
                    if vertices.len() >= cap {
                        return Err(Error::BallCapExceeded { cap, radius: r });
                    }
                    let wi = vertices.len() as u32;
                    index.insert(w.clone(), wi);
                    vertices.push(w);
                    dist.push(du + 1);
                    adj.push(Vec::new());
                    queue.push_back(wi);
                    wi
                }
            };
            adj[u as usize].push(wi);
        }
    }

    // Expansion recorded every arc out of vertices at depth <= r-1; all
    // such endpoints are inside the ball. Symmetrize and sort.
    let n = vertices.len();
    let mut sym: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (u, list) in adj.iter().enumerate() {
        for &w in list {
            sym[u].push(w);
            sym[w as usize].push(u as u32);
        }
    }
    for list in &mut sym {
        list.sort_unstable();
        list.dedup();
    }
    let mut edges = Vec::new();
    for (u, list) in sym.iter().enumerate() {
        for &w in list {
            if (u as u32) < w {
                edges.push((u as u32, w));
            }
        }
    }
    // Edges between two vertices at distance exactly r were never expanded
    // from either side; the induced subgraph needs them, so query the
    // oracle on the sphere once more.
    if include_sphere_edges && r > 0 {
        for u in 0..n {
            if dist[u] == r {
                for w in oracle.neighbors(&vertices[u]) {
                    if let Some(&wi) = index.get(&w) {
                        if dist[wi as usize] == r && (u as u32) < wi {
                            edges.push((u as u32, wi));
                        }
                    }
                }
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(FiniteGraph::from_edges(vertices, &edges, Some(0)))
}

/// Site or bond percolation flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Site,
    Bond,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Site => write!(f, "site"),
            Mode::Bond => write!(f, "bond"),
        }
    }
}

/// A partition of vertices into connected components.
///
/// Site mode: components of open vertices joined by open-vertex paths;
/// closed vertices are absent. Bond mode: all vertices retained,
/// components follow open edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clusters {
    pub components: Vec<Vec<u32>>,
}

impl Clusters {
    pub fn component_of(&self, v: u32) -> Option<usize> {
        self.components.iter().position(|c| c.binary_search(&v).is_ok())
    }
}

/// Decomposes the open set into connected clusters.
pub fn clusters(graph: &FiniteGraph, open: &OpenSet, mode: Mode) -> Clusters {
    let n = graph.len();
    let mut uf = UnionFind::new(n);
    match (mode, open) {
        (Mode::Site, OpenSet::Vertices(bits)) => {
            assert_eq!(bits.len(), n);
            for (u, list) in (0..n as u32).map(|u| (u, graph.neighbors(u))) {
                if !bits[u as usize] {
                    continue;
                }
                for &w in list {
                    if w > u && bits[w as usize] {
                        uf.union(u, w);
                    }
                }
            }
            let mut groups: HashMap<u32, Vec<u32>> = HashMap::new();
            for v in 0..n as u32 {
                if bits[v as usize] {
                    groups.entry(uf.find(v)).or_default().push(v);
                }
            }
            let mut components: Vec<Vec<u32>> = groups.into_values().collect();
            for c in &mut components {
                c.sort_unstable();
            }
            components.sort_by_key(|c| c[0]);
            Clusters { components }
        }
        (Mode::Bond, OpenSet::Edges(bits)) => {
            let edges = graph.edges();
            assert_eq!(bits.len(), edges.len());
            for (e, &(a, b)) in edges.iter().enumerate() {
                if bits[e] {
                    uf.union(a, b);
                }
            }
            let mut groups: HashMap<u32, Vec<u32>> = HashMap::new();
            for v in 0..n as u32 {
                groups.entry(uf.find(v)).or_default().push(v);
            }
            let mut components: Vec<Vec<u32>> = groups.into_values().collect();
            for c in &mut components {
                c.sort_unstable();
            }
            components.sort_by_key(|c| c[0]);
            Clusters { components }
        }
        _ => panic!("open-set kind does not match mode"),
    }
}

/// Which elements of a region are open.
#[derive(Debug, Clone)]
pub enum OpenSet {
    Vertices(Vec<bool>),
    Edges(Vec<bool>),
}

// ---------------------------------------------------------------------
// Text fixture format
// ---------------------------------------------------------------------

/// Serializes to the text edge-list fixture format:
/// `vertices N root K` header (K is an index or `-`), then `V <id-tuple>`
/// lines in vertex order, then `E <i> <j>` lines with i < j ascending.
pub fn write_edge_list(graph: &FiniteGraph) -> String {
    let mut out = String::new();
    let root = match graph.root() {
        Some(r) => r.to_string(),
        None => "-".to_string(),
    };
    out.push_str(&format!("vertices {} root {}\n", graph.len(), root));
    for v in graph.vertices() {
        out.push_str(&format!("V {}\n", v));
    }
    for (i, j) in graph.edges() {
        out.push_str(&format!("E {} {}\n", i, j));
    }
    out
}

pub fn parse_edge_list(text: &str) -> Result<FiniteGraph> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty fixture".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "vertices" || parts[2] != "root" {
        return Err(Error::Parse(format!("bad header: {header}")));
    }
    let n: usize = parts[1]
        .parse()
        .map_err(|_| Error::Parse(format!("bad vertex count: {}", parts[1])))?;
    let root = if parts[3] == "-" {
        None
    } else {
        Some(
            parts[3]
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad root: {}", parts[3])))?,
        )
    };
    let mut vertices = Vec::with_capacity(n);
    let mut edges = Vec::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("V ") {
            let coords: std::result::Result<Vec<i64>, _> =
                rest.split(',').map(|c| c.trim().parse::<i64>()).collect();
            vertices.push(VertexId::new(
                coords.map_err(|_| Error::Parse(format!("bad vertex line: {line}")))?,
            ));
        } else if let Some(rest) = line.strip_prefix("E ") {
            let mut it = rest.split_whitespace();
            let i: u32 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad edge line: {line}")))?;
            let j: u32 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad edge line: {line}")))?;
            edges.push((i, j));
        } else {
            return Err(Error::Parse(format!("unexpected line: {line}")));
        }
    }
    if vertices.len() != n {
        return Err(Error::Parse(format!(
            "header said {} vertices, found {}",
            n,
            vertices.len()
        )));
    }
    Ok(FiniteGraph::from_edges(vertices, &edges, root))
}

// ---------------------------------------------------------------------
// Small fixture constructors
// ---------------------------------------------------------------------

pub fn path_graph(n: usize) -> FiniteGraph {
    let vertices = (0..n as i64).map(|i| VertexId::new(vec![i])).collect();
    let edges: Vec<(u32, u32)> = (0..n.saturating_sub(1) as u32).map(|i| (i, i + 1)).collect();
    FiniteGraph::from_edges(vertices, &edges, Some(0))
}

pub fn cycle_graph(n: usize) -> FiniteGraph {
    assert!(n >= 3);
    let vertices = (0..n as i64).map(|i| VertexId::new(vec![i])).collect();
    let mut edges: Vec<(u32, u32)> = (0..n as u32 - 1).map(|i| (i, i + 1)).collect();
    edges.push((0, n as u32 - 1));
    FiniteGraph::from_edges(vertices, &edges, Some(0))
}

pub fn star_graph(leaves: usize) -> FiniteGraph {
    let vertices = (0..=leaves as i64).map(|i| VertexId::new(vec![i])).collect();
    let edges: Vec<(u32, u32)> = (1..=leaves as u32).map(|i| (0, i)).collect();
    FiniteGraph::from_edges(vertices, &edges, Some(0))
}

pub fn complete_graph(n: usize) -> FiniteGraph {
    let vertices = (0..n as i64).map(|i| VertexId::new(vec![i])).collect();
    let mut edges = Vec::new();
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            edges.push((i, j));
        }
    }
    FiniteGraph::from_edges(vertices, &edges, Some(0))
}

/// Shares a graph across configs and nets.
pub type SharedGraph = Arc<FiniteGraph>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::{make_oracle, GroupSpec};

    fn z1() -> impl GraphOracle {
        make_oracle(&GroupSpec::free_abelian_std(1)).unwrap()
    }

    fn z2() -> impl GraphOracle {
        make_oracle(&GroupSpec::free_abelian_std(2)).unwrap()
    }

    #[test]
    fn ball_on_the_line_has_2r_plus_1_vertices() {
        let oracle = z1();
        let b = ball(&oracle, &oracle.root(), 2).unwrap();
        assert_eq!(b.len(), 5);
        let mut coords: Vec<i64> = b.vertices().iter().map(|v| v.coords()[0]).collect();
        coords.sort_unstable();
        assert_eq!(coords, vec![-2, -1, 0, 1, 2]);
    }

    #[test]
    fn radius_zero_ball_is_a_single_vertex() {
        let oracle = z2();
        let b = ball(&oracle, &oracle.root(), 0).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.root(), Some(0));
        assert_eq!(b.edge_count(), 0);
    }

    #[test]
    fn plane_two_ball_has_13_vertices() {
        let oracle = z2();
        let b = ball(&oracle, &oracle.root(), 2).unwrap();
        assert_eq!(b.len(), 13); // 1 + 4 + 8 by direct BFS enumeration
    }

    #[test]
    fn ball_cap_is_enforced() {
        let oracle = z2();
        match ball_capped(&oracle, &oracle.root(), 10, 17) {
            Err(Error::BallCapExceeded { cap: 17, .. }) => {}
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn balls_are_nested_induced_subgraphs() {
        let oracle = z2();
        let mut prev: Option<FiniteGraph> = None;
        for r in 0..=5 {
            let b = ball(&oracle, &oracle.root(), r).unwrap();
            if let Some(p) = &prev {
                assert!(b.len() >= p.len());
                // Every vertex and every induced edge of the smaller ball
                // appears in the bigger one.
                for v in p.vertices() {
                    assert!(b.index_of(v).is_some());
                }
                for (i, j) in p.edges() {
                    let bi = b.index_of(p.vertex(i)).unwrap();
                    let bj = b.index_of(p.vertex(j)).unwrap();
                    assert!(b.neighbors(bi).contains(&bj));
                }
                // And conversely: edges of the big ball between small-ball
                // vertices exist in the small ball (induced).
                for (i, j) in b.edges() {
                    if let (Some(pi), Some(pj)) =
                        (p.index_of(b.vertex(i)), p.index_of(b.vertex(j)))
                    {
                        assert!(p.neighbors(pi).contains(&pj));
                    }
                }
            }
            prev = Some(b);
        }
    }

    #[test]
    fn distance_in_plane_ball_is_l1() {
        let oracle = z2();
        let b = ball(&oracle, &oracle.root(), 3).unwrap();
        let d = b
            .distance(&VertexId::new(vec![0, 0]), &VertexId::new(vec![1, 1]))
            .unwrap();
        assert_eq!(d, Some(2));
        let same = b
            .distance(&VertexId::new(vec![1, -1]), &VertexId::new(vec![1, -1]))
            .unwrap();
        assert_eq!(same, Some(0));
    }

    #[test]
    fn distance_with_diagonal_generator() {
        let spec = GroupSpec::free_abelian(2, vec![vec![1, 0], vec![0, 1], vec![1, 1]]);
        let oracle = make_oracle(&spec).unwrap();
        let b = ball(&oracle, &oracle.root(), 3).unwrap();
        let d = b
            .distance(&VertexId::new(vec![0, 0]), &VertexId::new(vec![2, 2]))
            .unwrap();
        assert_eq!(d, Some(2)); // two diagonal steps, found by BFS
    }

    #[test]
    fn unknown_vertex_is_an_error() {
        let oracle = z1();
        let b = ball(&oracle, &oracle.root(), 1).unwrap();
        let err = b
            .distance(&VertexId::new(vec![0]), &VertexId::new(vec![99]))
            .unwrap_err();
        assert!(matches!(err, Error::UnknownVertex(_)));
    }

    #[test]
    fn distance_symmetry_and_triangle_inequality_sampled() {
        let oracle = z2();
        let b = ball(&oracle, &oracle.root(), 4).unwrap();
        let n = b.len() as u32;
        let stream = crate::rng::CounterStream::new(77);
        for t in 0..200u64 {
            let u = (stream.below(3 * t, n as u64)) as u32;
            let v = (stream.below(3 * t + 1, n as u64)) as u32;
            let w = (stream.below(3 * t + 2, n as u64)) as u32;
            let duv = b.distance_idx(u, v).unwrap();
            let dvu = b.distance_idx(v, u).unwrap();
            let dvw = b.distance_idx(v, w).unwrap();
            let duw = b.distance_idx(u, w).unwrap();
            assert_eq!(duv, dvu);
            assert!(duw <= duv + dvw);
        }
    }

    #[test]
    fn site_clusters_partition_the_open_set() {
        let g = path_graph(3);
        // middle vertex closed: two singletons
        let open = OpenSet::Vertices(vec![true, false, true]);
        let cl = clusters(&g, &open, Mode::Site);
        assert_eq!(cl.components, vec![vec![0], vec![2]]);

        // all open on a connected graph: one component
        let open = OpenSet::Vertices(vec![true, true, true]);
        let cl = clusters(&g, &open, Mode::Site);
        assert_eq!(cl.components, vec![vec![0, 1, 2]]);

        // all closed: empty partition
        let open = OpenSet::Vertices(vec![false, false, false]);
        let cl = clusters(&g, &open, Mode::Site);
        assert!(cl.components.is_empty());
    }

    #[test]
    fn bond_clusters_retain_all_vertices() {
        let g = path_graph(3); // edges (0,1), (1,2)
        let open = OpenSet::Edges(vec![true, false]);
        let cl = clusters(&g, &open, Mode::Bond);
        assert_eq!(cl.components, vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn edge_list_round_trip() {
        let oracle = z2();
        let b = ball(&oracle, &oracle.root(), 2).unwrap();
        let text = write_edge_list(&b);
        let parsed = parse_edge_list(&text).unwrap();
        assert_eq!(parsed.len(), b.len());
        assert_eq!(parsed.edges(), b.edges());
        assert_eq!(parsed.vertices(), b.vertices());
        assert_eq!(parsed.root(), b.root());
        assert_eq!(parsed.dist_from_root(), b.dist_from_root());
    }

    #[test]
    fn edge_list_golden_fixture() {
        let oracle = z1();
        let b = ball(&oracle, &oracle.root(), 1).unwrap();
        // Generators declared as +1, -1: BFS discovers 1 before -1.
        assert_eq!(write_edge_list(&b), "vertices 3 root 0\nV 0\nV 1\nV -1\nE 0 1\nE 0 2\n");
    }
}
