//! Bernoulli percolation sampling, the finite-size block event, the
//! renormalized site process on a net, independence-radius certification,
//! constructive gluing of renormalized paths, and threshold estimation.

use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{ball_capped, GraphOracle, Mode, SharedGraph};
use crate::nets::Net;
use crate::rng::{sample_counter, CounterStream};
use crate::stats::{crossing_point, isotonic_nondecreasing, percentile, wilson_ci, Z_95};
use crate::unionfind::UnionFind;

/// A sampled percolation configuration. Regenerating from
/// (region, mode, p, seed, sample) reproduces `open` bit for bit; the
/// underlying uniforms are shared across p, so configurations are coupled
/// monotonically in p.
#[derive(Debug, Clone)]
pub struct PercolationConfig {
    pub region: SharedGraph,
    pub mode: Mode,
    pub p: f64,
    pub seed: u64,
    pub sample: u32,
    pub open: Vec<bool>,
}

/// Samples a configuration; each site (or edge, in bond mode) is open
/// independently with probability p, driven by the counter stream keyed
/// by seed with counter composed from (sample, element index).
pub fn sample_indexed(
    region: SharedGraph,
    mode: Mode,
    p: f64,
    seed: u64,
    sample: u32,
) -> PercolationConfig {
    let stream = CounterStream::new(seed);
    let count = match mode {
        Mode::Site => region.len(),
        Mode::Bond => region.edge_count(),
    };
    let open: Vec<bool> = (0..count)
        .map(|e| stream.bernoulli(sample_counter(sample, e as u32), p))
        .collect();
    PercolationConfig {
        region,
        mode,
        p,
        seed,
        sample,
        open,
    }
}

pub fn sample(region: SharedGraph, mode: Mode, p: f64, seed: u64) -> PercolationConfig {
    sample_indexed(region, mode, p, seed, 0)
}

/// Truncated BFS distances from `start`, as a dense array with u32::MAX
/// beyond the cap.
fn dist_capped(region: &crate::graph::FiniteGraph, start: u32, cap: u32) -> Vec<u32> {
    region.bfs_distances_capped(start, cap)
}

/// Decides the block event at center `v` with scale `n`: (i) some cluster
/// of the configuration restricted to the 10n-ball around v meets the
/// n-ball and contains a vertex at distance exactly 10n, and (ii) all
/// clusters of the restriction to the 5n-ball that meet the 2n-ball and
/// contain a vertex at distance exactly 5n are one cluster.
pub fn event_en(config: &PercolationConfig, v: u32, n: u32) -> Result<bool> {
    Ok(event_en_with_witness(config, v, n)?.0)
}

/// Same as [`event_en`], also returning a witness when the event holds:
/// an open vertex inside the n-ball belonging to a qualifying cluster of
/// clause (i). The witness anchors constructive gluing.
pub fn event_en_with_witness(config: &PercolationConfig, v: u32, n: u32) -> Result<(bool, Option<u32>)> {
    if n == 0 {
        return Err(Error::InvalidParameter("block scale n must be >= 1".into()));
    }
    let region = &config.region;
    let dist_root = region
        .dist_from_root()
        .ok_or_else(|| Error::InvalidParameter("region must be rooted".into()))?;
    let radius = region.radius().unwrap();
    if dist_root[v as usize] + 10 * n > radius {
        return Err(Error::InsufficientMargin {
            need: 10 * n,
            have: radius - dist_root[v as usize],
        });
    }
    let dist_v = dist_capped(region, v, 10 * n);

    let open_vertex = |u: u32| -> bool {
        match config.mode {
            Mode::Site => config.open[u as usize],
            // Bond mode retains every vertex; clusters follow open edges.
            Mode::Bond => true,
        }
    };

    // Cluster pass over a ball of the given radius: unions between
    // qualifying vertices, then per-root summaries.
    let cluster_stats = |limit: u32, uf: &mut UnionFind| {
        match config.mode {
            Mode::Site => {
                for u in 0..region.len() as u32 {
                    if dist_v[u as usize] <= limit && config.open[u as usize] {
                        for &w in region.neighbors(u) {
                            if w > u && dist_v[w as usize] <= limit && config.open[w as usize] {
                                uf.union(u, w);
                            }
                        }
                    }
                }
            }
            Mode::Bond => {
                for (e, &(a, b)) in region.edges().iter().enumerate() {
                    if config.open[e]
                        && dist_v[a as usize] <= limit
                        && dist_v[b as usize] <= limit
                    {
                        uf.union(a, b);
                    }
                }
            }
        }
    };

    // Clause (i) on the 10n-ball.
    let mut uf = UnionFind::new(region.len());
    cluster_stats(10 * n, &mut uf);
    use std::collections::HashMap;
    let mut meets_bn: HashMap<u32, bool> = HashMap::new();
    let mut touches_sphere: HashMap<u32, bool> = HashMap::new();
    for u in 0..region.len() as u32 {
        let d = dist_v[u as usize];
        if d <= 10 * n && open_vertex(u) {
            let r = uf.find(u);
            if d <= n {
                meets_bn.insert(r, true);
            }
            if d == 10 * n {
                touches_sphere.insert(r, true);
            }
        }
    }
    let mut clause1 = false;
    let mut witness = None;
    for u in 0..region.len() as u32 {
        let d = dist_v[u as usize];
        if d <= n && open_vertex(u) {
            let r = uf.find(u);
            if meets_bn.get(&r) == Some(&true) && touches_sphere.get(&r) == Some(&true) {
                clause1 = true;
                witness = Some(u);
                break;
            }
        }
    }
    if !clause1 {
        return Ok((false, None));
    }

    // Clause (ii) on the 5n-ball.
    let mut uf2 = UnionFind::new(region.len());
    cluster_stats(5 * n, &mut uf2);
    let mut meets_b2n: HashMap<u32, bool> = HashMap::new();
    let mut touches_5n: HashMap<u32, bool> = HashMap::new();
    for u in 0..region.len() as u32 {
        let d = dist_v[u as usize];
        if d <= 5 * n && open_vertex(u) {
            let r = uf2.find(u);
            if d <= 2 * n {
                meets_b2n.insert(r, true);
            }
            if d == 5 * n {
                touches_5n.insert(r, true);
            }
        }
    }
    let crossing_clusters = meets_b2n
        .keys()
        .filter(|r| touches_5n.get(r) == Some(&true))
        .count();
    Ok((crossing_clusters <= 1, if crossing_clusters <= 1 { witness } else { None }))
}

/// A Wilson-scored estimate of an event probability.
#[derive(Debug, Clone, Copy)]
pub struct EventEstimate {
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub samples: u32,
    pub successes: u32,
}

/// Monte Carlo estimate of P(E_n) at the root: fresh configuration per
/// sample on a shared 10n-ball region, Wilson 95% interval. By
/// transitivity the probability does not depend on the center, so the
/// root is fixed.
pub fn estimate_event_prob(
    oracle: &dyn GraphOracle,
    mode: Mode,
    p: f64,
    n: u32,
    samples: u32,
    seed: u64,
    cap: usize,
) -> Result<EventEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let region = Arc::new(ball_capped(oracle, &oracle.root(), 10 * n, cap)?);
    let successes = (0..samples)
        .into_par_iter()
        .map(|i| {
            let cfg = sample_indexed(region.clone(), mode, p, seed, i);
            event_en(&cfg, 0, n).map(|b| b as u32)
        })
        .try_reduce(|| 0u32, |a, b| Ok(a + b))?;
    let (p_hat, ci_lo, ci_hi) = wilson_ci(successes as u64, samples as u64, Z_95);
    Ok(EventEstimate {
        p_hat,
        ci_lo,
        ci_hi,
        samples,
        successes,
    })
}

/// The renormalized site process on a net: eta(v) = E_n(v) per interior
/// net point, with boundary points left indeterminate. Witnesses anchor
/// the gluing check.
#[derive(Debug, Clone)]
pub struct RenormalizedProcess {
    pub net: Net,
    pub n: u32,
    /// Per net point (by position): Some(value) for interior points,
    /// None for boundary points excluded from downstream analysis.
    pub eta: Vec<Option<bool>>,
    /// Clause-(i) witnesses for points whose eta is Some(true).
    pub witness: Vec<Option<u32>>,
}

impl RenormalizedProcess {
    pub fn open_interior_positions(&self) -> Vec<u32> {
        (0..self.eta.len() as u32)
            .filter(|&pos| self.eta[pos as usize] == Some(true))
            .collect()
    }
}

/// Evaluates eta over the net's interior (margin 10n). The net must come
/// from the standard pipeline at block scale n: a = ceil(n / (4C)) and
/// b = C a for the supplied C.
pub fn renormalize(
    config: &PercolationConfig,
    net: &Net,
    n: u32,
    c_control: u32,
) -> Result<RenormalizedProcess> {
    let expected_a = n.div_ceil(4 * c_control);
    if net.a() != expected_a {
        return Err(Error::BlockScaleRelation {
            expected: expected_a,
            got: net.a(),
        });
    }
    if net.b() != c_control * net.a() {
        return Err(Error::InvalidParameter(format!(
            "pipeline net must have b = C a = {}, got {}",
            c_control * net.a(),
            net.b()
        )));
    }
    if !Arc::ptr_eq(&config.region, net.host())
        && (config.region.len() != net.host().len() || config.region.root() != net.host().root())
    {
        return Err(Error::InvalidParameter(
            "configuration region and net host differ".into(),
        ));
    }
    let margin = 10 * n;
    let interior = net.interior_point_positions(margin);
    let radius = net.host().radius().unwrap();
    if interior.is_empty() {
        return Err(Error::InsufficientMargin {
            need: margin,
            have: radius,
        });
    }
    let mut eta = vec![None; net.points().len()];
    let mut witness = vec![None; net.points().len()];
    let results: Vec<(u32, bool, Option<u32>)> = interior
        .par_iter()
        .map(|&pos| {
            let v = net.points()[pos as usize];
            let (val, wit) = event_en_with_witness(config, v, n)?;
            Ok((pos, val, wit))
        })
        .collect::<Result<Vec<_>>>()?;
    for (pos, val, wit) in results {
        eta[pos as usize] = Some(val);
        witness[pos as usize] = wit;
    }
    Ok(RenormalizedProcess {
        net: net.clone(),
        n,
        eta,
        witness,
    })
}

/// Eta fixture: net fixture block, then `H <pos> <0|1|->` per point.
pub fn write_eta_fixture(rp: &RenormalizedProcess) -> String {
    let mut out = crate::nets::write_net_fixture(&rp.net);
    for (pos, e) in rp.eta.iter().enumerate() {
        let bit = match e {
            Some(true) => "1",
            Some(false) => "0",
            None => "-",
        };
        out.push_str(&format!("H {pos} {bit}\n"));
    }
    out
}

/// Report from the structural independence-radius certification.
#[derive(Debug, Clone)]
pub struct IndependenceReport {
    pub certified: bool,
    pub pairs_checked: u64,
    /// Largest net-graph distance seen between interior pairs.
    pub max_net_distance: u32,
    /// (pos_u, pos_v, net distance, host distance) for violating pairs.
    pub violations: Vec<(u32, u32, u32, u32)>,
}

/// Certifies structural 80-independence of eta: every interior net pair
/// at net-graph distance > 80 must have disjoint 10n-balls, i.e. host
/// distance > 20n. Exhaustive over interior pairs.
pub fn independence_radius_report(net: &Net, n: u32) -> IndependenceReport {
    let interior = net.interior_point_positions(10 * n);
    let mut flag = vec![false; net.points().len()];
    for &pos in &interior {
        flag[pos as usize] = true;
    }
    let per_source: Vec<(u64, u32, Vec<(u32, u32, u32, u32)>)> = interior
        .par_iter()
        .map(|&pos| {
            let d_net = net.net_distances_from(pos);
            let mut pairs = 0u64;
            let mut max_d = 0u32;
            let far: Vec<u32> = ((pos + 1)..net.points().len() as u32)
                .filter(|&o| flag[o as usize])
                .inspect(|&o| {
                    pairs += 1;
                    if d_net[o as usize] != u32::MAX {
                        max_d = max_d.max(d_net[o as usize]);
                    }
                })
                .filter(|&o| d_net[o as usize] > 80)
                .collect();
            let mut violations = Vec::new();
            if !far.is_empty() {
                let d_host = net.host().bfs_distances_from(net.points()[pos as usize]);
                for o in far {
                    let dh = d_host[net.points()[o as usize] as usize];
                    if dh <= 20 * n {
                        violations.push((pos, o, d_net[o as usize], dh));
                    }
                }
            }
            (pairs, max_d, violations)
        })
        .collect();
    let mut pairs_checked = 0;
    let mut max_net_distance = 0;
    let mut violations = Vec::new();
    for (p, m, v) in per_source {
        pairs_checked += p;
        max_net_distance = max_net_distance.max(m);
        violations.extend(v);
    }
    IndependenceReport {
        certified: violations.is_empty(),
        pairs_checked,
        max_net_distance,
        violations,
    }
}

pub fn independence_radius_check(net: &Net, n: u32) -> bool {
    independence_radius_report(net, n).certified
}

/// Do the radius-r balls around two host vertices intersect within the
/// window? Equivalent to host distance <= 2r.
pub fn balls_disjoint(host: &crate::graph::FiniteGraph, u: u32, v: u32, r: u32) -> bool {
    let dist = host.bfs_distances_capped(u, 2 * r);
    dist[v as usize] > 2 * r
}

/// Outcome of constructively gluing renormalized open paths back into
/// host paths.
#[derive(Debug, Clone)]
pub struct GluingReport {
    pub open_interior_points: usize,
    pub edges_checked: usize,
    pub edge_failures: usize,
    pub components_checked: usize,
    pub component_failures: usize,
    pub longest_host_path: usize,
}

/// For every eta-open net edge, extracts an open host path between the
/// endpoints' witnesses inside the union of their 10n-balls; for every
/// eta-open component, extracts an end-to-end open host path through the
/// union of the component path's 10n-balls.
pub fn check_gluing(config: &PercolationConfig, rp: &RenormalizedProcess) -> GluingReport {
    let net = &rp.net;
    let region = &config.region;
    let n = rp.n;
    let open_pos = rp.open_interior_positions();
    let open_flag: Vec<bool> = {
        let mut f = vec![false; net.points().len()];
        for &p in &open_pos {
            f[p as usize] = true;
        }
        f
    };

    // Open host subgraph adjacency test.
    let vertex_open = |u: u32| match config.mode {
        Mode::Site => config.open[u as usize],
        Mode::Bond => true,
    };

    let mut edges: Vec<(u32, u32)> = Vec::new();
    for &pos in &open_pos {
        for &o in &net.net_adj()[pos as usize] {
            if o > pos && open_flag[o as usize] {
                edges.push((pos, o));
            }
        }
    }

    // Union-of-balls membership for a set of block centers.
    let ball_union = |centers: &[u32]| -> Vec<bool> {
        let mut inside = vec![false; region.len()];
        for &pos in centers {
            let d = dist_capped(region, net.points()[pos as usize], 10 * n);
            for u in 0..region.len() {
                if d[u] != u32::MAX {
                    inside[u] = true;
                }
            }
        }
        inside
    };

    // Bond mode walks only open edges; index them up front.
    let edge_open: Option<std::collections::HashMap<(u32, u32), bool>> = match config.mode {
        Mode::Site => None,
        Mode::Bond => Some(
            region
                .edges()
                .iter()
                .enumerate()
                .map(|(e, &(a, b))| ((a, b), config.open[e]))
                .collect(),
        ),
    };

    // BFS through open vertices restricted to `inside`; returns the path.
    let extract_path = |from: u32, to: u32, inside: &[bool]| -> Option<Vec<u32>> {
        if !vertex_open(from) || !vertex_open(to) || !inside[from as usize] || !inside[to as usize]
        {
            return None;
        }
        let mut parent = vec![u32::MAX; region.len()];
        let mut queue = VecDeque::new();
        parent[from as usize] = from;
        queue.push_back(from);
        while let Some(u) = queue.pop_front() {
            if u == to {
                break;
            }
            for &w in region.neighbors(u) {
                if parent[w as usize] == u32::MAX && inside[w as usize] && vertex_open(w) {
                    if let Some(open) = &edge_open {
                        let key = if u < w { (u, w) } else { (w, u) };
                        if !open[&key] {
                            continue;
                        }
                    }
                    parent[w as usize] = u;
                    queue.push_back(w);
                }
            }
        }
        if parent[to as usize] == u32::MAX {
            return None;
        }
        let mut path = vec![to];
        let mut cur = to;
        while cur != from {
            cur = parent[cur as usize];
            path.push(cur);
        }
        path.reverse();
        Some(path)
    };

    let edge_results: Vec<bool> = edges
        .par_iter()
        .map(|&(u_pos, v_pos)| {
            let (wu, wv) = (rp.witness[u_pos as usize], rp.witness[v_pos as usize]);
            let (wu, wv) = match (wu, wv) {
                (Some(a), Some(b)) => (a, b),
                _ => return false,
            };
            let inside = ball_union(&[u_pos, v_pos]);
            match extract_path(wu, wv, &inside) {
                Some(path) => validate_host_path(config, &path),
                None => false,
            }
        })
        .collect();
    let edge_failures = edge_results.iter().filter(|ok| !**ok).count();

    // Component sweep: BFS in the open net subgraph, then one end-to-end
    // extraction through the balls along a net path.
    let mut comp_seen = vec![false; net.points().len()];
    let mut components_checked = 0;
    let mut component_failures = 0;
    let mut longest = 0usize;
    for &start in &open_pos {
        if comp_seen[start as usize] {
            continue;
        }
        // BFS recording parents, tracking the farthest point.
        let mut parent = vec![u32::MAX; net.points().len()];
        let mut queue = VecDeque::new();
        parent[start as usize] = start;
        comp_seen[start as usize] = true;
        queue.push_back(start);
        let mut far = start;
        while let Some(u) = queue.pop_front() {
            far = u;
            for &w in &net.net_adj()[u as usize] {
                if open_flag[w as usize] && parent[w as usize] == u32::MAX {
                    parent[w as usize] = u;
                    comp_seen[w as usize] = true;
                    queue.push_back(w);
                }
            }
        }
        if far == start {
            continue; // singleton component: nothing to glue
        }
        let mut net_path = vec![far];
        let mut cur = far;
        while cur != start {
            cur = parent[cur as usize];
            net_path.push(cur);
        }
        components_checked += 1;
        let inside = ball_union(&net_path);
        let (ws, wf) = (
            rp.witness[start as usize].unwrap(),
            rp.witness[far as usize].unwrap(),
        );
        match extract_path(ws, wf, &inside) {
            Some(path) if validate_host_path(config, &path) => {
                longest = longest.max(path.len());
            }
            _ => component_failures += 1,
        }
    }

    GluingReport {
        open_interior_points: open_pos.len(),
        edges_checked: edges.len(),
        edge_failures,
        components_checked,
        component_failures,
        longest_host_path: longest,
    }
}

/// Independently re-validates an extracted path: consecutive vertices
/// adjacent in the host, and every vertex (site mode) open.
fn validate_host_path(config: &PercolationConfig, path: &[u32]) -> bool {
    if path.is_empty() {
        return false;
    }
    for w in path.windows(2) {
        if !config.region.neighbors(w[0]).contains(&w[1]) {
            return false;
        }
    }
    match config.mode {
        Mode::Site => path.iter().all(|&u| config.open[u as usize]),
        Mode::Bond => true,
    }
}

/// One sampled level of the spanning-probability curve.
#[derive(Debug, Clone, Copy)]
pub struct PcCurvePoint {
    pub p: f64,
    pub trials: u32,
    pub successes: u32,
}

/// Bisection estimate of the percolation threshold via the finite-size
/// spanning event.
#[derive(Debug, Clone)]
pub struct PcEstimate {
    pub p_c_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub bracket: (f64, f64),
    pub curve: Vec<PcCurvePoint>,
}

/// Does the root's open cluster span from the root's r-ball out to the
/// 2r-sphere? The root anchor keeps the crossing point of this event
/// pinned near the true threshold; seeding from the whole inner ball
/// instead lets boundary-length many crossing chances drag the estimate
/// well below it.
pub fn spans(config: &PercolationConfig, r: u32) -> bool {
    let region = &config.region;
    let dist = region.dist_from_root().expect("rooted region");
    let root = region.root().expect("rooted region");
    if config.mode == Mode::Site && !config.open[root as usize] {
        return false;
    }
    let mut uf = UnionFind::new(region.len());
    match config.mode {
        Mode::Site => {
            for u in 0..region.len() as u32 {
                if config.open[u as usize] {
                    for &w in region.neighbors(u) {
                        if w > u && config.open[w as usize] {
                            uf.union(u, w);
                        }
                    }
                }
            }
        }
        Mode::Bond => {
            for (e, &(a, b)) in region.edges().iter().enumerate() {
                if config.open[e] {
                    uf.union(a, b);
                }
            }
        }
    }
    let vertex_open = |u: u32| match config.mode {
        Mode::Site => config.open[u as usize],
        Mode::Bond => true,
    };
    let root_cluster = uf.find(root);
    (0..region.len() as u32).any(|u| {
        dist[u as usize] == 2 * r && vertex_open(u) && uf.find(u) == root_cluster
    })
}

/// Classical region spanning: some open cluster meets the r-ball and
/// contains a vertex at distance exactly 2r from the root. Near-certain
/// deep in the supercritical phase; with boundary-many crossing chances
/// its 1/2-crossing sits well below the threshold, which is why the
/// estimator uses [`spans`] instead.
pub fn annulus_crossing(config: &PercolationConfig, r: u32) -> bool {
    let region = &config.region;
    let dist = region.dist_from_root().expect("rooted region");
    let mut uf = UnionFind::new(region.len());
    match config.mode {
        Mode::Site => {
            for u in 0..region.len() as u32 {
                if config.open[u as usize] {
                    for &w in region.neighbors(u) {
                        if w > u && config.open[w as usize] {
                            uf.union(u, w);
                        }
                    }
                }
            }
        }
        Mode::Bond => {
            for (e, &(a, b)) in region.edges().iter().enumerate() {
                if config.open[e] {
                    uf.union(a, b);
                }
            }
        }
    }
    let vertex_open = |u: u32| match config.mode {
        Mode::Site => config.open[u as usize],
        Mode::Bond => true,
    };
    use std::collections::HashMap;
    let mut meets_inner: HashMap<u32, bool> = HashMap::new();
    let mut meets_outer: HashMap<u32, bool> = HashMap::new();
    for u in 0..region.len() as u32 {
        if !vertex_open(u) {
            continue;
        }
        let c = uf.find(u);
        if dist[u as usize] <= r {
            meets_inner.insert(c, true);
        }
        if dist[u as usize] == 2 * r {
            meets_outer.insert(c, true);
        }
    }
    meets_inner
        .keys()
        .any(|c| meets_outer.get(c) == Some(&true))
}

/// Monte Carlo estimate of the classical spanning probability.
pub fn annulus_crossing_probability(
    region: &SharedGraph,
    mode: Mode,
    p: f64,
    r: u32,
    trials: u32,
    stream: CounterStream,
) -> u32 {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let cfg = sample_indexed(region.clone(), mode, p, stream.seed(), t);
            annulus_crossing(&cfg, r) as u32
        })
        .sum()
}

/// Estimates the spanning probability at a single p.
pub fn spanning_probability(
    region: &SharedGraph,
    mode: Mode,
    p: f64,
    r: u32,
    trials: u32,
    stream: CounterStream,
) -> u32 {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let cfg = sample_indexed(region.clone(), mode, p, stream.seed(), t);
            spans(&cfg, r) as u32
        })
        .sum()
}

/// Bisection on p of the spanning probability, stopping when the bracket
/// is narrower than 0.01; the midpoint is reported with a bootstrap 95%
/// interval over the sampled curve (isotonic-regressed crossing of 1/2).
pub fn estimate_pc(
    oracle: &dyn GraphOracle,
    mode: Mode,
    n_trials: u32,
    region_scale: u32,
    seed: u64,
    cap: usize,
) -> Result<PcEstimate> {
    if n_trials == 0 || region_scale == 0 {
        return Err(Error::InvalidParameter(
            "estimate_pc needs trials >= 1 and region_scale >= 1".into(),
        ));
    }
    let r = region_scale;
    let region = Arc::new(ball_capped(oracle, &oracle.root(), 2 * r, cap)?);
    let stream = CounterStream::new(seed);

    let mut curve: Vec<PcCurvePoint> = Vec::new();
    let mut level = 0u64;
    let probe = |p: f64, curve: &mut Vec<PcCurvePoint>, level: &mut u64| -> f64 {
        let s = spanning_probability(&region, mode, p, r, n_trials, stream.substream(*level));
        *level += 1;
        curve.push(PcCurvePoint {
            p,
            trials: n_trials,
            successes: s,
        });
        s as f64 / n_trials as f64
    };

    // The bracket must be monotone-anchored: no spanning at p = 0, and
    // spanning at p = 1 with probability at least 1/2.
    let hi_prob = probe(1.0, &mut curve, &mut level);
    if hi_prob < 0.5 {
        let raw = curve.iter().map(|c| (c.p, c.successes as f64 / c.trials as f64)).collect();
        return Err(Error::NonMonotoneSpanning(raw));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo >= 0.01 {
        let mid = (lo + hi) / 2.0;
        let prob = probe(mid, &mut curve, &mut level);
        if prob >= 0.5 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let p_c_hat = (lo + hi) / 2.0;

    // Bootstrap: binomial resampling per sampled level, isotonic fit,
    // crossing of 1/2.
    let mut sorted_curve = curve.clone();
    sorted_curve.sort_by(|a, b| a.p.partial_cmp(&b.p).unwrap());
    let xs: Vec<f64> = sorted_curve.iter().map(|c| c.p).collect();
    let boot_stream = stream.substream(0xB007);
    let reps = 200u32;
    let crossings: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut ys = Vec::with_capacity(sorted_curve.len());
            for (li, c) in sorted_curve.iter().enumerate() {
                let p_hat = c.successes as f64 / c.trials as f64;
                let mut k = 0u32;
                for t in 0..c.trials {
                    let ctr = ((rep as u64) << 40) | ((li as u64) << 20) | t as u64;
                    if boot_stream.uniform(ctr) < p_hat {
                        k += 1;
                    }
                }
                ys.push(k as f64 / c.trials as f64);
            }
            let iso = isotonic_nondecreasing(&ys);
            crossing_point(&xs, &iso, 0.5)
        })
        .collect();
    let ci_lo = percentile(&crossings, 0.025);
    let ci_hi = percentile(&crossings, 0.975);

    Ok(PcEstimate {
        p_c_hat,
        ci_lo,
        ci_hi,
        bracket: (lo, hi),
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::{make_oracle, GroupSpec};
    use crate::graph::ball;
    use crate::nets::z2_lattice_net;

    fn plane_region(r: u32) -> SharedGraph {
        let oracle = make_oracle(&GroupSpec::free_abelian_std(2)).unwrap();
        Arc::new(ball(&oracle, &oracle.root(), r).unwrap())
    }

    #[test]
    fn sampling_is_reproducible_and_monotone_in_p() {
        let region = plane_region(10);
        let a = sample(region.clone(), Mode::Site, 0.6, 99);
        let b = sample(region.clone(), Mode::Site, 0.6, 99);
        assert_eq!(a.open, b.open);
        let lo = sample(region.clone(), Mode::Site, 0.4, 99);
        for (x, y) in lo.open.iter().zip(a.open.iter()) {
            if *x {
                assert!(*y);
            }
        }
        let all = sample(region.clone(), Mode::Site, 1.0, 7).open;
        assert!(all.iter().all(|&o| o));
        let none = sample(region, Mode::Site, 0.0, 7).open;
        assert!(none.iter().all(|&o| !o));
    }

    #[test]
    fn open_fraction_concentrates() {
        let region = plane_region(70); // ~10^4 sites
        assert!(region.len() > 9_000);
        for s in 0..20u32 {
            let cfg = sample_indexed(region.clone(), Mode::Site, 0.6, 1234, s);
            let frac = cfg.open.iter().filter(|&&o| o).count() as f64 / cfg.open.len() as f64;
            assert!((frac - 0.6).abs() < 0.02, "seed {s}: fraction {frac}");
        }
    }

    #[test]
    fn event_en_extremes() {
        let region = plane_region(20);
        let full = sample(region.clone(), Mode::Site, 1.0, 1);
        assert!(event_en(&full, 0, 2).unwrap());
        let empty = sample(region.clone(), Mode::Site, 0.0, 1);
        assert!(!event_en(&empty, 0, 2).unwrap());
    }

    #[test]
    fn event_en_needs_margin() {
        let region = plane_region(10);
        let cfg = sample(region.clone(), Mode::Site, 0.5, 1);
        // a vertex at distance 5 from the root only has margin 5 < 20
        let v = (0..region.len() as u32)
            .find(|&i| region.dist_from_root().unwrap()[i as usize] == 5)
            .unwrap();
        assert!(matches!(
            event_en(&cfg, v, 2),
            Err(Error::InsufficientMargin { .. })
        ));
    }

    #[test]
    fn bond_mode_event_extremes() {
        let region = plane_region(20);
        let full = sample(region.clone(), Mode::Bond, 1.0, 3);
        assert!(event_en(&full, 0, 2).unwrap());
        let empty = sample(region, Mode::Bond, 0.0, 3);
        assert!(!event_en(&empty, 0, 2).unwrap());
    }

    #[test]
    fn event_probability_extremes() {
        let oracle = make_oracle(&GroupSpec::free_abelian_std(2)).unwrap();
        let est = estimate_event_prob(&oracle, Mode::Site, 1.0, 2, 50, 5, 1_000_000).unwrap();
        assert_eq!(est.p_hat, 1.0);
        assert!((est.ci_hi - 1.0).abs() < 1e-12);
        let est0 = estimate_event_prob(&oracle, Mode::Site, 0.0, 2, 50, 5, 1_000_000).unwrap();
        assert_eq!(est0.p_hat, 0.0);
    }

    #[test]
    fn renormalize_extremes_and_locality() {
        let region = plane_region(28);
        let net = z2_lattice_net(&GroupSpec::free_abelian_std(2), 1, region.clone()).unwrap();
        let full = sample(region.clone(), Mode::Site, 1.0, 11);
        let rp = renormalize(&full, &net, 2, 1).unwrap();
        let open = rp.open_interior_positions();
        assert!(!open.is_empty());
        for &pos in &open {
            assert_eq!(rp.eta[pos as usize], Some(true));
        }
        assert!(rp.eta.iter().filter(|e| e.is_some()).all(|e| e == &Some(true)));

        let empty = sample(region.clone(), Mode::Site, 0.0, 11);
        let rp0 = renormalize(&empty, &net, 2, 1).unwrap();
        assert!(rp0.eta.iter().filter(|e| e.is_some()).all(|e| e == &Some(false)));
    }

    #[test]
    fn renormalize_checks_the_block_scale_relation() {
        let region = plane_region(28);
        let net = z2_lattice_net(&GroupSpec::free_abelian_std(2), 1, region.clone()).unwrap();
        let cfg = sample(region, Mode::Site, 0.7, 1);
        // n = 8 with C = 1 needs a = 2, not 1
        assert!(matches!(
            renormalize(&cfg, &net, 8, 1),
            Err(Error::BlockScaleRelation { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn eta_depends_only_on_the_local_ball() {
        // Redraw everything outside B_{10n}(v); eta(v) must not change.
        let region = plane_region(26);
        let net = z2_lattice_net(&GroupSpec::free_abelian_std(2), 1, region.clone()).unwrap();
        let n = 2u32;
        let interior = net.interior_point_positions(10 * n);
        let stream = CounterStream::new(2024);
        for trial in 0..100u64 {
            let pos = interior[stream.below(2 * trial, interior.len() as u64) as usize];
            let v = net.points()[pos as usize];
            let seed_a = stream.bits(1000 + 2 * trial);
            let seed_b = stream.bits(1001 + 2 * trial);
            let cfg_a = sample(region.clone(), Mode::Site, 0.6, seed_a);
            let mut far_resampled = cfg_a.clone();
            let cfg_b = sample(region.clone(), Mode::Site, 0.6, seed_b);
            let dist_v = region.bfs_distances_capped(v, 10 * n);
            for u in 0..region.len() {
                if dist_v[u] == u32::MAX {
                    far_resampled.open[u] = cfg_b.open[u];
                }
            }
            let ea = event_en(&cfg_a, v, n).unwrap();
            let eb = event_en(&far_resampled, v, n).unwrap();
            assert_eq!(ea, eb, "trial {trial}");
        }
    }

    #[test]
    fn independence_radius_trivial_and_adversarial() {
        // Distant blocks: balls disjoint by the triangle inequality.
        let region = plane_region(50);
        let u = region.index_of(&crate::graph::VertexId::new(vec![-24, 0])).unwrap();
        let v = region.index_of(&crate::graph::VertexId::new(vec![25, 0])).unwrap();
        assert!(balls_disjoint(&region, u, v, 12)); // host distance 49 > 24

        // A pipeline-shaped net certifies.
        let net = z2_lattice_net(&GroupSpec::free_abelian_std(2), 1, plane_region(45)).unwrap();
        let report = independence_radius_report(&net, 4);
        assert!(report.certified);
        assert!(report.pairs_checked > 0);
    }

    #[test]
    fn independence_radius_fails_on_a_u_shaped_net() {
        // Points along a U at unit spacing, with declared b = 1 far below
        // the ambient scale: arms at host distance 6 but hundreds of
        // net-graph hops apart, overlapping 10n-balls. The certificate
        // must refuse it.
        let region = plane_region(200);
        let arm = 180i64;
        let mut pts = Vec::new();
        for y in 0..=arm {
            pts.push(crate::graph::VertexId::new(vec![0, y]));
            pts.push(crate::graph::VertexId::new(vec![6, y]));
        }
        for x in 1..6i64 {
            pts.push(crate::graph::VertexId::new(vec![x, arm]));
        }
        let idx: Vec<u32> = pts.iter().map(|v| region.index_of(v).unwrap()).collect();
        let net = Net::from_parts(region, idx, 1, 1);
        let report = independence_radius_report(&net, 12);
        assert!(!report.certified);
        let &(u, v, dn, dh) = report.violations.first().unwrap();
        assert!(dn > 80 && dh <= 240, "violation ({u},{v}) d_net={dn} d_host={dh}");
    }

    #[test]
    fn gluing_holds_on_a_fully_open_window() {
        let region = plane_region(26);
        let net = z2_lattice_net(&GroupSpec::free_abelian_std(2), 1, region.clone()).unwrap();
        for mode in [Mode::Site, Mode::Bond] {
            let cfg = sample(region.clone(), mode, 1.0, 4);
            let rp = renormalize(&cfg, &net, 2, 1).unwrap();
            let report = check_gluing(&cfg, &rp);
            assert!(report.edges_checked > 0);
            assert_eq!(report.edge_failures, 0, "{mode}");
            assert_eq!(report.component_failures, 0, "{mode}");
        }
    }

    #[test]
    fn spanning_extremes() {
        let region = plane_region(16);
        let full = sample(region.clone(), Mode::Site, 1.0, 1);
        assert!(spans(&full, 8));
        let empty = sample(region, Mode::Site, 0.0, 1);
        assert!(!spans(&empty, 8));
    }

    #[test]
    fn pc_on_the_line_drifts_toward_one() {
        // One-dimensional percolation: spanning dies off for p < 1, so the
        // estimate climbs as the region grows.
        let line = make_oracle(&GroupSpec::free_abelian_std(1)).unwrap();
        let small = estimate_pc(&line, Mode::Site, 200, 8, 42, 1_000_000).unwrap();
        let big = estimate_pc(&line, Mode::Site, 200, 64, 42, 1_000_000).unwrap();
        assert!(big.p_c_hat > small.p_c_hat);
        assert!(big.p_c_hat > 0.9);
    }

    #[test]
    fn pc_bracket_is_narrow_and_ci_covers_it() {
        let plane = make_oracle(&GroupSpec::free_abelian_std(2)).unwrap();
        let est = estimate_pc(&plane, Mode::Site, 120, 12, 7, 1_000_000).unwrap();
        assert!(est.bracket.1 - est.bracket.0 < 0.01);
        assert!(est.ci_lo <= est.p_c_hat + 0.05);
        assert!(est.ci_hi + 0.05 >= est.p_c_hat);
    }

    #[test]
    fn block_event_is_monotone_under_the_shared_coupling() {
        // Shared uniforms couple the u-level configuration below the
        // p-level one sitewise; on these sampled windows the block-event
        // indicator never decreases along the coupling.
        let region = plane_region(40);
        let (u_level, p_level, n) = (0.70, 0.85, 4u32);
        for seed in 0..1000u64 {
            let lo = sample(region.clone(), Mode::Site, u_level, seed);
            let hi = sample(region.clone(), Mode::Site, p_level, seed);
            for (a, b) in lo.open.iter().zip(hi.open.iter()) {
                if *a {
                    assert!(*b);
                }
            }
            if event_en(&lo, 0, n).unwrap() {
                assert!(event_en(&hi, 0, n).unwrap(), "seed {seed}");
            }
        }
    }

    #[test]
    fn estimates_are_identical_across_thread_counts() {
        let oracle = make_oracle(&GroupSpec::free_abelian_std(2)).unwrap();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                estimate_event_prob(&oracle, Mode::Site, 0.6, 2, 200, 99, 1_000_000)
                    .unwrap()
                    .successes
            })
        };
        assert_eq!(run(1), run(4));
    }
}
