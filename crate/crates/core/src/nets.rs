//! Separated, dense vertex nets and the three ways this lab builds them:
//! sublattice seeding on plane Cayley graphs, fiber decomposition over a
//! plane quotient for nilpotent families, and quasi-isometric transport.
//! Nets carry the coarse graph structure (adjacency at host distance
//! <= 4b) that renormalized percolation runs on.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::cayley::{make_oracle, quotient_map, select_uv, GroupSpec};
use crate::error::{Error, Result};
use crate::graph::{ball_capped, FiniteGraph, SharedGraph, VertexId};

/// Maps a sublattice coordinate (k, l) to its net point, witnessing that
/// the net-graph contains a square-lattice subgraph.
#[derive(Debug, Clone)]
pub struct LatticeEmbedding {
    /// (k, l) -> index into `Net::points`.
    pub point_of: HashMap<(i64, i64), u32>,
}

/// An (a, b)-net over a finite host window: points pairwise at host
/// distance >= a, with every interior host vertex within distance <= b of
/// a point. Two distinct points are net-graph adjacent iff their host
/// distance is <= 4b.
#[derive(Debug, Clone)]
pub struct Net {
    host: SharedGraph,
    points: Vec<u32>,
    a: u32,
    b: u32,
    net_adj: Vec<Vec<u32>>,
    lattice_embedding: Option<LatticeEmbedding>,
}

impl Net {
    /// Assembles a net from explicit parts, computing the net-graph
    /// adjacency. Does not verify separation or density; `verify_net`
    /// does that.
    pub fn from_parts(host: SharedGraph, mut points: Vec<u32>, a: u32, b: u32) -> Net {
        points.sort_unstable();
        points.dedup();
        let net_adj = build_net_adjacency(&host, &points, 4 * b);
        Net {
            host,
            points,
            a,
            b,
            net_adj,
            lattice_embedding: None,
        }
    }

    pub fn host(&self) -> &SharedGraph {
        &self.host
    }

    /// Host vertex indices of the net points, ascending.
    pub fn points(&self) -> &[u32] {
        &self.points
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    /// Net-graph neighbor lists, indexed by position in `points`.
    pub fn net_adj(&self) -> &[Vec<u32>] {
        &self.net_adj
    }

    pub fn lattice_embedding(&self) -> Option<&LatticeEmbedding> {
        self.lattice_embedding.as_ref()
    }

    /// Positions (into `points`) of net points at host distance >= `margin`
    /// from the window boundary, i.e. with dist_from_root <= radius - margin.
    pub fn interior_point_positions(&self, margin: u32) -> Vec<u32> {
        let dist = self.host.dist_from_root().expect("rooted host");
        let radius = self.host.radius().expect("rooted host");
        if margin > radius {
            return Vec::new();
        }
        let cutoff = radius - margin;
        (0..self.points.len() as u32)
            .filter(|&pos| dist[self.points[pos as usize] as usize] <= cutoff)
            .collect()
    }

    /// Host vertices at distance >= `margin` from the window boundary.
    pub fn interior_vertices(&self, margin: u32) -> Vec<bool> {
        let dist = self.host.dist_from_root().expect("rooted host");
        let radius = self.host.radius().expect("rooted host");
        dist.iter()
            .map(|&d| margin <= radius && d <= radius - margin)
            .collect()
    }

    /// The interior per the net's own density margin b.
    pub fn interior(&self) -> Vec<bool> {
        self.interior_vertices(self.b)
    }

    /// Net-graph BFS distances from the point at `pos`.
    pub fn net_distances_from(&self, pos: u32) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.points.len()];
        let mut queue = std::collections::VecDeque::new();
        dist[pos as usize] = 0;
        queue.push_back(pos);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &w in &self.net_adj[u as usize] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// Truncated-BFS construction of net-graph adjacency at the given host
/// distance threshold. Per-thread scratch arrays keep the scan cheap on
/// large windows.
fn build_net_adjacency(host: &FiniteGraph, points: &[u32], threshold: u32) -> Vec<Vec<u32>> {
    let mut pos_of = vec![u32::MAX; host.len()];
    for (pos, &v) in points.iter().enumerate() {
        pos_of[v as usize] = pos as u32;
    }
    points
        .par_iter()
        .map_init(
            || (vec![u32::MAX; host.len()], Vec::<u32>::new()),
            |(dist, touched), &p| {
                let mut found = Vec::new();
                let mut queue = std::collections::VecDeque::new();
                dist[p as usize] = 0;
                touched.push(p);
                queue.push_back(p);
                while let Some(u) = queue.pop_front() {
                    let du = dist[u as usize];
                    if du == threshold {
                        continue;
                    }
                    for &w in host.neighbors(u) {
                        if dist[w as usize] == u32::MAX {
                            dist[w as usize] = du + 1;
                            touched.push(w);
                            queue.push_back(w);
                        }
                    }
                }
                for &w in touched.iter() {
                    if w != p && pos_of[w as usize] != u32::MAX {
                        found.push(pos_of[w as usize]);
                    }
                    dist[w as usize] = u32::MAX;
                }
                touched.clear();
                found.sort_unstable();
                found
            },
        )
        .collect()
}

/// BFS from `start` out to `max_depth`, returning touched (vertex, depth)
/// pairs in discovery order.
fn bounded_bfs(host: &FiniteGraph, start: u32, max_depth: u32) -> Vec<(u32, u32)> {
    let mut dist: HashMap<u32, u32> = HashMap::new();
    let mut queue = std::collections::VecDeque::new();
    dist.insert(start, 0);
    queue.push_back(start);
    let mut out = vec![(start, 0)];
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        if du == max_depth {
            continue;
        }
        for &w in host.neighbors(u) {
            if !dist.contains_key(&w) {
                dist.insert(w, du + 1);
                out.push((w, du + 1));
                queue.push_back(w);
            }
        }
    }
    out
}

/// Greedy maximal extension of an a-separated seed set, scanning the
/// host's deterministic vertex order. The result is a-separated, contains
/// the seed, and is maximal under inclusion within the window.
pub fn extend_maximal_separated(host: &FiniteGraph, seed: &[u32], a: u32) -> Result<Vec<u32>> {
    let n = host.len();
    // mindist[v] < a marks vertices blocked by a selected point.
    let mut mindist = vec![u32::MAX; n];
    let mut selected: Vec<u32> = Vec::new();

    let absorb = |p: u32, mindist: &mut Vec<u32>| {
        if a > 0 {
            for (v, d) in bounded_bfs(host, p, a.saturating_sub(1)) {
                if d < mindist[v as usize] {
                    mindist[v as usize] = d;
                }
            }
        }
    };

    let mut seed_sorted = seed.to_vec();
    seed_sorted.sort_unstable();
    seed_sorted.dedup();
    for &s in &seed_sorted {
        if mindist[s as usize] != u32::MAX {
            let offender = selected
                .iter()
                .copied()
                .find(|&q| {
                    bounded_bfs(host, q, a.saturating_sub(1))
                        .iter()
                        .any(|&(v, _)| v == s)
                })
                .unwrap_or(s);
            return Err(Error::SeedNotSeparated(
                a,
                host.vertex(offender).to_string(),
                host.vertex(s).to_string(),
            ));
        }
        selected.push(s);
        absorb(s, &mut mindist);
    }

    for v in 0..n as u32 {
        if mindist[v as usize] == u32::MAX {
            selected.push(v);
            absorb(v, &mut mindist);
        }
    }
    selected.sort_unstable();
    Ok(selected)
}

/// Builds the plane-lattice net: seeds with the sublattice generated by
/// m*u and m*v for m = 3a and the selected control pair (u, v), extends to
/// a maximal a-separated set, and records the square-lattice embedding.
/// The result is an (a, a)-net of the window.
pub fn z2_lattice_net(spec: &GroupSpec, a: u32, window: SharedGraph) -> Result<Net> {
    if a < 1 {
        return Err(Error::InvalidParameter("net separation a must be >= 1".into()));
    }
    let pair = select_uv(spec)?;
    let m = 3 * a as i64;
    let mu = [m * pair.u[0], m * pair.u[1]];
    let mv = [m * pair.v[0], m * pair.v[1]];
    let det = (mu[0] as i128) * (mv[1] as i128) - (mu[1] as i128) * (mv[0] as i128);
    debug_assert_ne!(det, 0);

    let mut seed: Vec<u32> = Vec::new();
    let mut coords_of: HashMap<u32, (i64, i64)> = HashMap::new();
    for (i, v) in window.vertices().iter().enumerate() {
        let w = [v.coords()[0], v.coords()[1]];
        let num_k = (w[0] as i128) * (mv[1] as i128) - (w[1] as i128) * (mv[0] as i128);
        let num_l = (mu[0] as i128) * (w[1] as i128) - (mu[1] as i128) * (w[0] as i128);
        if num_k % det == 0 && num_l % det == 0 {
            let k = (num_k / det) as i64;
            let l = (num_l / det) as i64;
            debug_assert_eq!(k * mu[0] + l * mv[0], w[0]);
            debug_assert_eq!(k * mu[1] + l * mv[1], w[1]);
            seed.push(i as u32);
            coords_of.insert(i as u32, (k, l));
        }
    }

    let points = extend_maximal_separated(&window, &seed, a)?;
    let pos_of: HashMap<u32, u32> = points
        .iter()
        .enumerate()
        .map(|(pos, &v)| (v, pos as u32))
        .collect();
    let point_of: HashMap<(i64, i64), u32> = coords_of
        .iter()
        .map(|(&v, &kl)| (kl, pos_of[&v]))
        .collect();

    let net_adj = build_net_adjacency(&window, &points, 4 * a);
    Ok(Net {
        host: window,
        points,
        a,
        b: a,
        net_adj,
        lattice_embedding: Some(LatticeEmbedding { point_of }),
    })
}

/// Builds a net on a group with a plane quotient: a plane net upstairs,
/// then a maximal a-separated subset of each fiber (separation in the
/// host metric; paths may exit the fiber). The result is an (a, 2a)-net.
pub fn fiber_net(spec: &GroupSpec, a: u32, window: SharedGraph) -> Result<Net> {
    let q = quotient_map(spec)?;
    let radius = window
        .radius()
        .ok_or_else(|| Error::InvalidParameter("window must be rooted".into()))?;
    let proj_oracle = make_oracle(q.target())?;
    let proj_window = std::sync::Arc::new(ball_capped(
        &proj_oracle,
        &crate::graph::GraphOracle::root(&proj_oracle),
        radius,
        crate::graph::DEFAULT_BALL_CAP,
    )?);
    let v1 = z2_lattice_net(q.target(), a, proj_window.clone())?;

    // Group window vertices by their image, keeping only fibers over V1.
    let v1_ids: HashMap<VertexId, u32> = v1
        .points()
        .iter()
        .enumerate()
        .map(|(pos, &p)| (proj_window.vertex(p).clone(), pos as u32))
        .collect();
    let mut fibers: Vec<Vec<u32>> = vec![Vec::new(); v1.points().len()];
    for (i, v) in window.vertices().iter().enumerate() {
        let img = q.apply(v);
        if let Some(&pos) = v1_ids.get(&img) {
            fibers[pos as usize].push(i as u32);
        }
    }

    let mut points: Vec<u32> = Vec::new();
    for (pos, fiber) in fibers.iter().enumerate() {
        if fiber.is_empty() {
            let x = proj_window.vertex(v1.points()[pos]).clone();
            return Err(Error::EmptyFiber(x.to_string()));
        }
        // Greedy maximal a-separated subset of this fiber, host metric.
        let mut mindist: HashMap<u32, u32> = HashMap::new();
        for &v in fiber {
            if !mindist.contains_key(&v) {
                points.push(v);
                if a > 0 {
                    for (w, d) in bounded_bfs(&window, v, a.saturating_sub(1)) {
                        let e = mindist.entry(w).or_insert(d);
                        if d < *e {
                            *e = d;
                        }
                    }
                }
            }
        }
    }
    points.sort_unstable();

    let b = 2 * a;
    let net_adj = build_net_adjacency(&window, &points, 4 * b);
    Ok(Net {
        host: window,
        points,
        a,
        b,
        net_adj,
        lattice_embedding: None,
    })
}

/// The transported net together with the injective net-graph map
/// (positions in the source net's points to positions in the transported
/// net's points).
#[derive(Debug, Clone)]
pub struct TransportedNet {
    pub net: Net,
    pub point_map: Vec<u32>,
}

/// Transports a net through an A-quasi-isometry onto a target window.
/// Witnesses the QI inequality on all window pairs and the A-density of
/// the image first, erroring on any violation. An input (a', b')-net
/// yields parameters ((a' - A^2)/A, A b' + A).
pub fn transport_net(
    net: &Net,
    phi: &dyn Fn(&VertexId) -> VertexId,
    a_qi: u32,
    g_window: SharedGraph,
) -> Result<TransportedNet> {
    let a_qi_i = a_qi as i64;
    let h = net.host();
    let n_h = h.len();

    // Map every H-window vertex and locate images in the G-window.
    let mut image_idx: Vec<u32> = Vec::with_capacity(n_h);
    for v in h.vertices() {
        let img = phi(v);
        let gi = g_window
            .index_of(&img)
            .ok_or_else(|| Error::UnknownVertex(img.to_string()))?;
        image_idx.push(gi);
    }

    // QI witness on all pairs of the H-window: d_G <= A(d_H + A) and
    // d_H <= A d_G + A, with window metrics on both sides.
    let violations: Vec<(u32, u32, String)> = (0..n_h as u32)
        .into_par_iter()
        .filter_map(|x| {
            let dh = h.bfs_distances_from(x);
            let dg = g_window.bfs_distances_from(image_idx[x as usize]);
            for y in (x + 1)..n_h as u32 {
                let dh_xy = dh[y as usize] as i64;
                let dg_xy = dg[image_idx[y as usize] as usize] as i64;
                if dh_xy > a_qi_i * dg_xy + a_qi_i {
                    return Some((
                        x,
                        y,
                        format!("d_H = {dh_xy} > A d_G + A = {}", a_qi_i * dg_xy + a_qi_i),
                    ));
                }
                if dg_xy > a_qi_i * (dh_xy + a_qi_i) {
                    return Some((
                        x,
                        y,
                        format!("d_G = {dg_xy} > A(d_H + A) = {}", a_qi_i * (dh_xy + a_qi_i)),
                    ));
                }
            }
            None
        })
        .collect();
    if let Some((x, y, msg)) = violations.first() {
        return Err(Error::QiWitnessFailure(
            h.vertex(*x).to_string(),
            h.vertex(*y).to_string(),
            msg.clone(),
        ));
    }

    // A-density of the whole image on the G-window interior.
    let g_dist_root = g_window
        .dist_from_root()
        .ok_or_else(|| Error::InvalidParameter("target window must be rooted".into()))?;
    let g_radius = g_window.radius().unwrap();
    let mut dist_to_image = vec![u32::MAX; g_window.len()];
    let mut queue = std::collections::VecDeque::new();
    for &gi in &image_idx {
        if dist_to_image[gi as usize] == u32::MAX {
            dist_to_image[gi as usize] = 0;
            queue.push_back(gi);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist_to_image[u as usize];
        for &w in g_window.neighbors(u) {
            if dist_to_image[w as usize] == u32::MAX {
                dist_to_image[w as usize] = du + 1;
                queue.push_back(w);
            }
        }
    }
    for v in 0..g_window.len() {
        if a_qi <= g_radius && g_dist_root[v] <= g_radius - a_qi && dist_to_image[v] > a_qi {
            return Err(Error::QiWitnessFailure(
                g_window.vertex(v as u32).to_string(),
                "-".into(),
                format!(
                    "image is not {a_qi}-dense: nearest image at {}",
                    dist_to_image[v]
                ),
            ));
        }
    }

    let s_in = net.a() as i64;
    let a_out = (s_in - a_qi_i * a_qi_i) / a_qi_i;
    if a_out < 1 {
        return Err(Error::InvalidParameter(format!(
            "input separation {s_in} too small for QI constant {a_qi}"
        )));
    }
    let a_out = a_out as u32;
    let b_out = a_qi * net.b() + a_qi;

    let images: Vec<u32> = net.points().iter().map(|&p| image_idx[p as usize]).collect();
    let mut sorted = images.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != images.len() {
        return Err(Error::InvalidParameter(
            "transport collapsed two net points onto one target vertex".into(),
        ));
    }

    let net_adj = build_net_adjacency(&g_window, &sorted, 4 * b_out);
    let pos_of: HashMap<u32, u32> = sorted
        .iter()
        .enumerate()
        .map(|(pos, &v)| (v, pos as u32))
        .collect();
    let point_map: Vec<u32> = images.iter().map(|gi| pos_of[gi]).collect();

    Ok(TransportedNet {
        net: Net {
            host: g_window,
            points: sorted,
            a: a_out,
            b: b_out,
            net_adj,
            lattice_embedding: None,
        },
        point_map,
    })
}

/// A witnessed pair violating a distance bound: (pos_u, pos_v, d_net, d_host).
pub type BoundViolation = (u32, u32, u32, u32);

/// Exhaustive verification report for a net.
#[derive(Debug, Clone)]
pub struct NetReport {
    pub separated: bool,
    pub separation_witness: Option<(u32, u32)>,
    pub dense_on_interior: bool,
    pub density_witness: Option<u32>,
    pub max_degree: usize,
    /// Violations of the guarded bound d_net <= max(1, d_host / b) over
    /// interior point pairs. Empty for a sound net.
    pub distance_bound_violations: Vec<BoundViolation>,
    /// Pairs violating the unguarded form d_net <= d_host / b, reported
    /// separately (that form is unsatisfiable whenever 0 < d_host < b).
    pub unguarded_violation_count: usize,
    pub unguarded_witnesses: Vec<BoundViolation>,
}

impl NetReport {
    pub fn sound(&self) -> bool {
        self.separated && self.dense_on_interior && self.distance_bound_violations.is_empty()
    }
}

/// Exhaustively checks separation, interior density, net-graph max degree,
/// and the net-distance bound on interior point pairs.
pub fn verify_net(net: &Net) -> NetReport {
    let host = net.host();
    let a = net.a();
    let b = net.b();

    let point_set: HashMap<u32, u32> = net
        .points()
        .iter()
        .enumerate()
        .map(|(pos, &v)| (v, pos as u32))
        .collect();
    let mut separated = true;
    let mut separation_witness = None;
    'outer: for (pos, &p) in net.points().iter().enumerate() {
        if a > 1 {
            for (v, d) in bounded_bfs(host, p, a - 1) {
                if d > 0 {
                    if let Some(&other) = point_set.get(&v) {
                        separated = false;
                        separation_witness = Some((pos as u32, other));
                        break 'outer;
                    }
                }
            }
        }
    }

    // Interior density: multi-source BFS from all points.
    let mut dist_to_net = vec![u32::MAX; host.len()];
    let mut queue = std::collections::VecDeque::new();
    for &p in net.points() {
        dist_to_net[p as usize] = 0;
        queue.push_back(p);
    }
    while let Some(u) = queue.pop_front() {
        let du = dist_to_net[u as usize];
        for &w in host.neighbors(u) {
            if dist_to_net[w as usize] == u32::MAX {
                dist_to_net[w as usize] = du + 1;
                queue.push_back(w);
            }
        }
    }
    let interior = net.interior();
    let mut dense_on_interior = true;
    let mut density_witness = None;
    for v in 0..host.len() {
        if interior[v] && dist_to_net[v] > b {
            dense_on_interior = false;
            density_witness = Some(v as u32);
            break;
        }
    }

    let max_degree = net.net_adj().iter().map(|l| l.len()).max().unwrap_or(0);

    // Net-distance bound over interior point pairs.
    let interior_pos = net.interior_point_positions(b);
    let interior_flag: Vec<bool> = {
        let mut f = vec![false; net.points().len()];
        for &pos in &interior_pos {
            f[pos as usize] = true;
        }
        f
    };
    let results: Vec<(Vec<BoundViolation>, Vec<BoundViolation>, usize)> = interior_pos
        .par_iter()
        .map(|&pos| {
            let d_net = net.net_distances_from(pos);
            let d_host = host.bfs_distances_from(net.points()[pos as usize]);
            let mut guarded = Vec::new();
            let mut unguarded = Vec::new();
            let mut unguarded_count = 0usize;
            for other in (pos + 1)..net.points().len() as u32 {
                if !interior_flag[other as usize] {
                    continue;
                }
                let dn = d_net[other as usize];
                let dh = d_host[net.points()[other as usize] as usize];
                if dn == u32::MAX || dh == u32::MAX {
                    guarded.push((pos, other, dn, dh));
                    continue;
                }
                if (dn as u64) * b as u64 > dh as u64 {
                    unguarded_count += 1;
                    if unguarded.len() < 8 {
                        unguarded.push((pos, other, dn, dh));
                    }
                    if dn > 1 {
                        guarded.push((pos, other, dn, dh));
                    }
                }
            }
            (guarded, unguarded, unguarded_count)
        })
        .collect();

    let mut distance_bound_violations = Vec::new();
    let mut unguarded_witnesses = Vec::new();
    let mut unguarded_violation_count = 0;
    for (g, u, c) in results {
        distance_bound_violations.extend(g);
        unguarded_violation_count += c;
        if unguarded_witnesses.len() < 100 {
            unguarded_witnesses.extend(u);
            unguarded_witnesses.truncate(100);
        }
    }

    NetReport {
        separated,
        separation_witness,
        dense_on_interior,
        density_witness,
        max_degree,
        distance_bound_violations,
        unguarded_violation_count,
        unguarded_witnesses,
    }
}

/// Checks that the recorded sublattice injection embeds the square lattice
/// into the net-graph: lattice-adjacent recorded points are net-graph
/// adjacent, and the injection is injective.
pub fn verify_lattice_embedding(net: &Net) -> bool {
    let emb = match net.lattice_embedding() {
        Some(e) => e,
        None => return false,
    };
    let mut seen = std::collections::HashSet::new();
    for &pos in emb.point_of.values() {
        if !seen.insert(pos) {
            return false;
        }
    }
    for (&(k, l), &pos) in &emb.point_of {
        for (dk, dl) in [(1i64, 0i64), (0, 1)] {
            if let Some(&other) = emb.point_of.get(&(k + dk, l + dl)) {
                if net.net_adj()[pos as usize].binary_search(&other).is_err() {
                    return false;
                }
            }
        }
    }
    true
}

/// Net fixture: `net a <a> b <b> points <M>` header, the host edge-list
/// block, then `P <host-index>` lines in point order.
pub fn write_net_fixture(net: &Net) -> String {
    let mut out = format!(
        "net a {} b {} points {}\n",
        net.a(),
        net.b(),
        net.points().len()
    );
    out.push_str(&crate::graph::write_edge_list(net.host()));
    for &p in net.points() {
        out.push_str(&format!("P {p}\n"));
    }
    out
}

pub fn parse_net_fixture(text: &str) -> Result<Net> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty net fixture".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 7
        || parts[0] != "net"
        || parts[1] != "a"
        || parts[3] != "b"
        || parts[5] != "points"
    {
        return Err(Error::Parse(format!("bad net header: {header}")));
    }
    let a: u32 = parts[2].parse().map_err(|_| Error::Parse("bad a".into()))?;
    let b: u32 = parts[4].parse().map_err(|_| Error::Parse("bad b".into()))?;
    let rest: Vec<&str> = lines.collect();
    let split = rest
        .iter()
        .position(|l| l.starts_with("P "))
        .unwrap_or(rest.len());
    let host = crate::graph::parse_edge_list(&rest[..split].join("\n"))?;
    let mut points = Vec::new();
    for line in &rest[split..] {
        if let Some(p) = line.strip_prefix("P ") {
            points.push(
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse("bad point".into()))?,
            );
        }
    }
    Ok(Net::from_parts(std::sync::Arc::new(host), points, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::GroupSpec;
    use crate::graph::{ball, GraphOracle};
    use std::sync::Arc;

    fn plane_window(r: u32) -> SharedGraph {
        let oracle = make_oracle(&GroupSpec::free_abelian_std(2)).unwrap();
        Arc::new(ball(&oracle, &oracle.root(), r).unwrap())
    }

    #[test]
    fn one_separated_extension_takes_everything() {
        let w = plane_window(10);
        let points = extend_maximal_separated(&w, &[], 1).unwrap();
        assert_eq!(points.len(), w.len());
    }

    #[test]
    fn greedy_on_a_path_picks_alternating_vertices() {
        let host = Arc::new(crate::graph::path_graph(5));
        let points = extend_maximal_separated(&host, &[], 2).unwrap();
        assert_eq!(points, vec![0, 2, 4]);
    }

    #[test]
    fn separated_seed_is_required() {
        let host = Arc::new(crate::graph::path_graph(5));
        let err = extend_maximal_separated(&host, &[0, 1], 2).unwrap_err();
        assert!(matches!(err, Error::SeedNotSeparated(2, _, _)));
    }

    #[test]
    fn extension_with_lattice_seed_is_separated_and_dense() {
        let w = plane_window(40);
        let seed: Vec<u32> = (0..w.len() as u32)
            .filter(|&i| {
                let c = w.vertex(i).coords();
                c[0].rem_euclid(6) == 0 && c[1].rem_euclid(6) == 0
            })
            .collect();
        let points = extend_maximal_separated(&w, &seed, 2).unwrap();
        let net = Net::from_parts(w, points, 2, 2);
        let report = verify_net(&net);
        assert!(report.separated);
        assert!(report.dense_on_interior);
    }

    #[test]
    fn z2_net_std_a2_seeds_the_6z2_sublattice() {
        let w = plane_window(30);
        let net = z2_lattice_net(&GroupSpec::free_abelian_std(2), 2, w.clone()).unwrap();
        let emb = net.lattice_embedding().unwrap();
        assert!(!emb.point_of.is_empty());
        for (&(k, l), &pos) in &emb.point_of {
            let v = w.vertex(net.points()[pos as usize]);
            assert_eq!(v.coords(), &[6 * k, 6 * l]);
        }
        let report = verify_net(&net);
        assert!(report.separated, "witness {:?}", report.separation_witness);
        assert!(report.dense_on_interior);
        assert!(report.distance_bound_violations.is_empty());
        assert!(verify_lattice_embedding(&net));
    }

    #[test]
    fn z2_net_a1_is_all_inclusive() {
        let w = plane_window(12);
        let net = z2_lattice_net(&GroupSpec::free_abelian_std(2), 1, w.clone()).unwrap();
        assert_eq!(net.points().len(), w.len());
        assert!(verify_lattice_embedding(&net));
    }

    #[test]
    fn z2_net_with_diagonal_generators_verifies() {
        let spec = GroupSpec::free_abelian(2, vec![vec![1, 0], vec![0, 1], vec![1, 1]]);
        let oracle = make_oracle(&spec).unwrap();
        let w = Arc::new(ball(&oracle, &oracle.root(), 30).unwrap());
        let net = z2_lattice_net(&spec, 3, w).unwrap();
        let report = verify_net(&net);
        assert!(report.separated);
        assert!(report.dense_on_interior);
        assert!(report.distance_bound_violations.is_empty());
        assert!(verify_lattice_embedding(&net));
    }

    #[test]
    fn fiber_net_on_plane_matches_lattice_net_with_wider_density() {
        let spec = GroupSpec::free_abelian_std(2);
        let w = plane_window(20);
        let fnet = fiber_net(&spec, 2, w.clone()).unwrap();
        let znet = z2_lattice_net(&spec, 2, w).unwrap();
        assert_eq!(fnet.points(), znet.points());
        assert_eq!(fnet.a(), 2);
        assert_eq!(fnet.b(), 4);
        let report = verify_net(&fnet);
        assert!(report.separated);
        assert!(report.dense_on_interior);
    }

    #[test]
    fn heisenberg_fiber_net_small_window() {
        let spec = GroupSpec::heisenberg_std();
        let oracle = make_oracle(&spec).unwrap();
        let w = Arc::new(ball(&oracle, &oracle.root(), 8).unwrap());
        let net = fiber_net(&spec, 2, w.clone()).unwrap();
        let report = verify_net(&net);
        assert!(report.separated, "witness {:?}", report.separation_witness);
        assert!(
            report.dense_on_interior,
            "witness {:?}",
            report.density_witness
        );
        // projection property: every net point projects into V1
        let q = quotient_map(&spec).unwrap();
        let proj_oracle = make_oracle(q.target()).unwrap();
        let pw = Arc::new(ball(&proj_oracle, &proj_oracle.root(), 8).unwrap());
        let v1 = z2_lattice_net(q.target(), 2, pw.clone()).unwrap();
        let v1_ids: std::collections::HashSet<VertexId> = v1
            .points()
            .iter()
            .map(|&p| pw.vertex(p).clone())
            .collect();
        for &p in net.points() {
            assert!(v1_ids.contains(&q.apply(w.vertex(p))));
        }
    }

    #[test]
    fn fiber_projection_contracts_distances_on_random_pairs() {
        let spec = GroupSpec::heisenberg_std();
        let oracle = make_oracle(&spec).unwrap();
        let w = ball(&oracle, &oracle.root(), 6).unwrap();
        let q = quotient_map(&spec).unwrap();
        let proj_oracle = make_oracle(q.target()).unwrap();
        let pw = ball(&proj_oracle, &proj_oracle.root(), 6).unwrap();
        let stream = crate::rng::CounterStream::new(31337);
        for t in 0..300u64 {
            let x = stream.below(2 * t, w.len() as u64) as u32;
            let y = stream.below(2 * t + 1, w.len() as u64) as u32;
            let dh = w.distance_idx(x, y).unwrap();
            let px = pw.index_of(&q.apply(w.vertex(x))).unwrap();
            let py = pw.index_of(&q.apply(w.vertex(y))).unwrap();
            let dp = pw.distance_idx(px, py).unwrap();
            assert!(dh >= dp, "host {dh} < projected {dp}");
        }
    }

    #[test]
    fn transport_by_identity_shifts_parameters() {
        let spec = GroupSpec::free_abelian_std(2);
        let w = plane_window(20);
        let net = z2_lattice_net(&spec, 4, w.clone()).unwrap();
        let t = transport_net(&net, &|v| v.clone(), 1, w).unwrap();
        assert_eq!(t.net.a(), 3); // (4 - 1)/1
        assert_eq!(t.net.b(), 5); // 1*4 + 1
        assert_eq!(t.net.points(), net.points());
        for (pos, nbrs) in net.net_adj().iter().enumerate() {
            for &o in nbrs {
                let tp = t.point_map[pos];
                let to = t.point_map[o as usize];
                assert!(t.net.net_adj()[tp as usize].contains(&to));
            }
        }
    }

    #[test]
    fn transport_into_slab_is_a_net_graph_homomorphism() {
        let plane = GroupSpec::free_abelian_std(2);
        let plane_oracle = make_oracle(&plane).unwrap();
        let hw = Arc::new(ball(&plane_oracle, &plane_oracle.root(), 24).unwrap());
        let net = z2_lattice_net(&plane, 9, hw.clone()).unwrap();

        // Target window just wide enough that the image of the source
        // window is A-dense on its interior.
        let slab = GroupSpec::slab_std(2);
        let slab_oracle = make_oracle(&slab).unwrap();
        let gw = Arc::new(ball(&slab_oracle, &slab_oracle.root(), 26).unwrap());
        let lift = |v: &VertexId| VertexId::new(vec![v.coords()[0], v.coords()[1], 0]);
        let t = transport_net(&net, &lift, 2, gw).unwrap();
        assert_eq!(t.net.a(), 2); // (9 - 4)/2
        assert_eq!(t.net.b(), 2 * 9 + 2);
        assert_eq!(t.net.points().len(), net.points().len());
        for (pos, nbrs) in net.net_adj().iter().enumerate() {
            for &o in nbrs {
                let tp = t.point_map[pos];
                let to = t.point_map[o as usize];
                assert!(
                    t.net.net_adj()[tp as usize].contains(&to),
                    "adjacency not preserved for pair ({pos}, {o})"
                );
            }
        }
        let report = verify_net(&t.net);
        assert!(report.separated);
        assert!(report.dense_on_interior);
    }

    #[test]
    fn transport_rejects_a_non_qi_map() {
        let spec = GroupSpec::free_abelian_std(2);
        let w = plane_window(8);
        let net = z2_lattice_net(&spec, 4, w.clone()).unwrap();
        let collapse = |_: &VertexId| VertexId::new(vec![0, 0]);
        let err = transport_net(&net, &collapse, 1, w).unwrap_err();
        assert!(matches!(err, Error::QiWitnessFailure(_, _, _)));
    }

    #[test]
    fn singleton_net_in_its_own_ball_is_dense_with_degree_zero() {
        let w = plane_window(3);
        let net = Net::from_parts(w, vec![0], 1, 3);
        let report = verify_net(&net);
        assert!(report.separated);
        assert!(report.dense_on_interior);
        assert_eq!(report.max_degree, 0);
    }

    #[test]
    fn two_points_at_distance_4b_are_net_adjacent_and_satisfy_the_bound() {
        let host = Arc::new(crate::graph::path_graph(5));
        // points 0 and 4 at host distance 4 = 4b with b = 1
        let net = Net::from_parts(host, vec![0, 4], 1, 1);
        assert_eq!(net.net_adj()[0], vec![1]);
        let report = verify_net(&net);
        assert!(report.distance_bound_violations.is_empty());
    }

    #[test]
    fn unguarded_form_fails_below_b_and_is_reported() {
        // Two interior points at host distance 2 with b = 4: d_net = 1 > 2/4.
        let host = Arc::new(crate::graph::path_graph(7));
        let net = Net::from_parts(host, vec![0, 2], 2, 4);
        let report = verify_net(&net);
        assert!(report.distance_bound_violations.is_empty());
        assert_eq!(report.unguarded_violation_count, 1);
        assert_eq!(report.unguarded_witnesses[0], (0, 1, 1, 2));
    }

    #[test]
    fn maximality_witness_no_interior_gap() {
        // Every non-point interior vertex sits within distance < a of a
        // point, else the greedy pass would have added it.
        let w = plane_window(20);
        let net = z2_lattice_net(&GroupSpec::free_abelian_std(2), 3, w.clone()).unwrap();
        let points: std::collections::HashSet<u32> = net.points().iter().copied().collect();
        let interior = net.interior();
        for v in 0..w.len() as u32 {
            if interior[v as usize] && !points.contains(&v) {
                let near = bounded_bfs(&w, v, net.a() - 1)
                    .iter()
                    .any(|&(x, d)| d > 0 && points.contains(&x));
                assert!(near, "vertex {v} is a-far from every point");
            }
        }
    }

    #[test]
    fn net_fixture_round_trip() {
        let w = plane_window(10);
        let net = z2_lattice_net(&GroupSpec::free_abelian_std(2), 2, w).unwrap();
        let text = write_net_fixture(&net);
        let parsed = parse_net_fixture(&text).unwrap();
        assert_eq!(parsed.points(), net.points());
        assert_eq!(parsed.a(), net.a());
        assert_eq!(parsed.b(), net.b());
        assert_eq!(parsed.net_adj(), net.net_adj());
    }
}
