//! Exact laws of {0,1}-valued site processes on tiny graphs, dependency
//! certificates, graph powers, and exact stochastic-domination decisions
//! via transportation feasibility, with an independent increasing-event
//! route for cross-checking.

use std::collections::HashMap;

use num::rational::BigRational;
use num::{BigInt, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::flow::Dinic;
use crate::graph::FiniteGraph;

/// Exact probability mass.
pub type Mass = BigRational;

pub fn rat(n: i64, d: i64) -> Mass {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Hard cap on vertices for exact laws (2^20 configurations).
pub const LAW_SIZE_GUARD: usize = 20;
/// Cap for domination decisions (4096 configurations per side).
pub const DOMINATION_SIZE_GUARD: usize = 12;
/// Configurations at or below this count use exact rational flow;
/// above it, f64 flow at tolerance 1e-9.
pub const EXACT_CONFIG_LIMIT: usize = 1 << 10;

/// The exact law of a site process: one mass per configuration bitmask.
#[derive(Debug, Clone)]
pub struct SiteLaw {
    graph: FiniteGraph,
    mass: Vec<Mass>,
}

impl SiteLaw {
    pub fn from_masses(graph: FiniteGraph, mass: Vec<Mass>) -> Result<SiteLaw> {
        let n = graph.len();
        if n > LAW_SIZE_GUARD {
            return Err(Error::SizeGuard(n, LAW_SIZE_GUARD));
        }
        if mass.len() != 1 << n {
            return Err(Error::InvalidParameter(format!(
                "law needs {} masses, got {}",
                1 << n,
                mass.len()
            )));
        }
        let mut total = Mass::zero();
        for m in &mass {
            if m.is_negative() {
                return Err(Error::InvalidParameter("negative mass".into()));
            }
            total += m;
        }
        if !total.is_one() {
            return Err(Error::InvalidParameter(format!(
                "masses sum to {total}, not 1"
            )));
        }
        Ok(SiteLaw { graph, mass })
    }

    pub fn graph(&self) -> &FiniteGraph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.len()
    }

    pub fn mass(&self, config: u32) -> &Mass {
        &self.mass[config as usize]
    }

    pub fn masses(&self) -> &[Mass] {
        &self.mass
    }

    /// P(X_v = 1), exactly.
    pub fn marginal(&self, v: u32) -> Mass {
        let mut m = Mass::zero();
        for (c, p) in self.mass.iter().enumerate() {
            if c as u32 & (1 << v) != 0 {
                m += p;
            }
        }
        m
    }

    pub fn min_marginal(&self) -> Mass {
        (0..self.vertex_count() as u32)
            .map(|v| self.marginal(v))
            .min()
            .expect("nonempty law")
    }

    /// Total mass of an event given as a set of configurations.
    pub fn event_mass(&self, configs: &[u32]) -> Mass {
        let mut m = Mass::zero();
        for &c in configs {
            m += &self.mass[c as usize];
        }
        m
    }

    /// The same distribution viewed on a different graph over the same
    /// vertices (e.g. a graph power).
    pub fn reframe(&self, graph: FiniteGraph) -> Result<SiteLaw> {
        if graph.len() != self.vertex_count() {
            return Err(Error::VertexSetMismatch(graph.len(), self.vertex_count()));
        }
        Ok(SiteLaw {
            graph,
            mass: self.mass.clone(),
        })
    }
}

/// Deterministic threshold rules for block-factor processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockRule {
    /// Open iff every source in the radius-r neighborhood is open.
    Min,
    /// Open iff strictly more than half the neighborhood sources are open.
    Majority,
}

/// Generators of site-process laws.
#[derive(Debug, Clone)]
pub enum ProcessSpec {
    /// Independent sites at level p.
    Product(Mass),
    /// All sites equal a single Bernoulli(p) draw.
    FullyCorrelated(Mass),
    /// Anti-correlated checkerboard: all-open with mass 2p-1, else one of
    /// the two BFS-parity patterns, each with mass 1-p. Needs p >= 1/2.
    Antagonistic(Mass),
    /// Each site is a deterministic function of i.i.d. Bernoulli(source)
    /// draws on its radius-r neighborhood; 2r-dependent by construction.
    BlockFactor {
        radius: u32,
        rule: BlockRule,
        source: Mass,
    },
    /// Explicit table of (configuration, mass); unlisted configs get 0.
    Table(Vec<(u32, Mass)>),
}

impl ProcessSpec {
    pub fn label(&self) -> String {
        match self {
            ProcessSpec::Product(p) => format!("product({p})"),
            ProcessSpec::FullyCorrelated(p) => format!("fully-correlated({p})"),
            ProcessSpec::Antagonistic(p) => format!("antagonistic({p})"),
            ProcessSpec::BlockFactor { radius, rule, source } => {
                format!("block-factor(r={radius},{rule:?},{source})")
            }
            ProcessSpec::Table(_) => "table".to_string(),
        }
    }
}

/// Exact law by enumeration / convolution.
pub fn exact_law(spec: &ProcessSpec, graph: &FiniteGraph) -> Result<SiteLaw> {
    let n = graph.len();
    if n > LAW_SIZE_GUARD {
        return Err(Error::SizeGuard(n, LAW_SIZE_GUARD));
    }
    let size = 1usize << n;
    let mut mass = vec![Mass::zero(); size];
    match spec {
        ProcessSpec::Product(p) => {
            check_prob(p)?;
            let q = Mass::one() - p;
            for (c, slot) in mass.iter_mut().enumerate() {
                let mut m = Mass::one();
                for v in 0..n {
                    if c & (1 << v) != 0 {
                        m *= p;
                    } else {
                        m *= &q;
                    }
                }
                *slot = m;
            }
        }
        ProcessSpec::FullyCorrelated(p) => {
            check_prob(p)?;
            mass[size - 1] = p.clone();
            mass[0] = Mass::one() - p;
        }
        ProcessSpec::Antagonistic(p) => {
            check_prob(p)?;
            if p < &rat(1, 2) {
                return Err(Error::InvalidParameter(
                    "antagonistic law needs p >= 1/2".into(),
                ));
            }
            // BFS parity from vertex 0 splits the vertices in two.
            let dist = graph.bfs_distances_from(0);
            let mut even = 0u32;
            for v in 0..n {
                if dist[v] != u32::MAX && dist[v] % 2 == 0 {
                    even |= 1 << v;
                }
            }
            let odd = !even & ((size - 1) as u32);
            let both = (Mass::one() - p) * rat(1, 1);
            mass[size - 1] = p * rat(2, 1) - Mass::one();
            mass[even as usize] += &both;
            mass[odd as usize] += &both;
        }
        ProcessSpec::BlockFactor { radius, rule, source } => {
            check_prob(source)?;
            if n > DOMINATION_SIZE_GUARD {
                return Err(Error::SizeGuard(n, DOMINATION_SIZE_GUARD));
            }
            // Radius-r neighborhoods in graph distance.
            let hoods: Vec<u32> = (0..n as u32)
                .map(|v| {
                    let dist = graph.bfs_distances_capped(v, *radius);
                    let mut h = 0u32;
                    for (w, &d) in dist.iter().enumerate() {
                        if d != u32::MAX {
                            h |= 1 << w;
                        }
                    }
                    h
                })
                .collect();
            let q = Mass::one() - source;
            for src in 0..size as u32 {
                let mut m = Mass::one();
                for v in 0..n {
                    if src & (1 << v) != 0 {
                        m *= source;
                    } else {
                        m *= &q;
                    }
                }
                let mut out = 0u32;
                for v in 0..n {
                    let hood = hoods[v];
                    let total = hood.count_ones();
                    let open = (src & hood).count_ones();
                    let bit = match rule {
                        BlockRule::Min => open == total,
                        BlockRule::Majority => 2 * open > total,
                    };
                    if bit {
                        out |= 1 << v;
                    }
                }
                mass[out as usize] += m;
            }
        }
        ProcessSpec::Table(entries) => {
            for (c, m) in entries {
                if *c as usize >= size {
                    return Err(Error::InvalidParameter(format!(
                        "table config {c} out of range"
                    )));
                }
                mass[*c as usize] += m;
            }
        }
    }
    SiteLaw::from_masses(graph.clone(), mass)
}

fn check_prob(p: &Mass) -> Result<()> {
    if p.is_negative() || p > &Mass::one() {
        return Err(Error::InvalidParameter(format!("probability {p} out of [0,1]")));
    }
    Ok(())
}

/// Independent site percolation at level p on a graph.
pub fn product_law(graph: &FiniteGraph, p: Mass) -> Result<SiteLaw> {
    exact_law(&ProcessSpec::Product(p), graph)
}

/// The k-th graph power: same vertices, adjacency at host distance in
/// [1, k].
pub fn graph_power(h: &FiniteGraph, k: u32) -> FiniteGraph {
    assert!(k >= 1);
    let n = h.len();
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        let dist = h.bfs_distances_capped(u, k);
        for (w, &d) in dist.iter().enumerate() {
            if d >= 1 && d != u32::MAX && (w as u32) > u {
                edges.push((u, w as u32));
            }
        }
    }
    FiniteGraph::from_edges(h.vertices().to_vec(), &edges, h.root())
}

/// Witness that restrictions to vertex sets at graph distance > k are
/// independent, decided exactly.
#[derive(Debug, Clone)]
pub struct DependencyCertificate {
    pub k: u32,
    pub verified: bool,
    /// A violating pair of vertex sets when not verified.
    pub witness: Option<(u32, u32)>,
}

/// Exact k-independence check. It suffices to test each nonempty U
/// against the maximal far set {v : d(v, U) > k}: marginalizing a product
/// law stays a product law, so any violating pair implies a violating
/// maximal pair.
pub fn certify_k_dependent(law: &SiteLaw, k: u32) -> DependencyCertificate {
    let n = law.vertex_count();
    let g = law.graph();
    let dist: Vec<Vec<u32>> = (0..n as u32).map(|v| g.bfs_distances_from(v)).collect();
    for u_set in 1u32..(1 << n) {
        let mut far = 0u32;
        'v: for v in 0..n as u32 {
            if u_set & (1 << v) != 0 {
                continue;
            }
            for u in 0..n as u32 {
                if u_set & (1 << u) != 0 && dist[u as usize][v as usize] <= k {
                    continue 'v;
                }
            }
            far |= 1 << v;
        }
        if far == 0 {
            continue;
        }
        if !factorizes(law, u_set, far) {
            return DependencyCertificate {
                k,
                verified: false,
                witness: Some((u_set, far)),
            };
        }
    }
    DependencyCertificate {
        k,
        verified: true,
        witness: None,
    }
}

/// Does the joint law of (X_{u_set}, X_{far}) factorize exactly?
fn factorizes(law: &SiteLaw, u_set: u32, far: u32) -> bool {
    let n = law.vertex_count();
    let mut joint: HashMap<(u32, u32), Mass> = HashMap::new();
    let mut m1: HashMap<u32, Mass> = HashMap::new();
    let mut m2: HashMap<u32, Mass> = HashMap::new();
    for c in 0..(1u32 << n) {
        let p = law.mass(c);
        if p.is_zero() {
            continue;
        }
        let x1 = c & u_set;
        let x2 = c & far;
        *joint.entry((x1, x2)).or_insert_with(Mass::zero) += p;
        *m1.entry(x1).or_insert_with(Mass::zero) += p;
        *m2.entry(x2).or_insert_with(Mass::zero) += p;
    }
    for (x1, p1) in &m1 {
        for (x2, p2) in &m2 {
            let j = joint
                .get(&(*x1, *x2))
                .cloned()
                .unwrap_or_else(Mass::zero);
            if j != p1 * p2 {
                return false;
            }
        }
    }
    true
}

/// Exact Strassen decision: does law1 stochastically dominate law2?
/// Decided as transportation feasibility: unit flow from the mass of law2
/// to the mass of law1 along pairs (lower, upper) with lower <= upper
/// coordinatewise. Exact rational flow up to 2^10 configurations, f64
/// flow at tolerance 1e-9 beyond.
pub fn dominates_exact(law1: &SiteLaw, law2: &SiteLaw) -> Result<bool> {
    let n = law1.vertex_count();
    if law2.vertex_count() != n {
        return Err(Error::VertexSetMismatch(n, law2.vertex_count()));
    }
    if n > DOMINATION_SIZE_GUARD {
        return Err(Error::SizeGuard(n, DOMINATION_SIZE_GUARD));
    }
    let size = 1usize << n;
    let full = (size - 1) as u32;

    let supp2: Vec<u32> = (0..size as u32).filter(|&c| !law2.mass(c).is_zero()).collect();
    let supp1: Vec<u32> = (0..size as u32).filter(|&c| !law1.mass(c).is_zero()).collect();
    let idx1: HashMap<u32, u32> = supp1.iter().enumerate().map(|(i, &c)| (c, i as u32)).collect();

    // Nodes: 0 = source, 1 = sink, 2.. lower configs, then upper configs.
    let lower_node = |i: u32| 2 + i;
    let upper_node = |i: u32| 2 + supp2.len() as u32 + i;

    if size <= EXACT_CONFIG_LIMIT {
        let mut net = Dinic::<Mass>::new(2 + supp2.len() + supp1.len());
        for (i, &y) in supp2.iter().enumerate() {
            net.add_edge(0, lower_node(i as u32), law2.mass(y).clone());
            // enumerate supersets of y
            let mut x = y;
            loop {
                if let Some(&j) = idx1.get(&x) {
                    net.add_edge(lower_node(i as u32), upper_node(j), law2.mass(y).clone());
                }
                if x == full {
                    break;
                }
                x = (x + 1) | y;
            }
        }
        for (j, &x) in supp1.iter().enumerate() {
            net.add_edge(upper_node(j as u32), 1, law1.mass(x).clone());
        }
        let flow = net.max_flow(0, 1);
        Ok(flow == Mass::one())
    } else {
        let mut net = Dinic::<f64>::new(2 + supp2.len() + supp1.len());
        for (i, &y) in supp2.iter().enumerate() {
            let m2 = law2.mass(y).to_f64().unwrap();
            net.add_edge(0, lower_node(i as u32), m2);
            let mut x = y;
            loop {
                if let Some(&j) = idx1.get(&x) {
                    net.add_edge(lower_node(i as u32), upper_node(j), m2);
                }
                if x == full {
                    break;
                }
                x = (x + 1) | y;
            }
        }
        for (j, &x) in supp1.iter().enumerate() {
            net.add_edge(upper_node(j as u32), 1, law1.mass(x).to_f64().unwrap());
        }
        let flow = net.max_flow(0, 1);
        Ok((flow - 1.0).abs() <= 1e-9)
    }
}

/// The minimum of law1(A) - law2(A) over increasing events A, with a
/// minimizing up-set. Exact: solved as a maximum-weight closure problem
/// on the hypercube's covering relation via rational min-cut.
///
/// Domination holds iff the returned gap is zero (the empty event always
/// achieves zero).
pub fn min_increasing_gap(law1: &SiteLaw, law2: &SiteLaw) -> Result<(Mass, Vec<u32>)> {
    let n = law1.vertex_count();
    if law2.vertex_count() != n {
        return Err(Error::VertexSetMismatch(n, law2.vertex_count()));
    }
    if n > DOMINATION_SIZE_GUARD {
        return Err(Error::SizeGuard(n, DOMINATION_SIZE_GUARD));
    }
    let size = 1usize << n;

    // Weight of config c in the objective; we maximize sum of -w over an
    // up-closed selection.
    let w: Vec<Mass> = (0..size as u32)
        .map(|c| law1.mass(c) - law2.mass(c))
        .collect();

    // Project-selection network. Node c+2; membership requires every
    // one-bit superset (covering arcs with effectively infinite capacity).
    let mut net = Dinic::<Mass>::new(size + 2);
    let infinite = rat(4, 1);
    let mut positive_total = Mass::zero();
    for c in 0..size as u32 {
        let g = -w[c as usize].clone(); // profit of selecting c
        if g.is_positive() {
            net.add_edge(0, c + 2, g.clone());
            positive_total += g;
        } else if (-&g).is_positive() {
            net.add_edge(c + 2, 1, -g);
        }
        for v in 0..n {
            if c & (1 << v) == 0 {
                net.add_edge(c + 2, (c | (1 << v)) + 2, infinite.clone());
            }
        }
    }
    let cut = net.max_flow(0, 1);
    let best_profit = positive_total - cut;
    let gap = -best_profit;

    // The optimal closed selection is the source side of the min cut.
    let side = net.residual_reachable(0);
    let chosen: Vec<u32> = (0..size as u32).filter(|&c| side[(c + 2) as usize]).collect();

    // Sanity: recompute the gap directly from the masses.
    let direct = law1.event_mass(&chosen) - law2.event_mass(&chosen);
    debug_assert_eq!(direct, gap);
    Ok((gap, chosen))
}

/// Brute-force minimum of law1(A) - law2(A) over ALL up-sets by literal
/// enumeration (feasible through 6 vertices; the up-set count is the
/// Dedekind number). Weights are scaled to a common denominator so the
/// search runs in integers.
pub fn min_increasing_gap_bruteforce(law1: &SiteLaw, law2: &SiteLaw) -> Result<Mass> {
    let n = law1.vertex_count();
    if law2.vertex_count() != n {
        return Err(Error::VertexSetMismatch(n, law2.vertex_count()));
    }
    if n > 6 {
        return Err(Error::SizeGuard(n, 6));
    }
    let size = 1usize << n;
    let w: Vec<Mass> = (0..size as u32)
        .map(|c| law1.mass(c) - law2.mass(c))
        .collect();
    // Common denominator.
    let mut denom = BigInt::one();
    for x in &w {
        denom = num::integer::lcm(denom, x.denom().clone());
    }
    let scaled: Vec<i128> = w
        .iter()
        .map(|x| {
            let v = x.numer() * (&denom / x.denom());
            v.to_i128().expect("scaled weight fits in i128")
        })
        .collect();

    // Configs in descending popcount order: a config may join the up-set
    // only if all its immediate supersets joined.
    let mut order: Vec<u32> = (0..size as u32).collect();
    order.sort_by_key(|c| std::cmp::Reverse(c.count_ones()));
    let full = (size - 1) as u32;

    struct Search<'a> {
        order: &'a [u32],
        scaled: &'a [i128],
        full: u32,
        n: usize,
        in_set: Vec<bool>,
        best: i128,
    }
    impl Search<'_> {
        fn run(&mut self, depth: usize, acc: i128) {
            if depth == self.order.len() {
                if acc < self.best {
                    self.best = acc;
                }
                return;
            }
            let c = self.order[depth];
            // Exclude c.
            self.run(depth + 1, acc);
            // Include c if up-closure permits.
            let mut ok = true;
            for v in 0..self.n {
                if c & (1 << v) == 0 && !self.in_set[(c | (1 << v)) as usize] {
                    ok = false;
                    break;
                }
            }
            if c == self.full {
                ok = true;
            }
            if ok {
                self.in_set[c as usize] = true;
                self.run(depth + 1, acc + self.scaled[c as usize]);
                self.in_set[c as usize] = false;
            }
        }
    }
    let mut search = Search {
        order: &order,
        scaled: &scaled,
        full,
        n,
        in_set: vec![false; size],
        best: 0,
    };
    search.run(0, 0);
    Ok(Mass::new(BigInt::from(search.best), denom))
}

/// Anchor level the adversaries must dominate: independent percolation at 3/4.
pub fn three_quarters() -> Mass {
    rat(3, 4)
}

/// Adversary templates for the empirical domination threshold; each is
/// instantiated at a requested marginal level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryKind {
    Product,
    FullyCorrelated,
    Antagonistic,
    BlockFactor { radius: u32, rule: BlockRule },
}

impl AdversaryKind {
    pub fn label(&self) -> String {
        match self {
            AdversaryKind::Product => "product".into(),
            AdversaryKind::FullyCorrelated => "fully-correlated".into(),
            AdversaryKind::Antagonistic => "antagonistic".into(),
            AdversaryKind::BlockFactor { radius, rule } => {
                format!("block-factor(r={radius},{rule:?})")
            }
        }
    }

    /// Instantiates the adversary on `graph` with every marginal >= q,
    /// as tightly as the parameter grid allows.
    pub fn instantiate(&self, q: &Mass, graph: &FiniteGraph) -> Result<SiteLaw> {
        match self {
            AdversaryKind::Product => exact_law(&ProcessSpec::Product(q.clone()), graph),
            AdversaryKind::FullyCorrelated => {
                exact_law(&ProcessSpec::FullyCorrelated(q.clone()), graph)
            }
            AdversaryKind::Antagonistic => {
                exact_law(&ProcessSpec::Antagonistic(q.clone()), graph)
            }
            AdversaryKind::BlockFactor { radius, rule } => {
                // Smallest source level on a 1/2^10 grid whose weakest
                // marginal still reaches q. Monotone rules make the
                // resulting law monotone in the source level.
                let grid = 1i64 << 10;
                let mut lo = 0i64;
                let mut hi = grid;
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    let law = exact_law(
                        &ProcessSpec::BlockFactor {
                            radius: *radius,
                            rule: *rule,
                            source: rat(mid, grid),
                        },
                        graph,
                    )?;
                    if &law.min_marginal() >= q {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                if lo > grid {
                    return Err(Error::InvalidParameter(
                        "no source level reaches the requested marginal".into(),
                    ));
                }
                exact_law(
                    &ProcessSpec::BlockFactor {
                        radius: *radius,
                        rule: *rule,
                        source: rat(lo, grid),
                    },
                    graph,
                )
            }
        }
    }
}

/// Smallest marginal level q (resolution 1/128) such that every adversary
/// instantiated at marginal >= q on every listed graph stochastically
/// dominates independent percolation at 3/4. Each instance must certify
/// k-dependence, and the graph-power reduction (k-dependent on H implies
/// 1-dependent on H^(k)) is checked exactly along the way.
///
/// Returns 1 when no level below 1 certifies at this resolution.
pub fn estimate_q_threshold(
    k: u32,
    max_degree: usize,
    family: &[AdversaryKind],
    graphs: &[FiniteGraph],
) -> Result<Mass> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    for g in graphs {
        let deg = (0..g.len() as u32).map(|v| g.degree(v)).max().unwrap_or(0);
        if deg > max_degree {
            return Err(Error::InvalidParameter(format!(
                "graph has degree {deg} > D = {max_degree}"
            )));
        }
    }
    for q_idx in 96i64..=128 {
        let q = rat(q_idx, 128);
        let mut all_ok = true;
        for kind in family {
            for g in graphs {
                let law = kind.instantiate(&q, g)?;
                let cert = certify_k_dependent(&law, k);
                if !cert.verified {
                    return Err(Error::CertificationFailure(format!(
                        "{} on {} vertices is not {k}-dependent (witness {:?})",
                        kind.label(),
                        g.len(),
                        cert.witness
                    )));
                }
                // Reduction soundness: 1-dependence on the k-th power.
                if k >= 1 {
                    let power = graph_power(g, k);
                    let on_power = law.reframe(power)?;
                    let cert1 = certify_k_dependent(&on_power, 1);
                    if !cert1.verified {
                        return Err(Error::CertificationFailure(format!(
                            "{} fails 1-dependence on the {k}-th power",
                            kind.label()
                        )));
                    }
                }
                let target = product_law(g, three_quarters())?;
                if !dominates_exact(&law, &target)? {
                    all_ok = false;
                    break;
                }
            }
            if !all_ok {
                break;
            }
        }
        if all_ok {
            return Ok(q);
        }
    }
    Ok(Mass::one())
}

/// Law fixture: `law n <N>` header then `M <bitmask> <num> <den>` lines.
pub fn write_law(law: &SiteLaw) -> String {
    let mut out = format!("law n {}\n", law.vertex_count());
    for (c, m) in law.masses().iter().enumerate() {
        if !m.is_zero() {
            out.push_str(&format!("M {} {} {}\n", c, m.numer(), m.denom()));
        }
    }
    out
}

pub fn parse_law(text: &str, graph: FiniteGraph) -> Result<SiteLaw> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty law".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "law" || parts[1] != "n" {
        return Err(Error::Parse(format!("bad law header: {header}")));
    }
    let n: usize = parts[2].parse().map_err(|_| Error::Parse("bad n".into()))?;
    if n != graph.len() {
        return Err(Error::VertexSetMismatch(n, graph.len()));
    }
    let mut mass = vec![Mass::zero(); 1 << n];
    for line in lines {
        if let Some(rest) = line.strip_prefix("M ") {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("bad mass line: {line}")));
            }
            let c: usize = fields[0].parse().map_err(|_| Error::Parse("bad config".into()))?;
            let num: BigInt = fields[1].parse().map_err(|_| Error::Parse("bad numerator".into()))?;
            let den: BigInt = fields[2].parse().map_err(|_| Error::Parse("bad denominator".into()))?;
            mass[c] = Mass::new(num, den);
        }
    }
    SiteLaw::from_masses(graph, mass)
}
