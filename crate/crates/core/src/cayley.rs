//! Cayley-graph oracles for the concrete group families the lab works
//! with, plus word norms, the norm-control generator pair on plane
//! lattices, and plane-lattice quotient homomorphisms.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphOracle, VertexId};

/// Radius within which the standard basis must appear for a generating
/// set to be accepted.
pub const GENERATION_WITNESS_RADIUS: u32 = 32;

/// Group family. Coordinates are concatenated across product factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// Free abelian group of the given rank; coordinate addition.
    FreeAbelian(u32),
    /// Discrete Heisenberg group, encoded as (x, y, z) for the upper
    /// unitriangular matrix with x, z on the top row and y in the middle:
    /// (x,y,z)·(x',y',z') = (x+x', y+y', z+z'+x·y').
    Heisenberg,
    /// Cyclic group of order k; addition mod k, coordinates in [0, k).
    Cyclic(u64),
    /// Direct product; componentwise per factor.
    Product(Vec<Family>),
}

impl Family {
    pub fn arity(&self) -> usize {
        match self {
            Family::FreeAbelian(d) => *d as usize,
            Family::Heisenberg => 3,
            Family::Cyclic(_) => 1,
            Family::Product(fs) => fs.iter().map(|f| f.arity()).sum(),
        }
    }

    pub fn identity(&self) -> Vec<i64> {
        vec![0; self.arity()]
    }

    pub fn normalize(&self, coords: &mut [i64]) {
        match self {
            Family::FreeAbelian(_) | Family::Heisenberg => {}
            Family::Cyclic(k) => {
                coords[0] = coords[0].rem_euclid(*k as i64);
            }
            Family::Product(fs) => {
                let mut off = 0;
                for f in fs {
                    let a = f.arity();
                    f.normalize(&mut coords[off..off + a]);
                    off += a;
                }
            }
        }
    }

    pub fn multiply(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        let mut out = match self {
            Family::FreeAbelian(_) => a.iter().zip(b).map(|(x, y)| x + y).collect(),
            Family::Heisenberg => {
                vec![a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1]]
            }
            Family::Cyclic(_) => vec![a[0] + b[0]],
            Family::Product(fs) => {
                let mut out = Vec::with_capacity(self.arity());
                let mut off = 0;
                for f in fs {
                    let w = f.arity();
                    out.extend(f.multiply(&a[off..off + w], &b[off..off + w]));
                    off += w;
                }
                out
            }
        };
        self.normalize(&mut out);
        out
    }

    pub fn inverse(&self, a: &[i64]) -> Vec<i64> {
        let mut out = match self {
            Family::FreeAbelian(_) => a.iter().map(|x| -x).collect(),
            // (x,y,z)^{-1} = (-x,-y,xy-z): check z + (xy-z) + x·(-y) = 0.
            Family::Heisenberg => vec![-a[0], -a[1], a[0] * a[1] - a[2]],
            Family::Cyclic(_) => vec![-a[0]],
            Family::Product(fs) => {
                let mut out = Vec::with_capacity(self.arity());
                let mut off = 0;
                for f in fs {
                    let w = f.arity();
                    out.extend(f.inverse(&a[off..off + w]));
                    off += w;
                }
                out
            }
        };
        self.normalize(&mut out);
        out
    }

    /// Standard basis elements whose reachability witnesses generation.
    fn basis(&self) -> Vec<Vec<i64>> {
        match self {
            Family::FreeAbelian(d) => (0..*d as usize)
                .map(|i| {
                    let mut e = vec![0; *d as usize];
                    e[i] = 1;
                    e
                })
                .collect(),
            Family::Heisenberg => {
                vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]
            }
            Family::Cyclic(k) => {
                if *k <= 1 {
                    Vec::new()
                } else {
                    vec![vec![1]]
                }
            }
            Family::Product(fs) => {
                let total = self.arity();
                let mut out = Vec::new();
                let mut off = 0;
                for f in fs {
                    let w = f.arity();
                    for e in f.basis() {
                        let mut full = vec![0; total];
                        full[off..off + w].copy_from_slice(&e);
                        out.push(full);
                    }
                    off += w;
                }
                out
            }
        }
    }
}

/// A group family together with a finite symmetric generating set.
///
/// Constructors auto-close the generator list under inversion, normalize
/// coordinates, drop identity elements, and dedupe, preserving declared
/// order (inverses are appended after the declared block).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    family: Family,
    generators: Vec<Vec<i64>>,
    label: String,
}

impl GroupSpec {
    pub fn new(family: Family, declared: Vec<Vec<i64>>, label: impl Into<String>) -> Result<Self> {
        let arity = family.arity();
        let mut generators: Vec<Vec<i64>> = Vec::new();
        let push = |mut g: Vec<i64>, generators: &mut Vec<Vec<i64>>| {
            family.normalize(&mut g);
            if g != family.identity() && !generators.contains(&g) {
                generators.push(g);
            }
        };
        for g in &declared {
            if g.len() != arity {
                return Err(Error::InvalidParameter(format!(
                    "generator {:?} has {} coordinates, family needs {}",
                    g,
                    g.len(),
                    arity
                )));
            }
            push(g.clone(), &mut generators);
        }
        for g in &declared {
            push(family.inverse(g), &mut generators);
        }
        Ok(GroupSpec {
            family,
            generators,
            label: label.into(),
        })
    }

    pub fn free_abelian_std(rank: u32) -> GroupSpec {
        let gens = (0..rank as usize)
            .map(|i| {
                let mut e = vec![0i64; rank as usize];
                e[i] = 1;
                e
            })
            .collect();
        GroupSpec::new(Family::FreeAbelian(rank), gens, format!("Z^{rank}")).unwrap()
    }

    pub fn free_abelian(rank: u32, gens: Vec<Vec<i64>>) -> GroupSpec {
        GroupSpec::new(Family::FreeAbelian(rank), gens, format!("Z^{rank}-custom")).unwrap()
    }

    pub fn heisenberg_std() -> GroupSpec {
        GroupSpec::new(
            Family::Heisenberg,
            vec![vec![1, 0, 0], vec![0, 1, 0]],
            "heisenberg",
        )
        .unwrap()
    }

    pub fn cyclic_std(k: u64) -> GroupSpec {
        GroupSpec::new(Family::Cyclic(k), vec![vec![1]], format!("Z/{k}")).unwrap()
    }

    /// Torus (Z/kZ)^2 with standard generators.
    pub fn torus_std(k: u64) -> GroupSpec {
        GroupSpec::product(
            vec![GroupSpec::cyclic_std(k), GroupSpec::cyclic_std(k)],
            format!("(Z/{k})^2"),
        )
    }

    /// Slab Z^2 x (Z/kZ) with standard generators.
    pub fn slab_std(k: u64) -> GroupSpec {
        GroupSpec::product(
            vec![GroupSpec::free_abelian_std(2), GroupSpec::cyclic_std(k)],
            format!("Z^2x(Z/{k})"),
        )
    }

    /// Direct product: coordinates concatenate, generators embed per factor.
    pub fn product(factors: Vec<GroupSpec>, label: impl Into<String>) -> GroupSpec {
        let family = Family::Product(factors.iter().map(|s| s.family.clone()).collect());
        let total = family.arity();
        let mut gens = Vec::new();
        let mut off = 0;
        for f in &factors {
            let w = f.family.arity();
            for g in &f.generators {
                let mut full = vec![0i64; total];
                full[off..off + w].copy_from_slice(g);
                gens.push(full);
            }
            off += w;
        }
        GroupSpec::new(family, gens, label).unwrap()
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn generators(&self) -> &[Vec<i64>] {
        &self.generators
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn identity(&self) -> VertexId {
        VertexId::new(self.family.identity())
    }

    pub fn multiply(&self, a: &VertexId, b: &[i64]) -> VertexId {
        VertexId::new(self.family.multiply(a.coords(), b))
    }

    /// True when this spec is the free abelian plane (rank 2).
    pub fn is_plane(&self) -> bool {
        matches!(self.family, Family::FreeAbelian(2))
    }
}

/// Cayley-graph oracle: vertices are group elements, neighbors are right
/// multiplications by the generators in declared order.
#[derive(Debug, Clone)]
pub struct CayleyOracle {
    spec: GroupSpec,
}

impl CayleyOracle {
    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }
}

impl GraphOracle for CayleyOracle {
    fn root(&self) -> VertexId {
        self.spec.identity()
    }

    fn neighbors(&self, v: &VertexId) -> Vec<VertexId> {
        self.spec
            .generators
            .iter()
            .map(|s| self.spec.multiply(v, s))
            .collect()
    }

    fn label(&self) -> String {
        self.spec.label.clone()
    }
}

/// Builds the oracle after verifying the generation witness: the standard
/// basis of the family must appear in the ball of radius 32.
pub fn make_oracle(spec: &GroupSpec) -> Result<CayleyOracle> {
    let targets = spec.family.basis();
    if !targets.is_empty() {
        let mut missing: Vec<Vec<i64>> = targets;
        for t in &mut missing {
            spec.family.normalize(t);
        }
        let mut seen: HashMap<Vec<i64>, u32> = HashMap::new();
        let identity = spec.family.identity();
        seen.insert(identity.clone(), 0);
        let mut queue = VecDeque::new();
        queue.push_back(identity);
        while let Some(g) = queue.pop_front() {
            missing.retain(|t| t != &g);
            if missing.is_empty() {
                break;
            }
            let d = seen[&g];
            if d == GENERATION_WITNESS_RADIUS {
                continue;
            }
            for s in &spec.generators {
                let h = spec.family.multiply(&g, s);
                if !seen.contains_key(&h) {
                    seen.insert(h.clone(), d + 1);
                    queue.push_back(h);
                }
            }
        }
        if let Some(t) = missing.first() {
            return Err(Error::GenerationWitness(
                VertexId::new(t.clone()).to_string(),
                GENERATION_WITNESS_RADIUS,
            ));
        }
    }
    Ok(CayleyOracle { spec: spec.clone() })
}

/// BFS distance from the identity to `target` in the Cayley graph, not
/// exploring beyond `radius_cap`.
pub fn word_norm(spec: &GroupSpec, target: &VertexId, radius_cap: u32) -> Result<u32> {
    let map = word_norm_map(spec, radius_cap, Some(target));
    map.get(target.coords()).copied().ok_or_else(|| {
        Error::RadiusCapExceeded(target.to_string(), radius_cap)
    })
}

/// All word norms up to `radius`, optionally stopping early once `stop_at`
/// is found.
pub fn word_norm_map(
    spec: &GroupSpec,
    radius: u32,
    stop_at: Option<&VertexId>,
) -> HashMap<Vec<i64>, u32> {
    let mut dist: HashMap<Vec<i64>, u32> = HashMap::new();
    let identity = spec.family.identity();
    dist.insert(identity.clone(), 0);
    let mut queue = VecDeque::new();
    queue.push_back(identity);
    while let Some(g) = queue.pop_front() {
        if let Some(t) = stop_at {
            if g == t.coords() {
                break;
            }
        }
        let d = dist[&g];
        if d == radius {
            continue;
        }
        for s in &spec.generators {
            let h = spec.family.multiply(&g, s);
            if !dist.contains_key(&h) {
                dist.insert(h.clone(), d + 1);
                queue.push_back(h);
            }
        }
    }
    dist
}

/// The selected control pair of a plane generating set: `u` of maximal
/// Euclidean norm, `v` maximizing the orthogonal projection away from `u`.
/// Ties break to the lexicographically largest coordinate tuple; all
/// comparisons are exact integer arithmetic (squared norms and cross
/// products).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectedPair {
    pub u: [i64; 2],
    pub v: [i64; 2],
}

fn cross(a: [i64; 2], b: [i64; 2]) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

fn norm_sq(a: [i64; 2]) -> i64 {
    a[0] * a[0] + a[1] * a[1]
}

pub fn select_uv(spec: &GroupSpec) -> Result<SelectedPair> {
    if !spec.is_plane() {
        return Err(Error::InvalidParameter(
            "select_uv needs a rank-2 free abelian spec".into(),
        ));
    }
    let gens: Vec<[i64; 2]> = spec
        .generators
        .iter()
        .map(|g| [g[0], g[1]])
        .collect();
    let u = *gens
        .iter()
        .max_by(|a, b| norm_sq(**a).cmp(&norm_sq(**b)).then(a.cmp(b)))
        .expect("nonempty generating set");
    // |proj_{u^perp}(w)| = |cross(u, w)| / |u|; comparing |cross| suffices.
    let v = *gens
        .iter()
        .max_by(|a, b| {
            cross(u, **a)
                .abs()
                .cmp(&cross(u, **b).abs())
                .then(a.cmp(b))
        })
        .expect("nonempty generating set");
    if cross(u, v) == 0 {
        return Err(Error::DegenerateSet(format!("({},{})", u[0], u[1])));
    }
    Ok(SelectedPair { u, v })
}

/// Verifies the norm-control bounds (|m|+|n|)/3 <= ||mu+nv||_S <= |m|+|n|
/// for all |m|,|n| <= window, with norms computed by BFS on the Cayley
/// graph. Returns the first violating (m, n) if any.
pub fn verify_uv_window(
    spec: &GroupSpec,
    pair: &SelectedPair,
    window: u32,
) -> Result<Option<(i64, i64)>> {
    let w = window as i64;
    let map = word_norm_map(spec, 2 * window, None);
    for m in -w..=w {
        for n in -w..=w {
            let target = vec![m * pair.u[0] + n * pair.v[0], m * pair.u[1] + n * pair.v[1]];
            let bound = (m.unsigned_abs() + n.unsigned_abs()) as u32;
            match map.get(&target) {
                Some(&d) if d <= bound && 3 * d >= bound => {}
                _ => return Ok(Some((m, n))),
            }
        }
    }
    Ok(None)
}

/// A surjective homomorphism onto the plane lattice, applied coordinatewise.
#[derive(Debug, Clone)]
pub struct QuotientMap {
    /// Source coordinate positions mapped to the plane coordinates.
    keep: [usize; 2],
    target: GroupSpec,
}

impl QuotientMap {
    pub fn apply(&self, v: &VertexId) -> VertexId {
        VertexId::new(vec![v.coords()[self.keep[0]], v.coords()[self.keep[1]]])
    }

    pub fn target(&self) -> &GroupSpec {
        &self.target
    }

    pub fn kept_coordinates(&self) -> [usize; 2] {
        self.keep
    }
}

/// Finds the plane quotient of a spec: for Heisenberg the (x, y)
/// projection, for free abelian groups the first two coordinates, for
/// products the first factor admitting one (or two rank-one factors).
/// Cyclic-only specs have no plane quotient.
pub fn quotient_map(spec: &GroupSpec) -> Result<QuotientMap> {
    fn find_pair(family: &Family, off: usize) -> Option<[usize; 2]> {
        match family {
            Family::FreeAbelian(d) if *d >= 2 => Some([off, off + 1]),
            Family::Heisenberg => Some([off, off + 1]),
            Family::Product(fs) => {
                let mut o = off;
                for f in fs {
                    if let Some(pair) = find_pair(f, o) {
                        return Some(pair);
                    }
                    o += f.arity();
                }
                // Fall back to two rank-one free abelian coordinates.
                let mut singles = Vec::new();
                let mut o = off;
                for f in fs {
                    if matches!(f, Family::FreeAbelian(1)) {
                        singles.push(o);
                    }
                    o += f.arity();
                }
                if singles.len() >= 2 {
                    Some([singles[0], singles[1]])
                } else {
                    None
                }
            }
            _ => None,
        }
    }
    let keep = find_pair(&spec.family, 0).ok_or(Error::NoQuotient)?;
    let mut projected: Vec<Vec<i64>> = Vec::new();
    for g in &spec.generators {
        let img = vec![g[keep[0]], g[keep[1]]];
        if img != vec![0, 0] && !projected.contains(&img) {
            projected.push(img);
        }
    }
    let target = GroupSpec::new(
        Family::FreeAbelian(2),
        projected,
        format!("{}/quotient", spec.label),
    )?;
    Ok(QuotientMap { keep, target })
}
