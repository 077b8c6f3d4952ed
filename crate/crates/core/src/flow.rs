//! Dinic maximum flow, generic over the capacity arithmetic so the same
//! solver runs exactly on rationals and approximately on floats.

use num::rational::BigRational;
use num::Zero;

/// Capacity arithmetic for the flow solver.
pub trait FlowNum: Clone + PartialOrd + std::fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    /// Strictly positive, beyond any numeric tolerance.
    fn is_positive(&self) -> bool;
}

impl FlowNum for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn is_positive(&self) -> bool {
        *self > 1e-12
    }
}

impl FlowNum for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn is_positive(&self) -> bool {
        self > &Zero::zero()
    }
}

#[derive(Debug, Clone)]
struct Arc<T> {
    to: u32,
    rev: u32,
    cap: T,
}

/// Dinic max-flow on an explicit residual network.
#[derive(Debug, Clone)]
pub struct Dinic<T> {
    adj: Vec<Vec<Arc<T>>>,
}

impl<T: FlowNum> Dinic<T> {
    pub fn new(n: usize) -> Self {
        Dinic {
            adj: vec![Vec::new(); n],
        }
    }

    pub fn add_edge(&mut self, from: u32, to: u32, cap: T) {
        let rev_from = self.adj[to as usize].len() as u32;
        let rev_to = self.adj[from as usize].len() as u32;
        self.adj[from as usize].push(Arc {
            to,
            rev: rev_from,
            cap,
        });
        self.adj[to as usize].push(Arc {
            to: from,
            rev: rev_to,
            cap: T::zero(),
        });
    }

    fn levels(&self, s: u32, t: u32) -> Option<Vec<i32>> {
        let mut level = vec![-1i32; self.adj.len()];
        let mut queue = std::collections::VecDeque::new();
        level[s as usize] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for arc in &self.adj[u as usize] {
                if arc.cap.is_positive() && level[arc.to as usize] < 0 {
                    level[arc.to as usize] = level[u as usize] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        if level[t as usize] < 0 {
            None
        } else {
            Some(level)
        }
    }

    fn augment(
        &mut self,
        u: u32,
        t: u32,
        pushed: Option<T>,
        level: &[i32],
        it: &mut [usize],
    ) -> Option<T> {
        if u == t {
            return pushed;
        }
        while it[u as usize] < self.adj[u as usize].len() {
            let i = it[u as usize];
            let (to, cap) = {
                let arc = &self.adj[u as usize][i];
                (arc.to, arc.cap.clone())
            };
            if cap.is_positive() && level[to as usize] == level[u as usize] + 1 {
                let next = match &pushed {
                    None => cap.clone(),
                    Some(p) => {
                        if *p < cap {
                            p.clone()
                        } else {
                            cap.clone()
                        }
                    }
                };
                if let Some(got) = self.augment(to, t, Some(next), level, it) {
                    let rev = self.adj[u as usize][i].rev;
                    self.adj[u as usize][i].cap = self.adj[u as usize][i].cap.sub(&got);
                    self.adj[to as usize][rev as usize].cap =
                        self.adj[to as usize][rev as usize].cap.add(&got);
                    return Some(got);
                }
            }
            it[u as usize] += 1;
        }
        None
    }

    /// Computes the maximum flow from s to t, mutating the residual network.
    pub fn max_flow(&mut self, s: u32, t: u32) -> T {
        let mut total = T::zero();
        while let Some(level) = self.levels(s, t) {
            let mut it = vec![0usize; self.adj.len()];
            while let Some(got) = self.augment(s, t, None, &level, &mut it) {
                total = total.add(&got);
            }
        }
        total
    }

    /// Nodes reachable from s in the residual network; the source side of
    /// a minimum cut after `max_flow`.
    pub fn residual_reachable(&self, s: u32) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        let mut queue = std::collections::VecDeque::new();
        seen[s as usize] = true;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for arc in &self.adj[u as usize] {
                if arc.cap.is_positive() && !seen[arc.to as usize] {
                    seen[arc.to as usize] = true;
                    queue.push_back(arc.to);
                }
            }
        }
        seen
    }
}
