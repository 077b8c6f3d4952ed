//! Desk-scale laboratory for percolation on vertex-transitive graphs of
//! polynomial growth.
//!
//! The crate is organised around a small set of subsystems:
//!
//! - [`graph`]: lazily-infinite graph oracles, finite balls, BFS metrics,
//!   and cluster decomposition;
//! - [`cayley`]: Cayley-graph oracles for concrete group families
//!   (free abelian, Heisenberg, cyclic, products), word norms, and the
//!   norm-control pair selection on generating sets of the plane lattice;
//! - [`locality`]: exact rooted-ball isomorphism, the local-convergence
//!   radius of two graphs, and polynomial growth fitting;
//! - [`nets`]: separated/dense vertex nets built by sublattice seeding,
//!   fiber decomposition over a quotient, or quasi-isometric transport,
//!   together with exhaustive verification;
//! - [`percolation`]: reproducible Bernoulli sampling, the finite-size
//!   block event, block renormalization onto a net, independence-radius
//!   certification, and threshold estimation;
//! - [`domination`]: exact laws of small site processes, graph powers,
//!   dependency certificates, and exact stochastic-domination decisions
//!   via transportation feasibility;
//! - [`monotonicity`]: coupled cluster explorations along neighbor-lifting
//!   maps, with exact finite-horizon marginal checks.

#![forbid(unsafe_code)]

pub mod cayley;
pub mod domination;
pub mod error;
pub mod flow;
pub mod graph;
pub mod locality;
pub mod monotonicity;
pub mod nets;
pub mod percolation;
pub mod rng;
pub mod stats;
pub mod unionfind;

pub use error::{Error, Result};
