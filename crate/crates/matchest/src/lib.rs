//! Query-budgeted matching-size estimation testbed.
//!
//! The library builds bipartite multigraph instances whose maximum matching
//! size is either large (YES) or small (NO) yet hard to tell apart through
//! a limited budget of non-adaptive adjacency-list queries, and provides:
//!
//! * exact and greedy matching oracles used as ground truth ([`graph`]);
//! * the non-adaptive query layer with NULL semantics, query accounting and
//!   a degree-guessing random-neighbor simulator ([`query`]);
//! * seeded generators for the hard yes/no distributions ([`instance`]);
//! * a sublinear matching-size estimator driven purely by oracle access
//!   ([`estimator`]);
//! * three concrete distinguishing procedures as upper-bound witnesses
//!   ([`distinguish`]);
//! * an executor for the non-adaptive tree/forest probe models
//!   ([`tree_probe`]);
//! * structural-event statistics and a multi-trial experiment runner with
//!   CSV output ([`analysis`]).
//!
//! Trials parallelize across cores via rayon (feature `parallel`, on by
//! default) with a byte-identical sequential fallback.

pub mod analysis;
pub mod distinguish;
pub mod estimator;
pub mod graph;
pub mod instance;
pub mod query;
pub mod rng;
pub mod tree_probe;
pub mod trials;

/// Version of the CSV schemas emitted by the CLI and experiment runner.
pub const SCHEMA_VERSION: u32 = 1;
