//! Deterministic, seedable simulator for multi-rumor gossip on strongly
//! connected digraphs.
//!
//! Three protocols are provided: classical push forwarding (`for`), random
//! linear network coding (`nca`) and forwarding without repeating (`fwr`),
//! plus two toy two-vertex protocols separating the expected, almost-sure and
//! sure covering problems. Runs are driven either in synchronous rounds or by
//! an asynchronous scheduler that hands each tick to a uniformly chosen vertex.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod engine;
pub mod gfield;
pub mod graph;
pub mod protocols;
pub mod experiments;
pub mod cli;
