//! Streaming anomaly detection for hyperedge streams.
//!
//! Nodes are hashed into `M` supernodes under `K` independent hash functions.
//! Each hash function keeps a constant-size, time-decayed summary of the
//! supernode-level random walk induced by the stream, and every arriving
//! hyperedge is scored for unexpectedness and burstiness against the summary
//! as it stood just before the hyperedge's timestamp.

pub mod datagen;
pub mod detector;
pub mod error;
pub mod eval;
pub mod harness;
pub mod hashing;
pub mod io;
pub mod scoring;
pub mod stream;
pub mod summary;

pub use error::{Error, Result};
