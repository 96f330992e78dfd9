//! Distributed compression of correlated strings with rich-owner graphs.
//!
//! Three senders each hold an `n`-bit string and compress it independently by
//! sending a random neighbor in a bipartite graph plus a short CRT fingerprint.
//! A joint decoder recovers all three strings by enumerating low-complexity
//! candidates under a computable complexity oracle.

pub mod bits;
pub mod construction;
pub mod crt;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod oracle;
pub mod protocol;
pub mod rational;
pub mod scenarios;
pub mod verification;

pub use bits::BitString;
pub use error::{Error, Result};
pub use graph::{GraphParams, LabeledBipartiteGraph};
pub use rational::Rational;
