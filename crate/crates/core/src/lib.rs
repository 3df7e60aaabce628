//! Protector selection against rumors spread by browsing, where the chance
//! that protectors neutralize a rumor for a user grows as a logistic
//! function of how many protectors the user's walk passes before it.
//!
//! The pipeline: load a [`graph::Graph`], sample walks into a
//! [`walk::SampleStore`], then pick protectors with one of the
//! [`solvers`]. [`oracle`] holds exact brute-force counterparts for small
//! instances and [`bench`] drives experiment sweeps.

pub mod bench;
pub mod block;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod solvers;
pub mod walk;

pub use block::LogisticParams;
pub use error::{Error, Result};
pub use graph::{Graph, NodeId};
pub use walk::{build_sample_store, SampleConfig, SampleStore};
