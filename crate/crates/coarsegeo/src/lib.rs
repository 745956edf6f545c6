//! Admissible paths and contracting systems on computable relatively
//! hyperbolic groups, with exact checkers for the virtual amalgamation and
//! HNN combination constructions.

pub mod admissible;
pub mod coarse;
pub mod combination;
pub mod error;
pub mod graph;
pub mod group;
pub mod harness;

pub use error::{Error, Result};
pub use graph::{MetricGraph, PathIndex, PathSeq, Rat, VertexSubset};
pub use group::{Element, GroupModel, Letter, PeripheralCoset, SubgroupSpec, Syllable};
