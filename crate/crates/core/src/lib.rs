//! Belief networks built from statistical relational data.
//!
//! The pipeline runs from a relation and its dependencies to a calibrated
//! clique model:
//!
//! 1. [`dependency`] normalizes the scheme to 4NF and checks lossless join and
//!    dependency preservation on the instance.
//! 2. [`network`] extracts conditional tables, builds the directed network and
//!    its undirected neighborhood graph.
//! 3. [`decompose`] triangulates the neighborhood graph, minimizing total
//!    clique states, and organizes the cliques into a junction tree.
//! 4. [`learn`] produces clique priors and local characteristics (frequency,
//!    Dirichlet, nearest-neighbor completion with minimal-formula tie-breaks).
//! 5. [`inference`] answers queries by Jeffrey updating and propagation over
//!    the junction tree, with a brute-force oracle over the joint relation.

pub mod attr;
pub mod datasets;
pub mod decompose;
pub mod dependency;
pub mod error;
pub mod inference;
pub mod io;
pub mod learn;
pub mod network;
pub mod relation;
pub mod report;
pub mod table;

pub use attr::{attr_set, Attr, AttrSet, AttributeDecl};
pub use error::{Error, Result};
pub use relation::{assignment, Assignment, ProjectMode, Relation};
pub use table::{CliquePotential, Distribution, FrequencyTable};
