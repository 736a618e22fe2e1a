//! Partial groups, localities and saturated fusion systems over small
//! p-groups, with exhaustive checkers for the correspondence between partial
//! normal subgroups of a proper locality and normal subsystems of its fusion
//! system.

pub mod catalog;
pub mod constructions;
pub mod correspondence;
pub mod fusion;
pub mod io;
pub mod error;
pub mod group;
pub mod locality;
pub mod partial;
pub mod perm;
pub mod pgroup;
pub mod report;

pub use error::*;
pub use group::{PermGroup, Subgroup};
pub use perm::Perm;
