//! Core data types: taxa registries, rooted trees, characters, and LGT
//! networks.

pub mod character;
pub mod network;
pub mod taxa;
pub mod tree;

pub use character::{compatible, Character, CharacterSet};
pub use network::{cycle_coverage, intersecting_cycles, LgtNetwork};
pub use taxa::{Taxa, TaxonId, TaxonSet};
pub use tree::{NodeId, Shape, Tree};
