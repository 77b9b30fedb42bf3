//! Readers and writers: newick trees, character matrices, and the structured
//! network format.

pub mod matrix;
pub mod netfmt;
pub mod newick;

pub use matrix::{parse_csv, parse_sets, write_sets};
pub use netfmt::{export_network, network_to_dot, parse_network, write_network};
pub use newick::{parse_newick, parse_newick_with_taxa, write_newick};
