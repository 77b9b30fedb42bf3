//! Perfect transfer networks on galled support trees.
//!
//! A lateral gene transfer network is a rooted support tree plus transfer
//! arcs between points on its edges. It is a perfect transfer network for a
//! set of characters (taxon sets) when every character can be traced to a
//! single origin: gained once, inherited down tree edges and across
//! transfers, and never lost. This crate restricts attention to *galled*
//! networks — no two transfer cycles share a node — where the two core
//! questions become tractable:
//!
//! - **Completion** ([`completion::galled_completion`]): given a tree and
//!   characters, add transfers to the tree so the result explains every
//!   character, or report exactly why none exists.
//! - **Compatibility** ([`compat::galled_compatible`]): given characters
//!   alone, decide whether *any* tree admits such a completion, and build a
//!   witness when one does.
//!
//! Supporting pieces: [`ptn`] analyses fixed networks (first appearances,
//! per-character origins), [`io`] reads and writes the text formats
//! (newick trees, character sets, explicit networks), [`oracle`] holds the
//! exhaustive reference implementations the fast paths are tested against,
//! and [`par`] switches the data-parallel batch helpers between rayon and a
//! sequential fallback via the `parallel` feature.

pub mod compat;
pub mod completion;
pub mod error;
pub mod io;
pub mod model;
pub mod oracle;
pub mod par;
pub mod ptn;

pub use error::{Error, Result};
pub use model::{Character, CharacterSet, LgtNetwork, NodeId, Shape, Taxa, TaxonId, TaxonSet, Tree};
