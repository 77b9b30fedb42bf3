use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// Dense identifier of a taxon within a [`Taxa`] registry.
///
/// Ids are assigned contiguously from zero in registration order, so they can
/// index per-taxon arrays and bitsets directly.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TaxonId(pub u32);

impl TaxonId {
    /// The id as a usize, for indexing.
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Registry of taxon labels with dense ids.
#[derive(Clone, Debug, Default)]
pub struct Taxa {
    names: Vec<String>,
    index: HashMap<String, TaxonId>,
}

impl Taxa {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a registry from labels in order, rejecting duplicates.
    pub fn from_labels<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut taxa = Taxa::new();
        for label in labels {
            taxa.insert(label.as_ref())?;
        }
        Ok(taxa)
    }

    /// Registers a label and returns its id, rejecting duplicates.
    pub fn insert(&mut self, label: &str) -> Result<TaxonId> {
        if self.index.contains_key(label) {
            return Err(Error::DuplicateTaxon(label.to_string()));
        }
        let id = TaxonId(self.names.len() as u32);
        self.names.push(label.to_string());
        self.index.insert(label.to_string(), id);
        Ok(id)
    }

    /// Looks a label up.
    pub fn id(&self, label: &str) -> Option<TaxonId> {
        self.index.get(label).copied()
    }

    /// Like [`Taxa::id`] but errors with the offending label.
    pub fn require(&self, label: &str) -> Result<TaxonId> {
        self.id(label)
            .ok_or_else(|| Error::UnknownTaxon(label.to_string()))
    }

    pub fn name(&self, id: TaxonId) -> &str {
        &self.names[id.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Labels in id order.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    /// Builds a set over this registry from labels.
    pub fn set<I, S>(&self, labels: I) -> Result<TaxonSet>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = TaxonSet::empty(self.len());
        for label in labels {
            set.insert(self.require(label.as_ref())?);
        }
        Ok(set)
    }
}

/// Set of taxa over a fixed universe, backed by a bitset.
#[derive(Clone, PartialEq, Eq)]
pub struct TaxonSet {
    bits: FixedBitSet,
}

impl TaxonSet {
    /// The empty set over a universe of `universe` taxa.
    pub fn empty(universe: usize) -> Self {
        TaxonSet {
            bits: FixedBitSet::with_capacity(universe),
        }
    }

    /// The set of all `universe` taxa.
    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        TaxonSet { bits }
    }

    pub fn from_ids<I: IntoIterator<Item = TaxonId>>(universe: usize, ids: I) -> Self {
        let mut set = Self::empty(universe);
        for id in ids {
            set.insert(id);
        }
        set
    }

    /// Number of taxa in the universe (not in the set).
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn insert(&mut self, id: TaxonId) {
        self.bits.insert(id.index());
    }

    pub fn remove(&mut self, id: TaxonId) {
        self.bits.remove(id.index());
    }

    pub fn contains(&self, id: TaxonId) -> bool {
        self.bits.contains(id.index())
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Members in increasing id order.
    pub fn iter(&self) -> impl Iterator<Item = TaxonId> + '_ {
        self.bits.ones().map(|i| TaxonId(i as u32))
    }

    /// Smallest member id, if any.
    pub fn min(&self) -> Option<TaxonId> {
        self.iter().next()
    }

    pub fn union(&self, other: &TaxonSet) -> TaxonSet {
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        TaxonSet { bits }
    }

    pub fn intersection(&self, other: &TaxonSet) -> TaxonSet {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        TaxonSet { bits }
    }

    pub fn difference(&self, other: &TaxonSet) -> TaxonSet {
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        TaxonSet { bits }
    }

    pub fn is_subset(&self, other: &TaxonSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_superset(&self, other: &TaxonSet) -> bool {
        other.is_subset(self)
    }

    pub fn is_disjoint(&self, other: &TaxonSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn intersects(&self, other: &TaxonSet) -> bool {
        !self.is_disjoint(other)
    }

    /// Strict subset test.
    pub fn is_proper_subset(&self, other: &TaxonSet) -> bool {
        self != other && self.is_subset(other)
    }

    /// Member labels sorted lexicographically.
    pub fn sorted_labels<'t>(&self, taxa: &'t Taxa) -> Vec<&'t str> {
        let mut labels: Vec<&str> = self.iter().map(|id| taxa.name(id)).collect();
        labels.sort_unstable();
        labels
    }

    /// Renders the set as `{a,b,c}` with labels sorted lexicographically.
    pub fn display(&self, taxa: &Taxa) -> String {
        format!("{{{}}}", self.sorted_labels(taxa).join(","))
    }
}

impl Hash for TaxonSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.bits.len().hash(state);
        for idx in self.bits.ones() {
            idx.hash(state);
        }
    }
}

impl fmt::Debug for TaxonSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.bits.ones()).finish()
    }
}
