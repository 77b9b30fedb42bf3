use std::sync::Arc;

use crate::error::{Error, Result};

use super::taxa::{Taxa, TaxonSet};

/// A named binary character: the set of taxa in which it is present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Character {
    name: String,
    members: TaxonSet,
}

impl Character {
    /// Creates a character; the member set must be nonempty.
    pub fn new(name: impl Into<String>, members: TaxonSet) -> Result<Character> {
        let name = name.into();
        if members.is_empty() {
            return Err(Error::EmptyCharacter(name));
        }
        Ok(Character { name, members })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn members(&self) -> &TaxonSet {
        &self.members
    }
}

/// An ordered collection of characters over one taxa registry.
///
/// Character order is the input order and is preserved everywhere; algorithms
/// that break ties do so by this order, which keeps runs deterministic.
#[derive(Clone, Debug)]
pub struct CharacterSet {
    taxa: Arc<Taxa>,
    characters: Vec<Character>,
}

impl CharacterSet {
    /// Creates a character set, checking that names are unique and that every
    /// member set is sized for the registry.
    pub fn new(taxa: Arc<Taxa>, characters: Vec<Character>) -> Result<CharacterSet> {
        let mut seen = std::collections::HashSet::new();
        for c in &characters {
            if c.members.universe() != taxa.len() {
                return Err(Error::MatrixFormat {
                    line: 0,
                    message: format!("character `{}` is over a different taxa universe", c.name),
                });
            }
            if !seen.insert(c.name.clone()) {
                return Err(Error::MatrixFormat {
                    line: 0,
                    message: format!("duplicate character name `{}`", c.name),
                });
            }
        }
        Ok(CharacterSet { taxa, characters })
    }

    /// Drops characters whose member sets repeat an earlier one, keeping the
    /// first occurrence. Returns the deduplicated set and one warning per
    /// dropped character.
    pub fn dedup(self) -> (CharacterSet, Vec<String>) {
        let mut seen: std::collections::HashMap<TaxonSet, String> = std::collections::HashMap::new();
        let mut kept = Vec::with_capacity(self.characters.len());
        let mut warnings = Vec::new();
        for c in self.characters {
            match seen.get(&c.members) {
                Some(first) => warnings.push(format!(
                    "character `{}` has the same members as `{}`; dropped",
                    c.name, first
                )),
                None => {
                    seen.insert(c.members.clone(), c.name.clone());
                    kept.push(c);
                }
            }
        }
        (
            CharacterSet { taxa: self.taxa, characters: kept },
            warnings,
        )
    }

    pub fn taxa(&self) -> &Arc<Taxa> {
        &self.taxa
    }

    pub fn len(&self) -> usize {
        self.characters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.characters.is_empty()
    }

    pub fn get(&self, idx: usize) -> &Character {
        &self.characters[idx]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Character> {
        self.characters.iter()
    }

    pub fn characters(&self) -> &[Character] {
        &self.characters
    }
}

/// True when two member sets could both be clades of one tree: one contains
/// the other or they are disjoint.
pub fn compatible(a: &TaxonSet, b: &TaxonSet) -> bool {
    !a.intersects(b) || a.is_subset(b) || b.is_subset(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taxa() -> Arc<Taxa> {
        Arc::new(Taxa::from_labels(&["a", "b", "c", "d"]).unwrap())
    }

    #[test]
    fn empty_members_are_rejected() {
        let t = taxa();
        let err = Character::new("C1", TaxonSet::empty(t.len())).unwrap_err();
        assert!(matches!(err, Error::EmptyCharacter(name) if name == "C1"));
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let t = taxa();
        let c1 = Character::new("C", t.set(["a"]).unwrap()).unwrap();
        let c2 = Character::new("C", t.set(["b"]).unwrap()).unwrap();
        let err = CharacterSet::new(t, vec![c1, c2]).unwrap_err();
        assert!(matches!(err, Error::MatrixFormat { .. }));
    }

    #[test]
    fn dedup_keeps_first_and_warns() {
        let t = taxa();
        let cs = CharacterSet::new(
            t.clone(),
            vec![
                Character::new("C1", t.set(["a", "b"]).unwrap()).unwrap(),
                Character::new("C2", t.set(["c"]).unwrap()).unwrap(),
                Character::new("C3", t.set(["a", "b"]).unwrap()).unwrap(),
            ],
        )
        .unwrap();
        let (deduped, warnings) = cs.dedup();
        assert_eq!(deduped.len(), 2);
        assert_eq!(deduped.get(0).name(), "C1");
        assert_eq!(deduped.get(1).name(), "C2");
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("C3") && warnings[0].contains("C1"));
    }

    #[test]
    fn compatibility_cases() {
        let t = taxa();
        let ab = t.set(["a", "b"]).unwrap();
        let abc = t.set(["a", "b", "c"]).unwrap();
        let cd = t.set(["c", "d"]).unwrap();
        let bc = t.set(["b", "c"]).unwrap();
        assert!(compatible(&ab, &abc)); // nested
        assert!(compatible(&ab, &cd)); // disjoint
        assert!(!compatible(&ab, &bc)); // properly overlapping
        assert!(!compatible(&abc, &cd));
    }
}
