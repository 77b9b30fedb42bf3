//! Galled compatibility: is there any tree whose galled completion explains
//! every character?
//!
//! The search recurses on the character set. A maximal character compatible
//! with everything splits the problem in two independent halves. Otherwise
//! some maximal character A properly overlaps a partner B, and one of the two
//! splits {A minus B, A cap B} or {B minus A, B cap A} must become sibling
//! clades; trying a split either succeeds, fails structurally (so the other
//! split is tried), or fails in a sub-recursion — which is definitive, so the
//! other split is not tried and the whole instance is incompatible. That last
//! rule keeps the recursion tree linear in the number of characters.
//!
//! A successful run yields a witness tree plus transfer arcs described as
//! (donor clade, recipient clade) pairs; [`reconstruct_network`] turns them
//! into an explicit network.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{
    compatible, CharacterSet, LgtNetwork, NodeId, Shape, Taxa, TaxonId, TaxonSet, Tree,
};

/// One recorded decision of the search, for explaining a "no" verdict.
#[derive(Clone, Debug)]
pub enum TraceStep {
    /// A recursive call over `universe` considering `chars`.
    Enter { universe: TaxonSet, chars: Vec<String> },
    /// `name` is maximal and compatible with everything in scope.
    MaximalCompatible { name: String },
    /// No maximal character fit; `a` and `b` were picked as the
    /// properly-overlapping pair to split on.
    Pair { a: String, b: String },
    /// The split into sibling clades `side_a`, `side_b` cannot be realized.
    SplitRejected { side_a: TaxonSet, side_b: TaxonSet, reason: String },
    /// Characters grouped under one node of the forced tree have no witness
    /// of their own.
    GroupFailed { parent: TaxonSet },
    /// Both splits of the pair failed structurally.
    NoSplitWorked,
}

/// The decision path of a failed search.
#[derive(Clone, Debug, Default)]
pub struct CompatTrace {
    pub steps: Vec<TraceStep>,
}

/// Verdict of the compatibility search.
#[derive(Clone, Debug)]
pub enum CompatOutcome {
    Compatible {
        /// A tree whose completion by `arcs` explains every character.
        tree: Tree,
        /// Transfer arcs as (donor clade, recipient clade) pairs over `tree`.
        arcs: Vec<(TaxonSet, TaxonSet)>,
        /// The explicit galled network built from `tree` and `arcs`.
        network: LgtNetwork,
    },
    Incompatible { trace: CompatTrace },
}

impl CompatOutcome {
    pub fn is_compatible(&self) -> bool {
        matches!(self, CompatOutcome::Compatible { .. })
    }
}

/// Builds the smallest tree over `universe` whose internal clades are
/// exactly the given ones (trivial clades are dropped). Fails with a reason
/// when two clades properly overlap.
pub fn tree_from_clades(
    taxa: &Arc<Taxa>,
    universe: &TaxonSet,
    clades: &[TaxonSet],
) -> std::result::Result<Tree, String> {
    if universe.len() == 1 {
        let t = universe.min().expect("universe is nonempty");
        return Ok(Tree::from_shape(taxa.clone(), &Shape::Leaf(t))
            .expect("a single leaf is a valid tree"));
    }

    // Drop trivial clades, dedupe, and order smaller-first so that children
    // are assembled before their parents.
    let mut kept: Vec<TaxonSet> = Vec::new();
    for c in clades {
        debug_assert!(c.is_subset(universe));
        if c.len() >= 2 && c != universe && !kept.contains(c) {
            kept.push(c.clone());
        }
    }
    kept.sort_by_key(|c| (c.len(), c.min()));

    for i in 0..kept.len() {
        for j in i + 1..kept.len() {
            if !compatible(&kept[i], &kept[j]) {
                return Err(format!(
                    "clades {} and {} overlap",
                    kept[i].display(taxa),
                    kept[j].display(taxa)
                ));
            }
        }
    }

    // Parent of a clade: the smallest strict superset, or the root. The
    // kept list is size-sorted, so the first superset found is smallest.
    let parent_of = |i: usize| -> Option<usize> {
        (i + 1..kept.len()).find(|&j| kept[i].is_proper_subset(&kept[j]))
    };
    // A taxon hangs off its smallest enclosing clade, or the root.
    let container_of = |t: TaxonId| -> Option<usize> { (0..kept.len()).find(|&i| kept[i].contains(t)) };

    #[derive(Clone, Copy)]
    enum Child {
        Clade(usize),
        Leaf(TaxonId),
    }
    let mut children: Vec<Vec<Child>> = vec![Vec::new(); kept.len() + 1];
    let slot = |of: Option<usize>| of.map_or(kept.len(), |i| i);
    for i in 0..kept.len() {
        children[slot(parent_of(i))].push(Child::Clade(i));
    }
    for t in universe.iter() {
        children[slot(container_of(t))].push(Child::Leaf(t));
    }

    // Assemble small clades first; the root slot comes last, after every
    // clade below it has a shape.
    let mut shapes: Vec<Option<Shape>> = vec![None; kept.len() + 1];
    for idx in 0..=kept.len() {
        let mut kids: Vec<(TaxonId, Shape)> = Vec::new();
        for child in &children[idx] {
            match *child {
                Child::Leaf(t) => kids.push((t, Shape::Leaf(t))),
                Child::Clade(i) => {
                    let min = kept[i].min().expect("clades are nonempty");
                    kids.push((min, shapes[i].take().expect("children are built before parents")));
                }
            }
        }
        kids.sort_by_key(|(min, _)| *min);
        let shape = Shape::Node(kids.into_iter().map(|(_, s)| s).collect());
        shapes[idx] = Some(shape);
    }
    let root = shapes[kept.len()].take().expect("root shape was just built");
    Ok(Tree::from_shape(taxa.clone(), &root)
        .expect("laminar clades over two or more taxa never produce unary nodes"))
}

/// Turns a witness into an explicit network: the tree is subdivided and each
/// arc becomes a transfer from above its donor clade to above its recipient
/// clade; unused subdivision nodes are spliced back out.
pub fn reconstruct_network(tree: &Tree, arcs: &[(TaxonSet, TaxonSet)]) -> Result<LgtNetwork> {
    let (sub, edge_map) = tree.subdivide_all_edges();
    let node_of = |clade: &TaxonSet| -> Result<NodeId> {
        tree.nodes()
            .find(|&v| tree.clade(v) == clade)
            .ok_or_else(|| {
                Error::InvalidNetwork(format!(
                    "no node has clade {}",
                    clade.display(tree.taxa())
                ))
            })
    };
    let mut transfers = Vec::with_capacity(arcs.len());
    for (donor, recipient) in arcs {
        let d = node_of(donor)?;
        let r = node_of(recipient)?;
        let above = |v: NodeId| -> Result<NodeId> {
            let p = tree
                .parent(v)
                .ok_or_else(|| Error::InvalidNetwork("an arc clade covers the whole tree".into()))?;
            Ok(edge_map[&(p, v)])
        };
        transfers.push((above(d)?, above(r)?));
    }
    Ok(LgtNetwork::new(sub, transfers)?.suppressed())
}

struct Chain {
    bottom: TaxonSet,
    stable: TaxonSet,
}

/// Checks whether the crossing characters nest strictly on the `s` side
/// while all sharing exactly `t` on the other.
fn chain_in(members: &[&TaxonSet], s: &TaxonSet, t: &TaxonSet) -> Option<Chain> {
    let mut items: Vec<(usize, TaxonSet)> = Vec::with_capacity(members.len());
    for (k, m) in members.iter().enumerate() {
        if &m.difference(s) != t {
            return None;
        }
        items.push((k, m.intersection(s)));
    }
    items.sort_by_key(|(_, inter)| inter.len());
    for w in items.windows(2) {
        if !w[0].1.is_proper_subset(&w[1].1) {
            return None;
        }
    }
    if &items.last().expect("the pair character always crosses").1 != s {
        return None;
    }
    Some(Chain { bottom: items[0].1.clone(), stable: t.clone() })
}

enum TryResult {
    Yes(Tree, Vec<(TaxonSet, TaxonSet)>),
    /// A sub-recursion failed; by the structure of the search this verdict
    /// is final for the whole scope, not just this split.
    No,
    /// The split itself cannot be realized; the sibling split may still work.
    Invalid(String),
}

struct Search<'a> {
    chars: &'a CharacterSet,
    taxa: Arc<Taxa>,
    calls: u64,
    trace: CompatTrace,
}

impl<'a> Search<'a> {
    fn members(&self, i: usize) -> &TaxonSet {
        self.chars.get(i).members()
    }

    fn name(&self, i: usize) -> &str {
        self.chars.get(i).name()
    }

    fn star(&self, universe: &TaxonSet) -> Tree {
        let shape = if universe.len() == 1 {
            Shape::Leaf(universe.min().expect("universe is nonempty"))
        } else {
            Shape::Node(universe.iter().map(Shape::Leaf).collect())
        };
        Tree::from_shape(self.taxa.clone(), &shape).expect("a star is a valid tree")
    }

    /// The recursion: find a witness over `universe` for the scoped
    /// characters, or report that none exists.
    fn get_galled(
        &mut self,
        scope: &[usize],
        universe: &TaxonSet,
    ) -> Option<(Tree, Vec<(TaxonSet, TaxonSet)>)> {
        self.calls += 1;
        debug_assert!(!universe.is_empty());
        debug_assert!(scope.iter().all(|&i| self.members(i).is_subset(universe)));
        self.trace.steps.push(TraceStep::Enter {
            universe: universe.clone(),
            chars: scope.iter().map(|&i| self.name(i).to_string()).collect(),
        });

        if universe.len() == 1 {
            // Every scoped character equals the universe; the leaf explains it.
            return Some((self.star(universe), Vec::new()));
        }
        if scope.is_empty() {
            return Some((self.star(universe), Vec::new()));
        }

        let is_maximal = |i: usize, search: &Search| {
            scope
                .iter()
                .all(|&j| j == i || !search.members(i).is_proper_subset(search.members(j)))
        };
        let maximal: Vec<usize> = scope.iter().copied().filter(|&i| is_maximal(i, self)).collect();

        if let Some(&m) = maximal
            .iter()
            .find(|&&m| scope.iter().all(|&j| compatible(self.members(m), self.members(j))))
        {
            self.trace.steps.push(TraceStep::MaximalCompatible { name: self.name(m).to_string() });
            let inside: Vec<usize> = scope
                .iter()
                .copied()
                .filter(|&j| self.members(j).is_proper_subset(self.members(m)))
                .collect();
            if self.members(m) == universe {
                // The root itself explains m; only the strict subsets remain.
                return self.get_galled(&inside, universe);
            }
            let outside: Vec<usize> = scope
                .iter()
                .copied()
                .filter(|&j| self.members(j).is_disjoint(self.members(m)))
                .collect();
            debug_assert_eq!(inside.len() + outside.len() + 1, scope.len());
            let m_set = self.members(m).clone();
            let (left, mut arcs) = self.get_galled(&inside, &m_set)?;
            let rest = universe.difference(&m_set);
            let (right, right_arcs) = self.get_galled(&outside, &rest)?;
            arcs.extend(right_arcs);
            let shape = Shape::Node(vec![left.to_shape(), right.to_shape()]);
            let tree = Tree::from_shape(self.taxa.clone(), &shape)
                .expect("merging two witnesses under a fresh root is valid");
            return Some((tree, arcs));
        }

        // Every maximal character properly overlaps something. Split on the
        // first maximal one and its largest properly-overlapping partner.
        let a = maximal[0];
        let mut partner: Option<usize> = None;
        for &j in scope {
            if !compatible(self.members(a), self.members(j))
                && partner.is_none_or(|p| self.members(j).len() > self.members(p).len())
            {
                partner = Some(j);
            }
        }
        let b = partner.expect("a maximal character that fits nothing has a partner");
        debug_assert!(maximal.contains(&b), "the largest partner is itself maximal");
        self.trace.steps.push(TraceStep::Pair {
            a: self.name(a).to_string(),
            b: self.name(b).to_string(),
        });

        let a_set = self.members(a).clone();
        let b_set = self.members(b).clone();
        let splits = [
            (a_set.difference(&b_set), a_set.intersection(&b_set)),
            (b_set.difference(&a_set), b_set.intersection(&a_set)),
        ];
        for (side_a, side_b) in splits {
            match self.try_partition(scope, universe, &side_a, &side_b) {
                TryResult::Yes(tree, arcs) => return Some((tree, arcs)),
                TryResult::No => return None,
                TryResult::Invalid(reason) => {
                    self.trace.steps.push(TraceStep::SplitRejected { side_a, side_b, reason });
                }
            }
        }
        self.trace.steps.push(TraceStep::NoSplitWorked);
        None
    }

    /// Tries to realize `side_a` and `side_b` as sibling clades joined by
    /// one transfer.
    fn try_partition(
        &mut self,
        scope: &[usize],
        universe: &TaxonSet,
        side_a: &TaxonSet,
        side_b: &TaxonSet,
    ) -> TryResult {
        // Characters crossing both sides must form a chain: strictly nested
        // on one side, identical on the other. The transfer then runs from
        // the innermost nest to the shared side.
        let crossing: Vec<usize> = scope
            .iter()
            .copied()
            .filter(|&i| self.members(i).intersects(side_a) && self.members(i).intersects(side_b))
            .collect();
        let crossing_members: Vec<&TaxonSet> =
            crossing.iter().map(|&i| self.chars.get(i).members()).collect();
        let oriented = chain_in(&crossing_members, side_a, side_b)
            .map(|c| (c, side_a))
            .or_else(|| chain_in(&crossing_members, side_b, side_a).map(|c| (c, side_b)));
        let Some((Chain { bottom, stable }, nest_side)) = oriented else {
            return TryResult::Invalid("the characters crossing the split do not chain".into());
        };

        // Forced structure: the chain's nested intersections and the stable
        // side become clades, and so does any other character containing
        // either end of the transfer.
        let mut forced = vec![false; self.chars.len()];
        for &i in &crossing {
            forced[i] = true;
        }
        let mut clades: Vec<TaxonSet> =
            crossing_members.iter().map(|m| m.intersection(nest_side)).collect();
        clades.push(stable.clone());
        for &i in scope {
            if forced[i] {
                continue;
            }
            let m = self.members(i);
            if bottom.is_subset(m) || stable.is_subset(m) {
                forced[i] = true;
                clades.push(m.clone());
            }
        }

        let tree = match tree_from_clades(&self.taxa, universe, &clades) {
            Ok(t) => t,
            Err(reason) => return TryResult::Invalid(reason),
        };

        // Unforced characters must each fit under a single node, grouped.
        let mut groups: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
        for &i in scope {
            if forced[i] {
                continue;
            }
            let mut parents = self.members(i).iter().map(|t| {
                tree.parent(tree.leaf_of(t).expect("universe taxa are leaves"))
                    .expect("multi-taxon universes have no leaf root")
            });
            let v = parents.next().expect("characters are nonempty");
            if parents.any(|p| p != v) {
                return TryResult::Invalid(format!(
                    "character `{}` does not fit under one node of the forced tree",
                    self.name(i)
                ));
            }
            groups.entry(v).or_default().push(i);
        }

        let mut arcs = vec![(bottom, stable)];
        let mut grafts: BTreeMap<NodeId, Tree> = BTreeMap::new();
        for (v, group) in groups {
            let sub_universe = tree
                .children(v)
                .iter()
                .filter_map(|&c| tree.leaf_taxon(c))
                .fold(TaxonSet::empty(self.taxa.len()), |mut acc, t| {
                    acc.insert(t);
                    acc
                });
            match self.get_galled(&group, &sub_universe) {
                Some((sub_tree, sub_arcs)) => {
                    arcs.extend(sub_arcs);
                    grafts.insert(v, sub_tree);
                }
                None => {
                    self.trace.steps.push(TraceStep::GroupFailed { parent: tree.clade(v).clone() });
                    return TryResult::No;
                }
            }
        }

        let shape = graft(&tree, tree.root(), &grafts);
        let tree = Tree::from_shape(self.taxa.clone(), &shape)
            .expect("grafting group witnesses preserves validity");
        TryResult::Yes(tree, arcs)
    }
}

/// Rebuilds `base` with each grafted subtree replacing the leaf children of
/// its node: the graft is spliced in when it covers the node's whole clade
/// (all children were leaves), otherwise appended as a new child.
fn graft(base: &Tree, v: NodeId, grafts: &BTreeMap<NodeId, Tree>) -> Shape {
    if let Some(t) = base.leaf_taxon(v) {
        return Shape::Leaf(t);
    }
    let grafted = grafts.get(&v);
    let mut kids: Vec<Shape> = Vec::new();
    for &c in base.children(v) {
        if grafted.is_some() && base.is_leaf(c) {
            continue;
        }
        kids.push(graft(base, c, grafts));
    }
    if let Some(g) = grafted {
        let g_shape = g.to_shape();
        if g.clade(g.root()) == base.clade(v) {
            debug_assert!(kids.is_empty(), "a whole-clade graft replaces only leaves");
            match g_shape {
                Shape::Node(gk) => return Shape::Node(gk),
                Shape::Leaf(_) => unreachable!("a multi-taxon clade graft is internal"),
            }
        }
        kids.push(g_shape);
    }
    Shape::Node(kids)
}

/// Like [`galled_compatible`], and also reports how many recursive calls the
/// search made — guaranteed at most three per character.
pub fn galled_compatible_counted(chars: &CharacterSet) -> Result<(CompatOutcome, u64)> {
    if chars.taxa().is_empty() {
        return Err(Error::MatrixFormat { line: 0, message: "no taxa to build a tree over".into() });
    }
    let (deduped, _) = chars.clone().dedup();
    let taxa = deduped.taxa().clone();
    let universe = TaxonSet::full(taxa.len());
    let mut search = Search { chars: &deduped, taxa, calls: 0, trace: CompatTrace::default() };
    let scope: Vec<usize> = (0..deduped.len()).collect();
    let result = search.get_galled(&scope, &universe);
    let calls = search.calls;
    debug_assert!(
        calls <= 3 * deduped.len().max(1) as u64,
        "recursion exceeded the linear bound: {calls} calls for {} characters",
        deduped.len()
    );
    let outcome = match result {
        Some((tree, arcs)) => {
            let network = reconstruct_network(&tree, &arcs)?;
            CompatOutcome::Compatible { tree, arcs, network }
        }
        None => CompatOutcome::Incompatible { trace: search.trace },
    };
    Ok((outcome, calls))
}

/// Decides whether any tree over the registry has a galled completion
/// explaining every character, and builds a witness when one exists.
/// Characters sharing a member set are treated as one.
pub fn galled_compatible(chars: &CharacterSet) -> Result<CompatOutcome> {
    galled_compatible_counted(chars).map(|(outcome, _)| outcome)
}
