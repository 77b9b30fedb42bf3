//! Completion of a tree into a galled perfect transfer network.
//!
//! Every edge of the input tree is subdivided once; transfer edges are then
//! added between subdivision nodes so that each character gains an origin.
//! A character with one first appearance needs no help; two first
//! appearances become partners that must be joined by a transfer over one of
//! them; three or more rule out any galled completion. The partner relation
//! is resolved in a single postorder sweep, and the resulting edge set is
//! accepted only if its cycles are pairwise node-disjoint.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::network::intersecting_cycles;
use crate::model::{CharacterSet, LgtNetwork, NodeId, Taxa, Tree};
use crate::par;
use crate::ptn::first_appearances;

/// Why no galled completion exists, with a witness.
#[derive(Clone, Debug)]
pub enum Rejection {
    /// A character first appears at three or more nodes; `nodes` lists them.
    TooManyFas { character: String, nodes: Vec<NodeId> },
    /// Two transfer partners of `node` are incomparable, so no single
    /// transfer over `node` can serve both.
    IncomparableFaNeighbors { node: NodeId, a: NodeId, b: NodeId },
    /// The forced transfer edges exist but two of their cycles collide.
    /// `support` is the subdivided tree the arcs refer to, and `conflict`
    /// indexes the two offending arcs.
    NotGalled {
        support: Tree,
        arcs: Vec<(NodeId, NodeId)>,
        conflict: (usize, usize),
    },
}

/// Result of the completion search.
#[derive(Clone, Debug)]
pub enum CompletionOutcome {
    Completable {
        /// The completion with unused subdivision nodes spliced out.
        network: LgtNetwork,
        /// The completion over the fully subdivided tree, before splicing.
        /// It carries no removable transfer edges, which makes it the
        /// canonical form for inspecting what the characters forced.
        redundancy_free: LgtNetwork,
    },
    Rejected(Rejection),
}

impl CompletionOutcome {
    pub fn is_completable(&self) -> bool {
        matches!(self, CompletionOutcome::Completable { .. })
    }
}

fn require_same_taxa(tree_taxa: &Arc<Taxa>, chars: &CharacterSet) -> Result<()> {
    let other = chars.taxa();
    if Arc::ptr_eq(tree_taxa, other) {
        return Ok(());
    }
    let same = tree_taxa.len() == other.len()
        && tree_taxa.labels().zip(other.labels()).all(|(a, b)| a == b);
    if same {
        Ok(())
    } else {
        Err(Error::MatrixFormat {
            line: 0,
            message: "characters and tree are over different taxa".into(),
        })
    }
}

/// The smallest taxon label below `v`, for the donor tie-break on mutually
/// simple partners.
fn smallest_label<'t>(tree: &'t Tree, v: NodeId) -> &'t str {
    tree.clade(v)
        .iter()
        .map(|t| tree.taxa().name(t))
        .min()
        .expect("every node has a leaf below it")
}

/// Runs the completion search. See [`galled_completion`]; additionally
/// returns a count of elementary steps, used to check the running time stays
/// linear in the number of characters.
pub fn galled_completion_counted(
    tree: &Tree,
    chars: &CharacterSet,
) -> Result<(CompletionOutcome, u64)> {
    require_same_taxa(tree.taxa(), chars)?;
    let n = tree.node_count();
    let mut ops: u64 = 0;

    // Characters with identical member sets force identical transfers, so
    // they are collapsed here; the first name stands for the group.
    let (chars, _) = chars.clone().dedup();

    let fas: Vec<Vec<NodeId>> = par::map_collect(chars.characters(), |c| {
        first_appearances(tree, c.members())
    });
    ops += (chars.len() as u64) * (n as u64);

    for (c, fa) in chars.iter().zip(&fas) {
        if fa.len() > 2 {
            return Ok((
                CompletionOutcome::Rejected(Rejection::TooManyFas {
                    character: c.name().to_string(),
                    nodes: fa.clone(),
                }),
                ops,
            ));
        }
    }

    // Transfer partners: characters with exactly two first appearances tie
    // the pair together.
    let mut partners: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for fa in &fas {
        if let [u, v] = fa[..] {
            partners[u.index()].push(v);
            partners[v.index()].push(u);
            ops += 1;
        }
    }
    for list in &mut partners {
        list.sort_unstable();
        list.dedup();
    }

    let (sub, edge_map) = tree.subdivide_all_edges();
    ops += sub.node_count() as u64;
    let above = |v: NodeId| {
        let p = tree.parent(v).expect("partners are never the root");
        edge_map[&(p, v)]
    };

    let mut possibly_simple = vec![false; n];
    let mut arcs: Vec<(NodeId, NodeId)> = Vec::new();
    for &v in tree.postorder() {
        ops += 1;
        let list = &partners[v.index()];
        if list.is_empty() {
            continue;
        }
        // The partners of one node must sit on a single root-leaf path;
        // keep the deepest.
        let mut min = list[0];
        for &x in &list[1..] {
            ops += 1;
            if tree.is_ancestor(min, x) {
                min = x;
            } else if !tree.is_ancestor(x, min) {
                return Ok((
                    CompletionOutcome::Rejected(Rejection::IncomparableFaNeighbors {
                        node: v,
                        a: min,
                        b: x,
                    }),
                    ops,
                ));
            }
        }
        if list.len() >= 2 {
            arcs.push((above(min), above(v)));
        } else if possibly_simple[min.index()] {
            // A mutually simple pair gets one transfer; the side holding the
            // smallest taxon label donates, which pins the direction.
            let (d, r) = if smallest_label(tree, min) < smallest_label(tree, v) {
                (min, v)
            } else {
                (v, min)
            };
            arcs.push((above(d), above(r)));
        } else {
            possibly_simple[v.index()] = true;
        }
    }

    ops += sub.node_count() as u64 + arcs.len() as u64;
    if let Some(conflict) = intersecting_cycles(&sub, &arcs) {
        return Ok((
            CompletionOutcome::Rejected(Rejection::NotGalled { support: sub, arcs, conflict }),
            ops,
        ));
    }

    // Node-disjoint cycles rule out directed cycles through the transfers,
    // so validation cannot fail here.
    let redundancy_free = LgtNetwork::new(sub, arcs)
        .expect("disjoint-cycle transfer edges always form a valid network");
    let network = redundancy_free.suppressed();
    Ok((CompletionOutcome::Completable { network, redundancy_free }, ops))
}

/// Decides whether the tree has a galled completion explaining every
/// character, and builds one if so. Characters sharing a member set are
/// treated as one.
pub fn galled_completion(tree: &Tree, chars: &CharacterSet) -> Result<CompletionOutcome> {
    galled_completion_counted(tree, chars).map(|(outcome, _)| outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::matrix::parse_sets;
    use crate::io::newick::parse_newick;
    use crate::ptn::explains;

    fn complete(newick: &str, sets: &str) -> CompletionOutcome {
        let tree = parse_newick(newick).unwrap();
        let chars = parse_sets(sets, Some(tree.taxa())).unwrap();
        galled_completion(&tree, &chars).unwrap()
    }

    #[test]
    fn partnered_and_lone_first_appearances_complete() {
        let tree = parse_newick("(((a,b),(c,d)),(e,f));").unwrap();
        let chars = parse_sets("C1: a b c d e\nC2: c d\nC3: c d e\n", Some(tree.taxa())).unwrap();
        let outcome = galled_completion(&tree, &chars).unwrap();
        let CompletionOutcome::Completable { network, redundancy_free } = outcome else {
            panic!("expected a completion");
        };
        assert_eq!(redundancy_free.transfers(), &[(NodeId(15), NodeId(19))]);
        assert_eq!(network.transfers(), &[(NodeId(11), NodeId(12))]);
        assert!(network.is_galled());
        for c in chars.iter() {
            assert!(explains(&network, c.members()), "missing {}", c.name());
            assert!(explains(&redundancy_free, c.members()));
        }
    }

    #[test]
    fn mutually_simple_pairs_donate_from_the_smaller_label() {
        let outcome = complete(
            "((z,w),((p1,p2),(q1,q2)),o);",
            "C1: z w p1 p2 q1 q2\nC2: z p1 p2 q1 q2\nC3: p1 p2 q1\nC4: q1 q2\n",
        );
        let CompletionOutcome::Completable { network, redundancy_free } = outcome else {
            panic!("expected a completion");
        };
        // The {p1,p2}/{q1} pair resolves first (donor side holds p1); the
        // z/{p1..q2} pair resolves at the ancestor sweep step.
        assert_eq!(
            redundancy_free.transfers(),
            &[(NodeId(16), NodeId(20)), (NodeId(13), NodeId(15))]
        );
        assert!(network.is_galled());
    }

    #[test]
    fn three_first_appearances_reject() {
        let outcome = complete("((s1,s2),((s3,s4),(s5,s6),s7));", "Cx: s1 s3 s5\n");
        let CompletionOutcome::Rejected(Rejection::TooManyFas { character, nodes }) = outcome
        else {
            panic!("expected rejection");
        };
        assert_eq!(character, "Cx");
        assert_eq!(nodes, vec![NodeId(2), NodeId(6), NodeId(9)]);
    }

    #[test]
    fn incomparable_partners_reject() {
        let outcome = complete(
            "((a,b),(c,d),(e,f));",
            "C1: a b c d\nC2: a b e f\nC3: c d e f\n",
        );
        let CompletionOutcome::Rejected(Rejection::IncomparableFaNeighbors { node, a, b }) =
            outcome
        else {
            panic!("expected rejection");
        };
        assert_eq!(node, NodeId(1));
        assert_eq!((a, b), (NodeId(4), NodeId(7)));
    }

    #[test]
    fn cycles_meeting_at_the_root_reject() {
        let outcome = complete(
            "((a,b),(c,d),(e,f),(g,h));",
            "D1: a b e f\nD2: c d g h\n",
        );
        let CompletionOutcome::Rejected(Rejection::NotGalled { arcs, conflict, .. }) = outcome
        else {
            panic!("expected rejection");
        };
        assert_eq!(arcs, vec![(NodeId(13), NodeId(19)), (NodeId(16), NodeId(22))]);
        assert_eq!(conflict, (0, 1));
    }

    #[test]
    fn no_characters_means_the_bare_tree() {
        let tree = parse_newick("((a,b),c);").unwrap();
        let chars = parse_sets("", Some(tree.taxa())).unwrap();
        let outcome = galled_completion(&tree, &chars).unwrap();
        let CompletionOutcome::Completable { network, .. } = outcome else {
            panic!("expected a completion");
        };
        assert!(network.transfers().is_empty());
        assert_eq!(network.node_count(), tree.node_count());
    }

    #[test]
    fn duplicate_member_sets_collapse() {
        let tree = parse_newick("(((a,b),(c,d)),(e,f));").unwrap();
        let chars = parse_sets(
            "C1: a b c d e\nC2: c d\nC3: c d e\nAgain: c d e\n",
            Some(tree.taxa()),
        )
        .unwrap();
        let outcome = galled_completion(&tree, &chars).unwrap();
        let CompletionOutcome::Completable { redundancy_free, .. } = outcome else {
            panic!("expected a completion");
        };
        assert_eq!(redundancy_free.transfers().len(), 1);
    }

    #[test]
    fn mismatched_taxa_error() {
        let tree = parse_newick("(a,b);").unwrap();
        let other = parse_sets("taxa: a c\nC1: a\n", None).unwrap();
        assert!(galled_completion(&tree, &other).is_err());
    }

    #[test]
    fn operation_count_grows_linearly_with_characters() {
        let tree = parse_newick("(((a,b),(c,d)),((e,f),(g,h)));").unwrap();
        let taxa = tree.taxa().clone();
        // Distinct singleton characters, so deduplication keeps them all.
        let all: Vec<String> = taxa.labels().map(|l| format!("C_{l}: {l}")).collect();
        let small = parse_sets(&all[..2].join("\n"), Some(&taxa)).unwrap();
        let large = parse_sets(&all.join("\n"), Some(&taxa)).unwrap();
        let (_, ops_small) = galled_completion_counted(&tree, &small).unwrap();
        let (_, ops_large) = galled_completion_counted(&tree, &large).unwrap();
        assert!(ops_large <= ops_small * 4 * 3, "{ops_large} vs {ops_small}");
    }
}
