//! Exhaustive reference implementations for validating the fast algorithms
//! on small instances, plus seeded random-instance generators.
//!
//! These deciders answer the same questions as [`crate::completion`] and
//! [`crate::compat`] by brute force: enumerate every candidate and test each
//! one directly. They are exponential and guarded accordingly — useful in
//! tests and for spot checks, never on real data.

use std::sync::Arc;

use rand::Rng;

use crate::model::{Character, CharacterSet, LgtNetwork, NodeId, Shape, Taxa, TaxonId, TaxonSet, Tree};
use crate::ptn::explains;

/// Every tree over the registry's taxa (internal nodes with two or more
/// children, children ordered by smallest member), each shape exactly once.
///
/// The counts grow as 1, 1, 4, 26, 236, 2752, 39208 — hence the small cap.
pub fn enumerate_trees(taxa: &Arc<Taxa>) -> Vec<Tree> {
    assert!(
        (1..=7).contains(&taxa.len()),
        "tree enumeration is exponential; keep it to at most 7 taxa"
    );
    let ids: Vec<TaxonId> = (0..taxa.len() as u32).map(TaxonId).collect();
    shapes_over(&ids)
        .iter()
        .map(|s| Tree::from_shape(taxa.clone(), s).expect("enumerated shapes are valid"))
        .collect()
}

fn shapes_over(ids: &[TaxonId]) -> Vec<Shape> {
    if ids.len() == 1 {
        return vec![Shape::Leaf(ids[0])];
    }
    let mut out = Vec::new();
    for blocks in partitions(ids.len()) {
        if blocks.len() < 2 {
            continue;
        }
        // Restricted-growth order means blocks are already sorted by their
        // smallest member, which is the canonical child order.
        let choices: Vec<Vec<Shape>> = blocks
            .iter()
            .map(|block| {
                let sub: Vec<TaxonId> = block.iter().map(|&i| ids[i]).collect();
                shapes_over(&sub)
            })
            .collect();
        let mut current = Vec::with_capacity(choices.len());
        product(&choices, &mut current, &mut out);
    }
    out
}

fn product(choices: &[Vec<Shape>], current: &mut Vec<Shape>, out: &mut Vec<Shape>) {
    if current.len() == choices.len() {
        out.push(Shape::Node(current.clone()));
        return;
    }
    for shape in &choices[current.len()] {
        current.push(shape.clone());
        product(choices, current, out);
        current.pop();
    }
}

/// All set partitions of `0..n` as block lists, in restricted-growth order.
fn partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    fn go(i: usize, n: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(i);
            go(i + 1, n, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![i]);
        go(i + 1, n, blocks, out);
        blocks.pop();
    }
    go(0, n, &mut blocks, &mut out);
    out
}

/// Every galled network whose support is `tree` with up to `max_transfers`
/// transfers, including the transfer-free network.
///
/// Candidates place at most one transfer endpoint per support edge, as
/// node-disjoint pairs. That loses nothing: two endpoints on one edge put
/// one cycle's pass-through node on the other cycle, and a shared endpoint
/// is itself a shared cycle node — either way the network is not galled.
pub fn enumerate_galled_networks(tree: &Tree, max_transfers: usize) -> Vec<LgtNetwork> {
    debug_assert!(tree.is_subdivision_free());
    let (sub, _) = tree.subdivide_all_edges();
    let points: Vec<NodeId> = sub.nodes().filter(|&v| sub.children(v).len() == 1).collect();
    let mut pairs = Vec::new();
    for &u in &points {
        for &v in &points {
            if u != v && sub.incomparable(u, v) {
                pairs.push((u, v));
            }
        }
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    extend_matchings(&sub, &pairs, 0, max_transfers, &mut current, &mut out);
    out
}

fn extend_matchings(
    sub: &Tree,
    pairs: &[(NodeId, NodeId)],
    start: usize,
    left: usize,
    current: &mut Vec<(NodeId, NodeId)>,
    out: &mut Vec<LgtNetwork>,
) {
    match LgtNetwork::new(sub.clone(), current.clone()) {
        Ok(net) if net.is_galled() => out.push(net),
        // Directed cycles and excess coverage never go away as transfers
        // are added, so the whole branch is dead.
        _ => return,
    }
    if left == 0 {
        return;
    }
    for k in start..pairs.len() {
        let (u, v) = pairs[k];
        if current.iter().any(|&(x, y)| x == u || y == u || x == v || y == v) {
            continue;
        }
        current.push((u, v));
        extend_matchings(sub, pairs, k + 1, left - 1, current, out);
        current.pop();
    }
}

/// Does any galled network over `tree` explain every character? Decided by
/// trying the entire catalog.
pub fn brute_force_completable(tree: &Tree, chars: &CharacterSet) -> bool {
    assert!(
        tree.node_count() <= 13,
        "exhaustive completion search is exponential; keep the tree small"
    );
    debug_assert!(tree
        .taxa()
        .labels()
        .eq(chars.taxa().labels()));
    enumerate_galled_networks(tree, usize::MAX)
        .iter()
        .any(|net| chars.iter().all(|c| explains(net, c.members())))
}

/// A uniform-ish random tree over the registry, built by recursive random
/// partition. Deterministic for a given generator state.
pub fn random_tree(taxa: &Arc<Taxa>, rng: &mut impl Rng) -> Tree {
    assert!(!taxa.is_empty());
    let ids: Vec<TaxonId> = (0..taxa.len() as u32).map(TaxonId).collect();
    let shape = random_shape(&ids, rng);
    Tree::from_shape(taxa.clone(), &shape).expect("random shapes are valid")
}

fn random_shape(ids: &[TaxonId], rng: &mut impl Rng) -> Shape {
    if ids.len() == 1 {
        return Shape::Leaf(ids[0]);
    }
    loop {
        let mut blocks: Vec<Vec<TaxonId>> = Vec::new();
        for &t in ids {
            let choice = rng.gen_range(0..=blocks.len());
            if choice == blocks.len() {
                blocks.push(vec![t]);
            } else {
                blocks[choice].push(t);
            }
        }
        if blocks.len() >= 2 {
            return Shape::Node(blocks.iter().map(|b| random_shape(b, rng)).collect());
        }
    }
}

/// A random galled augmentation of `tree`: its full subdivision plus up to
/// `max_transfers` greedily chosen transfer edges that keep the network
/// galled. Deterministic for a given generator state.
pub fn random_galled_network(tree: &Tree, max_transfers: usize, rng: &mut impl Rng) -> LgtNetwork {
    let (sub, _) = tree.subdivide_all_edges();
    let points: Vec<NodeId> = sub
        .nodes()
        .filter(|&v| sub.children(v).len() == 1)
        .collect();
    let mut transfers: Vec<(NodeId, NodeId)> = Vec::new();
    if points.len() >= 2 {
        let mut used: std::collections::HashSet<NodeId> = std::collections::HashSet::new();
        for _ in 0..max_transfers {
            for _attempt in 0..8 {
                let donor = points[rng.gen_range(0..points.len())];
                let recipient = points[rng.gen_range(0..points.len())];
                if donor == recipient || used.contains(&donor) || used.contains(&recipient) {
                    continue;
                }
                let mut widened = transfers.clone();
                widened.push((donor, recipient));
                match LgtNetwork::new(sub.clone(), widened) {
                    Ok(candidate) if candidate.is_galled() => {
                        used.insert(donor);
                        used.insert(recipient);
                        transfers.push((donor, recipient));
                        break;
                    }
                    _ => continue,
                }
            }
        }
    }
    LgtNetwork::new(sub, transfers).expect("every kept transfer was validated")
}

/// `count` random nonempty characters named `C1..`, duplicates allowed.
pub fn random_character_set(taxa: &Arc<Taxa>, count: usize, rng: &mut impl Rng) -> CharacterSet {
    let mut chars = Vec::with_capacity(count);
    for k in 0..count {
        let mut members = TaxonSet::empty(taxa.len());
        while members.is_empty() {
            for i in 0..taxa.len() as u32 {
                if rng.gen_bool(0.5) {
                    members.insert(TaxonId(i));
                }
            }
        }
        chars.push(Character::new(format!("C{}", k + 1), members).expect("members is nonempty"));
    }
    CharacterSet::new(taxa.clone(), chars).expect("generated names are distinct")
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::completion::{galled_completion, CompletionOutcome, Rejection};
    use crate::io::matrix::parse_sets;
    use crate::io::newick::{parse_newick, write_newick};

    fn registry(n: usize) -> Arc<Taxa> {
        let labels: Vec<String> = (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
        Arc::new(Taxa::from_labels(labels.iter().map(|s| s.as_str())).unwrap())
    }

    #[test]
    fn tree_counts_match_the_series() {
        for (n, expected) in [(1, 1), (2, 1), (3, 4), (4, 26), (5, 236)] {
            assert_eq!(enumerate_trees(&registry(n)).len(), expected, "n = {n}");
        }
    }

    #[test]
    fn enumerated_trees_are_distinct() {
        let trees = enumerate_trees(&registry(4));
        let newicks: HashSet<String> = trees.iter().map(|t| write_newick(t).unwrap()).collect();
        assert_eq!(newicks.len(), trees.len());
    }

    #[test]
    fn network_catalog_for_a_cherry_plus_leaf() {
        // ((a,b),c) has four subdivision points; four incomparable unordered
        // pairs give eight single-transfer networks, and the only disjoint
        // combination gives four two-transfer ones. Plus the bare tree: 13.
        let tree = parse_newick("((a,b),c);").unwrap();
        let nets = enumerate_galled_networks(&tree, usize::MAX);
        assert_eq!(nets.len(), 13);
        assert_eq!(nets.iter().filter(|n| n.transfers().is_empty()).count(), 1);
        assert!(nets.iter().all(|n| n.is_galled()));
    }

    #[test]
    fn star_instance_with_crossing_characters_is_not_completable() {
        let tree = parse_newick("(a,b,c,d);").unwrap();
        let chars = parse_sets("P: a b\nQ: c d\nR: a c\n", Some(tree.taxa())).unwrap();
        assert!(!brute_force_completable(&tree, &chars));
        // The fast path rejects it too: the leaves a, b, c are mutual
        // partners at equal depth.
        let outcome = galled_completion(&tree, &chars).unwrap();
        assert!(matches!(
            outcome,
            CompletionOutcome::Rejected(Rejection::IncomparableFaNeighbors { .. })
        ));
    }

    #[test]
    fn completable_instance_is_found_by_the_catalog() {
        let tree = parse_newick("(((a,b),(c,d)),(e,f));").unwrap();
        let chars = parse_sets("C1: c d e\nC2: c d\n", Some(tree.taxa())).unwrap();
        assert!(brute_force_completable(&tree, &chars));
    }

    #[test]
    fn matchings_cover_every_galled_subset() {
        // The matching enumeration is justified by a structural argument;
        // here it is checked against unrestricted subset enumeration.
        fn all_galled_subsets(tree: &Tree) -> HashSet<Vec<(NodeId, NodeId)>> {
            let (sub, _) = tree.subdivide_all_edges();
            let points: Vec<NodeId> =
                sub.nodes().filter(|&v| sub.children(v).len() == 1).collect();
            let mut pairs = Vec::new();
            for &u in &points {
                for &v in &points {
                    if u != v && sub.incomparable(u, v) {
                        pairs.push((u, v));
                    }
                }
            }
            fn go(
                sub: &Tree,
                pairs: &[(NodeId, NodeId)],
                start: usize,
                current: &mut Vec<(NodeId, NodeId)>,
                out: &mut HashSet<Vec<(NodeId, NodeId)>>,
            ) {
                match LgtNetwork::new(sub.clone(), current.clone()) {
                    Ok(net) if net.is_galled() => {
                        let mut key = current.clone();
                        key.sort();
                        out.insert(key);
                    }
                    _ => return,
                }
                for k in start..pairs.len() {
                    current.push(pairs[k]);
                    go(sub, pairs, k + 1, current, out);
                    current.pop();
                }
            }
            let mut out = HashSet::new();
            go(&sub, &pairs, 0, &mut Vec::new(), &mut out);
            out
        }

        for tree in enumerate_trees(&registry(4)) {
            let via_matchings: HashSet<Vec<(NodeId, NodeId)>> =
                enumerate_galled_networks(&tree, usize::MAX)
                    .iter()
                    .map(|n| {
                        let mut key = n.transfers().to_vec();
                        key.sort();
                        key
                    })
                    .collect();
            assert_eq!(via_matchings, all_galled_subsets(&tree), "{}", write_newick(&tree).unwrap());
        }
    }

    #[test]
    fn random_generators_are_seeded_and_valid() {
        let taxa = registry(6);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t1 = random_tree(&taxa, &mut rng);
        assert!(t1.is_subdivision_free());
        assert_eq!(t1.clade(t1.root()).len(), 6);
        let mut rng2 = ChaCha8Rng::seed_from_u64(7);
        let t2 = random_tree(&taxa, &mut rng2);
        assert_eq!(write_newick(&t1).unwrap(), write_newick(&t2).unwrap());

        let cs = random_character_set(&taxa, 5, &mut rng);
        assert_eq!(cs.len(), 5);
        assert!(cs.iter().all(|c| !c.members().is_empty()));

        let mut with_transfers = 0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tree = random_tree(&taxa, &mut rng);
            let net = random_galled_network(&tree, 3, &mut rng);
            assert!(net.is_galled());
            assert_eq!(net.support().suppress_subdivision_nodes().clade(NodeId(0)).len(), 6);
            with_transfers += usize::from(!net.transfers().is_empty());
        }
        assert!(with_transfers >= 15, "most draws should carry transfers");
    }
}
