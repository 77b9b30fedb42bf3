//! Perfect-transfer semantics: first appearances of characters on a tree,
//! and origin search on a network.
//!
//! A network explains a character C when, after removing every node that has
//! a support descendant leaf outside C, some surviving node still reaches all
//! leaves of C (over support and transfer edges combined). Such a node is an
//! origin for C.

use crate::model::{CharacterSet, LgtNetwork, NodeId, TaxonSet, Tree};
use crate::par;

/// Nodes whose clade is inside `members` while their parent's is not, in
/// increasing node order. These are the only nodes that can originate the
/// character on the bare tree.
pub fn first_appearances(tree: &Tree, members: &TaxonSet) -> Vec<NodeId> {
    let n = tree.node_count();
    let mut inside = vec![0u32; n];
    for &v in tree.postorder() {
        let mut count = match tree.leaf_taxon(v) {
            Some(t) if members.contains(t) => 1,
            _ => 0,
        };
        for c in tree.children(v) {
            count += inside[c.index()];
        }
        inside[v.index()] = count;
    }
    let covered = |v: NodeId| inside[v.index()] as usize == tree.clade_size(v);
    tree.nodes()
        .filter(|&v| covered(v) && tree.parent(v).map_or(true, |p| !covered(p)))
        .collect()
}

/// One row of first-appearance statistics for a character.
#[derive(Clone, Debug)]
pub struct FaRow {
    pub name: String,
    pub nodes: Vec<NodeId>,
    pub leaf_count: usize,
    pub internal_count: usize,
    /// More than two first appearances: no galled completion can exist.
    pub blocks_galled: bool,
}

/// First-appearance statistics for every character, in input order.
pub fn fa_statistics(tree: &Tree, chars: &CharacterSet) -> Vec<FaRow> {
    par::map_collect(chars.characters(), |c| {
        let nodes = first_appearances(tree, c.members());
        let leaf_count = nodes.iter().filter(|&&v| tree.is_leaf(v)).count();
        FaRow {
            name: c.name().to_string(),
            leaf_count,
            internal_count: nodes.len() - leaf_count,
            blocks_galled: nodes.len() > 2,
            nodes,
        }
    })
}

/// A human-readable handle for a node: the taxon label of a leaf, or the
/// clade of an internal node.
pub fn node_label(tree: &Tree, v: NodeId) -> String {
    match tree.leaf_taxon(v) {
        Some(t) => tree.taxa().name(t).to_string(),
        None => tree.clade(v).display(tree.taxa()),
    }
}

/// Renders first-appearance statistics as a TSV table.
pub fn fa_table(tree: &Tree, chars: &CharacterSet) -> String {
    let mut out = String::from("character\tfa_count\tleaf_fas\tinternal_fas\tblocks_galled\tfa_nodes\n");
    for row in fa_statistics(tree, chars) {
        let rendered: Vec<String> = row.nodes.iter().map(|&v| node_label(tree, v)).collect();
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            row.name,
            row.nodes.len(),
            row.leaf_count,
            row.internal_count,
            if row.blocks_galled { "yes" } else { "no" },
            rendered.join(" "),
        ));
    }
    out
}

/// Marks every node that has a support descendant leaf outside `members`.
/// These nodes cannot lie on any transmission path for the character.
pub fn removed_nodes(net: &LgtNetwork, members: &TaxonSet) -> Vec<bool> {
    let tree = net.support();
    let mut outside = vec![false; tree.node_count()];
    for &v in tree.postorder() {
        outside[v.index()] = match tree.leaf_taxon(v) {
            Some(t) => !members.contains(t),
            None => tree.children(v).iter().any(|c| outside[c.index()]),
        };
    }
    outside
}

/// The smallest-id origin for `members`, or `None` when the network does not
/// explain the character.
pub fn find_origin(net: &LgtNetwork, members: &TaxonSet) -> Option<NodeId> {
    let tree = net.support();
    let universe = tree.taxa().len();
    let outside = removed_nodes(net, members);
    let succ = net.successors();

    // Leaves of the character reachable from each surviving node, filled in
    // reverse topological order so successors come first.
    let mut reach: Vec<TaxonSet> = vec![TaxonSet::empty(universe); tree.node_count()];
    for &v in net.topological_order().iter().rev() {
        if outside[v.index()] {
            continue;
        }
        let mut r = TaxonSet::empty(universe);
        if let Some(t) = tree.leaf_taxon(v) {
            r.insert(t);
        }
        for &s in &succ[v.index()] {
            if !outside[s.index()] {
                r = r.union(&reach[s.index()]);
            }
        }
        reach[v.index()] = r;
    }

    let target = members.intersection(tree.clade(tree.root()));
    tree.nodes()
        .find(|&v| !outside[v.index()] && target.is_subset(&reach[v.index()]))
}

/// True when the network explains the character.
pub fn explains(net: &LgtNetwork, members: &TaxonSet) -> bool {
    find_origin(net, members).is_some()
}

/// Per-character origin report for a network.
#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    /// Character name and its origin, if any, in input order.
    pub rows: Vec<(String, Option<NodeId>)>,
}

impl VerifyOutcome {
    pub fn all_explained(&self) -> bool {
        self.rows.iter().all(|(_, origin)| origin.is_some())
    }
}

/// Finds an origin for every character.
pub fn verify(net: &LgtNetwork, chars: &CharacterSet) -> VerifyOutcome {
    let rows = par::map_collect(chars.characters(), |c| {
        (c.name().to_string(), find_origin(net, c.members()))
    });
    VerifyOutcome { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::newick::parse_newick;
    use crate::model::LgtNetwork;

    #[test]
    fn first_appearances_split_where_the_parent_leaks() {
        let tree = parse_newick("((s1,s2),((s3,s4),(s5,s6),s7));").unwrap();
        let taxa = tree.taxa().clone();
        let fa = |labels: &[&str]| first_appearances(&tree, &taxa.set(labels).unwrap());
        assert_eq!(fa(&["s1", "s2", "s3", "s4"]), vec![NodeId(1), NodeId(5)]);
        assert_eq!(fa(&["s2", "s3", "s4"]), vec![NodeId(3), NodeId(5)]);
        assert_eq!(fa(&["s5", "s6"]), vec![NodeId(8)]);
        assert_eq!(fa(&["s3", "s4", "s5", "s6", "s7"]), vec![NodeId(4)]);
        assert_eq!(
            fa(&["s1", "s2", "s3", "s4", "s5", "s6", "s7"]),
            vec![NodeId(0)]
        );
        assert_eq!(fa(&["s1", "s3", "s5", "s7"]).len(), 4);
    }

    #[test]
    fn statistics_flag_characters_with_many_first_appearances() {
        let tree = parse_newick("((s1,s2),((s3,s4),(s5,s6),s7));").unwrap();
        let taxa = tree.taxa().clone();
        let chars = crate::io::matrix::parse_sets("C2: s2 s3 s4\nCx: s1 s3 s5\n", Some(&taxa)).unwrap();
        let rows = fa_statistics(&tree, &chars);
        assert_eq!(rows[0].leaf_count, 1);
        assert_eq!(rows[0].internal_count, 1);
        assert!(!rows[0].blocks_galled);
        assert_eq!(rows[1].nodes.len(), 3);
        assert!(rows[1].blocks_galled);
        let table = fa_table(&tree, &chars);
        assert!(table.contains("C2\t2\t1\t1\tno\ts2 {s3,s4}\n"));
    }

    #[test]
    fn a_transfer_between_two_halves_explains_neither_complement() {
        // Support ((a,b),(c,d)) with one transfer from above `a` to above
        // `c`: {a,c} gains an origin, {b,d} has none anywhere.
        let tree = parse_newick("((a,b),(c,d));").unwrap();
        let taxa = tree.taxa().clone();
        let (sub, _) = tree.subdivide_all_edges();
        let net = LgtNetwork::new(sub, vec![(NodeId(8), NodeId(11))]).unwrap();
        assert_eq!(find_origin(&net, &taxa.set(["a", "c"]).unwrap()), Some(NodeId(8)));
        assert_eq!(find_origin(&net, &taxa.set(["b", "d"]).unwrap()), None);
        assert!(!explains(&net, &taxa.set(["b", "d"]).unwrap()));
        assert!(explains(&net, &taxa.set(["a", "b"]).unwrap()));
    }

    #[test]
    fn origins_survive_suppression() {
        let tree = parse_newick("(((a,b),(c,d)),(e,f));").unwrap();
        let taxa = tree.taxa().clone();
        let (sub, _) = tree.subdivide_all_edges();
        let net = LgtNetwork::new(sub, vec![(NodeId(15), NodeId(19))]).unwrap();
        let small = net.suppressed();
        for labels in [["c", "d"].as_slice(), &["c", "d", "e"], &["a", "b"], &["e", "f"], &["b", "d"]] {
            let members = taxa.set(labels.iter().copied()).unwrap();
            assert_eq!(
                explains(&net, &members),
                explains(&small, &members),
                "for {labels:?}"
            );
        }
    }

    #[test]
    fn verify_reports_per_character_origins() {
        let tree = parse_newick("((a,b),(c,d));").unwrap();
        let taxa = tree.taxa().clone();
        let (sub, _) = tree.subdivide_all_edges();
        let net = LgtNetwork::new(sub, vec![(NodeId(8), NodeId(11))]).unwrap();
        let chars = crate::io::matrix::parse_sets("C1: a c\nC2: b d\n", Some(&taxa)).unwrap();
        let report = verify(&net, &chars);
        assert_eq!(report.rows[0], ("C1".to_string(), Some(NodeId(8))));
        assert_eq!(report.rows[1], ("C2".to_string(), None));
        assert!(!report.all_explained());
    }
}
