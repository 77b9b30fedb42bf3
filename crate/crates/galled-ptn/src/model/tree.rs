use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};

use super::taxa::{Taxa, TaxonId, TaxonSet};

/// Dense identifier of a node within a [`Tree`] or network.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(pub u32);

impl NodeId {
    /// The id as a usize, for indexing.
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Nested description of a rooted tree, used to build a [`Tree`] directly.
///
/// Internal nodes carry their children in order; every internal node needs at
/// least two of them. A bare leaf is a valid single-node tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Leaf(TaxonId),
    Node(Vec<Shape>),
}

/// Rooted phylogenetic tree with ordered children over a shared taxa registry.
///
/// Nodes are numbered densely from zero. Leaves are exactly the nodes without
/// children and each carries a distinct taxon; not every registry taxon has to
/// appear. Unary (subdivision) nodes are representable so that subdivided
/// trees can be expressed, but [`Tree::from_shape`] never creates them.
///
/// Construction precomputes constant-time ancestry tests, lowest common
/// ancestors, and the clade (descendant taxa) of every node.
#[derive(Clone, Debug)]
pub struct Tree {
    taxa: Arc<Taxa>,
    root: NodeId,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    leaf_taxon: Vec<Option<TaxonId>>,
    taxon_leaf: Vec<Option<NodeId>>,
    depth: Vec<u32>,
    tin: Vec<u32>,
    tout: Vec<u32>,
    preorder: Vec<NodeId>,
    postorder: Vec<NodeId>,
    euler: Vec<NodeId>,
    first_occ: Vec<u32>,
    sparse: Vec<Vec<u32>>,
    clades: Vec<TaxonSet>,
}

impl Tree {
    /// Builds a tree from a nested shape, numbering nodes in preorder
    /// (parents before children, siblings left to right).
    pub fn from_shape(taxa: Arc<Taxa>, shape: &Shape) -> Result<Tree> {
        let mut parent: Vec<Option<NodeId>> = Vec::new();
        let mut children: Vec<Vec<NodeId>> = Vec::new();
        let mut leaf_taxon: Vec<Option<TaxonId>> = Vec::new();

        let mut stack: Vec<(&Shape, Option<NodeId>)> = vec![(shape, None)];
        while let Some((node, par)) = stack.pop() {
            let id = NodeId(parent.len() as u32);
            parent.push(par);
            children.push(Vec::new());
            if let Some(p) = par {
                children[p.index()].push(id);
            }
            match node {
                Shape::Leaf(taxon) => leaf_taxon.push(Some(*taxon)),
                Shape::Node(kids) => {
                    if kids.len() < 2 {
                        return Err(Error::InvalidTree(format!(
                            "internal node with {} children; at least two are required",
                            kids.len()
                        )));
                    }
                    leaf_taxon.push(None);
                    for kid in kids.iter().rev() {
                        stack.push((kid, Some(id)));
                    }
                }
            }
        }
        Tree::from_parts(taxa, NodeId(0), parent, children, leaf_taxon)
    }

    /// Builds a tree from explicit node arrays, validating shape.
    ///
    /// Unlike [`Tree::from_shape`], unary nodes are accepted; this is the
    /// constructor used for subdivided trees.
    pub fn from_parts(
        taxa: Arc<Taxa>,
        root: NodeId,
        parent: Vec<Option<NodeId>>,
        children: Vec<Vec<NodeId>>,
        leaf_taxon: Vec<Option<TaxonId>>,
    ) -> Result<Tree> {
        let n = parent.len();
        if n == 0 {
            return Err(Error::InvalidTree("tree has no nodes".into()));
        }
        if children.len() != n || leaf_taxon.len() != n {
            return Err(Error::InvalidTree("node array lengths differ".into()));
        }
        if root.index() >= n || parent[root.index()].is_some() {
            return Err(Error::InvalidTree("root must exist and have no parent".into()));
        }
        for (i, par) in parent.iter().enumerate() {
            match par {
                None if i != root.index() => {
                    return Err(Error::InvalidTree(format!("node {i} has no parent and is not the root")));
                }
                Some(p) if p.index() >= n => {
                    return Err(Error::InvalidTree(format!("node {i} has out-of-range parent")));
                }
                Some(p) if !children[p.index()].contains(&NodeId(i as u32)) => {
                    return Err(Error::InvalidTree(format!(
                        "node {i} is missing from the child list of its parent"
                    )));
                }
                _ => {}
            }
        }
        let mut taxon_leaf: Vec<Option<NodeId>> = vec![None; taxa.len()];
        for i in 0..n {
            let id = NodeId(i as u32);
            for c in &children[i] {
                if c.index() >= n || parent[c.index()] != Some(id) {
                    return Err(Error::InvalidTree(format!("inconsistent child link at node {i}")));
                }
            }
            match leaf_taxon[i] {
                Some(t) => {
                    if !children[i].is_empty() {
                        return Err(Error::InvalidTree(format!("node {i} has children and a taxon")));
                    }
                    if t.index() >= taxa.len() {
                        return Err(Error::InvalidTree(format!("node {i} references an unknown taxon")));
                    }
                    if taxon_leaf[t.index()].is_some() {
                        return Err(Error::DuplicateTaxon(taxa.name(t).to_string()));
                    }
                    taxon_leaf[t.index()] = Some(id);
                }
                None => {
                    if children[i].is_empty() {
                        return Err(Error::InvalidTree(format!("leaf node {i} has no taxon")));
                    }
                }
            }
        }

        let mut tree = Tree {
            taxa,
            root,
            parent,
            children,
            leaf_taxon,
            taxon_leaf,
            depth: Vec::new(),
            tin: Vec::new(),
            tout: Vec::new(),
            preorder: Vec::new(),
            postorder: Vec::new(),
            euler: Vec::new(),
            first_occ: Vec::new(),
            sparse: Vec::new(),
            clades: Vec::new(),
        };
        tree.build_caches()?;
        Ok(tree)
    }

    fn build_caches(&mut self) -> Result<()> {
        let n = self.parent.len();
        self.depth = vec![0; n];
        self.tin = vec![0; n];
        self.tout = vec![0; n];
        self.preorder = Vec::with_capacity(n);
        self.postorder = Vec::with_capacity(n);
        self.euler = Vec::with_capacity(2 * n);
        self.first_occ = vec![u32::MAX; n];

        let mut timer: u32 = 0;
        let mut stack: Vec<(NodeId, usize)> = vec![(self.root, 0)];
        self.visit(self.root, &mut timer);
        while let Some(top) = stack.last_mut() {
            let (u, next) = *top;
            if next < self.children[u.index()].len() {
                top.1 += 1;
                let c = self.children[u.index()][next];
                stack.push((c, 0));
                self.depth[c.index()] = self.depth[u.index()] + 1;
                self.visit(c, &mut timer);
            } else {
                self.tout[u.index()] = timer;
                timer += 1;
                self.postorder.push(u);
                stack.pop();
                if let Some(&(p, _)) = stack.last() {
                    self.euler.push(p);
                }
            }
        }
        if self.preorder.len() != n {
            return Err(Error::InvalidTree(
                "tree is not connected: some nodes are unreachable from the root".into(),
            ));
        }

        // Sparse table of depth minima over the Euler tour for O(1) LCA.
        let m = self.euler.len();
        let levels = usize::BITS as usize - (m.max(1)).leading_zeros() as usize;
        let mut sparse: Vec<Vec<u32>> = Vec::with_capacity(levels);
        sparse.push((0..m as u32).collect());
        let mut k = 1;
        while (1 << k) <= m {
            let half = 1 << (k - 1);
            let prev = &sparse[k - 1];
            let mut row = Vec::with_capacity(m - (1 << k) + 1);
            for i in 0..=(m - (1 << k)) {
                let a = prev[i];
                let b = prev[i + half];
                row.push(if self.euler_depth(a) <= self.euler_depth(b) { a } else { b });
            }
            sparse.push(row);
            k += 1;
        }
        self.sparse = sparse;

        // Clades, bottom-up.
        let universe = self.taxa.len();
        self.clades = vec![TaxonSet::empty(universe); n];
        for idx in 0..self.postorder.len() {
            let v = self.postorder[idx];
            let mut clade = TaxonSet::empty(universe);
            if let Some(t) = self.leaf_taxon[v.index()] {
                clade.insert(t);
            }
            for c in &self.children[v.index()] {
                clade = clade.union(&self.clades[c.index()]);
            }
            self.clades[v.index()] = clade;
        }
        Ok(())
    }

    fn visit(&mut self, v: NodeId, timer: &mut u32) {
        self.tin[v.index()] = *timer;
        *timer += 1;
        self.preorder.push(v);
        if self.first_occ[v.index()] == u32::MAX {
            self.first_occ[v.index()] = self.euler.len() as u32;
        }
        self.euler.push(v);
    }

    fn euler_depth(&self, idx: u32) -> u32 {
        self.depth[self.euler[idx as usize].index()]
    }

    pub fn taxa(&self) -> &Arc<Taxa> {
        &self.taxa
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.parent.len() as u32).map(NodeId)
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v.index()]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v.index()]
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.children[v.index()].is_empty()
    }

    pub fn leaf_taxon(&self, v: NodeId) -> Option<TaxonId> {
        self.leaf_taxon[v.index()]
    }

    /// The leaf carrying `taxon`, if it appears in this tree.
    pub fn leaf_of(&self, taxon: TaxonId) -> Option<NodeId> {
        self.taxon_leaf[taxon.index()]
    }

    pub fn depth(&self, v: NodeId) -> u32 {
        self.depth[v.index()]
    }

    /// Nodes in preorder (parents before children).
    pub fn preorder(&self) -> &[NodeId] {
        &self.preorder
    }

    /// Nodes in postorder (children before parents).
    pub fn postorder(&self) -> &[NodeId] {
        &self.postorder
    }

    /// Ancestor-or-self test in O(1).
    pub fn is_ancestor(&self, u: NodeId, v: NodeId) -> bool {
        self.tin[u.index()] <= self.tin[v.index()] && self.tout[v.index()] <= self.tout[u.index()]
    }

    /// Strict ancestor test.
    pub fn is_strict_ancestor(&self, u: NodeId, v: NodeId) -> bool {
        u != v && self.is_ancestor(u, v)
    }

    /// Neither node is an ancestor of the other.
    pub fn incomparable(&self, u: NodeId, v: NodeId) -> bool {
        !self.is_ancestor(u, v) && !self.is_ancestor(v, u)
    }

    /// Lowest common ancestor in O(1).
    pub fn lca(&self, u: NodeId, v: NodeId) -> NodeId {
        let mut l = self.first_occ[u.index()];
        let mut r = self.first_occ[v.index()];
        if l > r {
            std::mem::swap(&mut l, &mut r);
        }
        let span = (r - l + 1) as usize;
        let k = usize::BITS as usize - 1 - span.leading_zeros() as usize;
        let a = self.sparse[k][l as usize];
        let b = self.sparse[k][r as usize + 1 - (1 << k)];
        let best = if self.euler_depth(a) <= self.euler_depth(b) { a } else { b };
        self.euler[best as usize]
    }

    /// The set of taxa below (or at) `v`.
    pub fn clade(&self, v: NodeId) -> &TaxonSet {
        &self.clades[v.index()]
    }

    pub fn clade_size(&self, v: NodeId) -> usize {
        self.clades[v.index()].len()
    }

    /// Leaf nodes below (or at) `v`, in depth-first order.
    pub fn clade_leaves(&self, v: NodeId) -> Vec<NodeId> {
        let mut leaves = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            if self.is_leaf(u) {
                leaves.push(u);
            } else {
                for c in self.children[u.index()].iter().rev() {
                    stack.push(*c);
                }
            }
        }
        leaves
    }

    /// True when no node has exactly one child.
    pub fn is_subdivision_free(&self) -> bool {
        self.children.iter().all(|c| c.len() != 1)
    }

    /// Places one new node on every edge.
    ///
    /// Original nodes keep their ids; the node subdividing the parent edge of
    /// `v` gets id `n + r`, where `n` is the old node count and `r` is the
    /// preorder rank of `v` among non-root nodes. Returns the subdivided tree
    /// and the map from old edges `(parent, child)` to the inserted node.
    pub fn subdivide_all_edges(&self) -> (Tree, HashMap<(NodeId, NodeId), NodeId>) {
        let n = self.node_count();
        let total = n + n.saturating_sub(1);
        let mut sub_of: Vec<Option<NodeId>> = vec![None; n];
        let mut rank = 0u32;
        for &v in &self.preorder {
            if v != self.root {
                sub_of[v.index()] = Some(NodeId((n as u32) + rank));
                rank += 1;
            }
        }

        let mut parent: Vec<Option<NodeId>> = vec![None; total];
        let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); total];
        let mut leaf_taxon: Vec<Option<TaxonId>> = vec![None; total];
        let mut map = HashMap::new();
        for v in self.nodes() {
            leaf_taxon[v.index()] = self.leaf_taxon[v.index()];
            children[v.index()] = self.children[v.index()]
                .iter()
                .map(|c| sub_of[c.index()].unwrap())
                .collect();
            if let Some(s) = sub_of[v.index()] {
                let p = self.parent[v.index()].unwrap();
                parent[v.index()] = Some(s);
                parent[s.index()] = Some(p);
                children[s.index()] = vec![v];
                map.insert((p, v), s);
            }
        }
        let tree = Tree::from_parts(self.taxa.clone(), self.root, parent, children, leaf_taxon)
            .expect("subdividing a valid tree yields a valid tree");
        (tree, map)
    }

    /// Removes unary nodes by splicing them out, except those `keep` retains.
    ///
    /// Surviving nodes are renumbered in ascending old-id order. Returns the
    /// new tree and the old-to-new id mapping (`None` for removed nodes).
    pub fn suppress_subdivision_nodes_where<F>(&self, keep: F) -> (Tree, Vec<Option<NodeId>>)
    where
        F: Fn(NodeId) -> bool,
    {
        let n = self.node_count();
        // Where a suppressed node's subtree re-attaches: the first descendant
        // that survives. Postorder guarantees children are resolved first.
        let mut splice_to: Vec<NodeId> = (0..n as u32).map(NodeId).collect();
        let mut removed = vec![false; n];
        for &v in &self.postorder {
            if self.children[v.index()].len() == 1 && !keep(v) {
                removed[v.index()] = true;
                let child = self.children[v.index()][0];
                splice_to[v.index()] = splice_to[child.index()];
            }
        }

        let mut old_to_new: Vec<Option<NodeId>> = vec![None; n];
        let mut next = 0u32;
        for i in 0..n {
            if !removed[i] {
                old_to_new[i] = Some(NodeId(next));
                next += 1;
            }
        }
        let total = next as usize;
        let new_root = old_to_new[splice_to[self.root.index()].index()].unwrap();
        let mut parent: Vec<Option<NodeId>> = vec![None; total];
        let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); total];
        let mut leaf_taxon: Vec<Option<TaxonId>> = vec![None; total];
        for i in 0..n {
            let Some(new_id) = old_to_new[i] else { continue };
            leaf_taxon[new_id.index()] = self.leaf_taxon[i];
            for c in &self.children[i] {
                let target = old_to_new[splice_to[c.index()].index()].unwrap();
                children[new_id.index()].push(target);
                parent[target.index()] = Some(new_id);
            }
        }
        let tree = Tree::from_parts(self.taxa.clone(), new_root, parent, children, leaf_taxon)
            .expect("suppressing subdivision nodes yields a valid tree");
        (tree, old_to_new)
    }

    /// Removes every unary node.
    pub fn suppress_subdivision_nodes(&self) -> Tree {
        self.suppress_subdivision_nodes_where(|_| false).0
    }

    /// The nested shape of this tree (children in stored order).
    pub fn to_shape(&self) -> Shape {
        // Build shapes bottom-up so deep trees cannot overflow the stack.
        let mut shapes: Vec<Option<Shape>> = vec![None; self.node_count()];
        for &v in &self.postorder {
            let shape = if let Some(t) = self.leaf_taxon[v.index()] {
                Shape::Leaf(t)
            } else {
                Shape::Node(
                    self.children[v.index()]
                        .iter()
                        .map(|c| shapes[c.index()].take().unwrap())
                        .collect(),
                )
            };
            shapes[v.index()] = Some(shape);
        }
        shapes[self.root.index()].take().unwrap()
    }
}

impl PartialEq for Tree {
    /// Structural equality: same numbering, links, child order, and leaf taxa.
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
            && self.parent == other.parent
            && self.children == other.children
            && self.leaf_taxon == other.leaf_taxon
    }
}

impl Eq for Tree {}
