use std::sync::Arc;

use crate::error::{Error, Result};

use super::taxa::Taxa;
use super::tree::{NodeId, Tree};

/// Rooted LGT network: a support tree plus directed transfer edges.
///
/// Transfer edges run between unary support nodes (subdivision points on the
/// underlying tree edges) with incomparable endpoints, and the combined graph
/// of support and transfer edges must stay acyclic. The transfer list keeps
/// its construction order; algorithms that report witness edges refer to
/// positions in this list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LgtNetwork {
    support: Tree,
    transfers: Vec<(NodeId, NodeId)>,
}

impl LgtNetwork {
    /// Builds a network over `support`, validating every transfer edge.
    pub fn new(support: Tree, transfers: Vec<(NodeId, NodeId)>) -> Result<LgtNetwork> {
        let n = support.node_count();
        let mut seen = std::collections::HashSet::new();
        for &(u, v) in &transfers {
            if u.index() >= n || v.index() >= n {
                return Err(Error::InvalidNetwork(format!(
                    "transfer ({}, {}) references a node outside the support tree",
                    u.0, v.0
                )));
            }
            if !seen.insert((u, v)) {
                return Err(Error::InvalidNetwork(format!("duplicate transfer ({}, {})", u.0, v.0)));
            }
            if !support.incomparable(u, v) {
                return Err(Error::InvalidNetwork(format!(
                    "transfer ({}, {}) joins comparable nodes",
                    u.0, v.0
                )));
            }
            for x in [u, v] {
                if support.children(x).len() != 1 {
                    return Err(Error::InvalidNetwork(format!(
                        "transfer endpoint {} is not a subdivision node",
                        x.0
                    )));
                }
            }
        }

        let network = LgtNetwork { support, transfers };
        if network.has_directed_cycle() {
            return Err(Error::InvalidNetwork(
                "support and transfer edges together form a directed cycle".into(),
            ));
        }
        Ok(network)
    }

    /// Kahn's algorithm over support plus transfer edges.
    fn has_directed_cycle(&self) -> bool {
        let n = self.support.node_count();
        let mut indegree = vec![0usize; n];
        for v in self.support.nodes() {
            if self.support.parent(v).is_some() {
                indegree[v.index()] += 1;
            }
        }
        for &(_, v) in &self.transfers {
            indegree[v.index()] += 1;
        }
        let mut queue: Vec<NodeId> = self
            .support
            .nodes()
            .filter(|v| indegree[v.index()] == 0)
            .collect();
        let mut processed = 0;
        while let Some(u) = queue.pop() {
            processed += 1;
            for &c in self.support.children(u) {
                indegree[c.index()] -= 1;
                if indegree[c.index()] == 0 {
                    queue.push(c);
                }
            }
            for &(d, r) in &self.transfers {
                if d == u {
                    indegree[r.index()] -= 1;
                    if indegree[r.index()] == 0 {
                        queue.push(r);
                    }
                }
            }
        }
        processed != n
    }

    pub fn support(&self) -> &Tree {
        &self.support
    }

    pub fn transfers(&self) -> &[(NodeId, NodeId)] {
        &self.transfers
    }

    pub fn taxa(&self) -> &Arc<Taxa> {
        self.support.taxa()
    }

    pub fn node_count(&self) -> usize {
        self.support.node_count()
    }

    /// Number of transfer edges incident to `v` (either direction).
    pub fn transfer_degree(&self, v: NodeId) -> usize {
        self.transfers.iter().filter(|&&(u, w)| u == v || w == v).count()
    }

    /// Successor lists over support and transfer edges combined.
    pub fn successors(&self) -> Vec<Vec<NodeId>> {
        let mut succ: Vec<Vec<NodeId>> = self
            .support
            .nodes()
            .map(|v| self.support.children(v).to_vec())
            .collect();
        for &(d, r) in &self.transfers {
            succ[d.index()].push(r);
        }
        succ
    }

    /// A topological order of the combined graph (it is validated acyclic).
    pub fn topological_order(&self) -> Vec<NodeId> {
        let succ = self.successors();
        let n = self.support.node_count();
        let mut indegree = vec![0usize; n];
        for list in &succ {
            for v in list {
                indegree[v.index()] += 1;
            }
        }
        let mut queue: Vec<NodeId> = self
            .support
            .nodes()
            .filter(|v| indegree[v.index()] == 0)
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = queue.pop() {
            order.push(u);
            for &v in &succ[u.index()] {
                indegree[v.index()] -= 1;
                if indegree[v.index()] == 0 {
                    queue.push(v);
                }
            }
        }
        debug_assert_eq!(order.len(), n);
        order
    }

    /// True when no two distinct underlying cycles share a support node.
    ///
    /// Equivalently: every node lies on at most one transfer cycle. This is
    /// strictly stronger than limiting each biconnected component to one
    /// transfer edge — two cycles meeting in a single cut node form separate
    /// biconnected components but still disqualify the network.
    pub fn is_galled(&self) -> bool {
        cycle_coverage(&self.support, &self.transfers)
            .into_iter()
            .all(|c| c <= 1)
    }

    /// A witness for a non-galled network: positions (in the transfer list)
    /// of the first two transfers whose cycles share a node. Returns `None`
    /// when the network is galled.
    pub fn find_intersecting_cycles(&self) -> Option<(usize, usize)> {
        intersecting_cycles(&self.support, &self.transfers)
    }

    /// Splices out unary support nodes that no transfer edge touches and
    /// renumbers the survivors in ascending old-id order.
    pub fn suppressed(&self) -> LgtNetwork {
        let mut incident = vec![false; self.support.node_count()];
        for &(u, v) in &self.transfers {
            incident[u.index()] = true;
            incident[v.index()] = true;
        }
        let (tree, old_to_new) = self
            .support
            .suppress_subdivision_nodes_where(|v| incident[v.index()]);
        let transfers = self
            .transfers
            .iter()
            .map(|&(u, v)| {
                (
                    old_to_new[u.index()].expect("transfer endpoints survive suppression"),
                    old_to_new[v.index()].expect("transfer endpoints survive suppression"),
                )
            })
            .collect();
        LgtNetwork::new(tree, transfers)
            .expect("suppression preserves network validity")
    }
}

/// How many transfer cycles pass through each node of `support`.
///
/// The underlying cycle of a transfer edge `(u, v)` consists of the edge
/// itself plus the support path from `u` over `lca(u, v)` down to `v`.
/// Counts come from a difference array: +1 at each endpoint, -1 at the lca
/// and its parent, then subtree sums. This works on any candidate edge list
/// with incomparable endpoints — the edges do not have to form a valid
/// network yet.
pub fn cycle_coverage(support: &Tree, transfers: &[(NodeId, NodeId)]) -> Vec<i32> {
    let n = support.node_count();
    let mut diff = vec![0i32; n];
    for &(u, v) in transfers {
        let l = support.lca(u, v);
        diff[u.index()] += 1;
        diff[v.index()] += 1;
        diff[l.index()] -= 1;
        if let Some(p) = support.parent(l) {
            diff[p.index()] -= 1;
        }
    }
    for &v in support.postorder() {
        if let Some(p) = support.parent(v) {
            diff[p.index()] += diff[v.index()];
        }
    }
    diff
}

/// Positions of the first two transfers whose underlying cycles share a
/// node, or `None` when all cycles are node-disjoint.
pub fn intersecting_cycles(support: &Tree, transfers: &[(NodeId, NodeId)]) -> Option<(usize, usize)> {
    let coverage = cycle_coverage(support, transfers);
    let pinch = (0..coverage.len()).find(|&i| coverage[i] >= 2).map(|i| NodeId(i as u32))?;
    let mut hits = (0..transfers.len()).filter(|&i| {
        let (u, v) = transfers[i];
        let l = support.lca(u, v);
        support.is_ancestor(l, pinch)
            && (support.is_ancestor(pinch, u) || support.is_ancestor(pinch, v))
    });
    let first = hits.next().expect("coverage >= 2 implies two covering transfers");
    let second = hits.next().expect("coverage >= 2 implies two covering transfers");
    Some((first, second))
}
