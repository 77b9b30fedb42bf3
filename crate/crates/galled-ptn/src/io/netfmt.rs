//! A line-oriented text format for LGT networks that preserves node
//! numbering, child order, and transfer order exactly:
//!
//! ```text
//! taxa: a b c
//! node 0
//! node 1
//! node 2 a
//! node 3 b
//! node 4 c
//! sedge 0 1
//! sedge 0 4
//! sedge 1 2
//! sedge 1 3
//! tedge 2 4
//! origin C1 1
//! ```
//!
//! `node` lines declare ids in ascending order, leaves carrying their taxon
//! label; `sedge` lines are support edges parent-first, in child order;
//! `tedge` lines are transfers, donor-first, in network order; `origin`
//! lines are optional per-character annotations and do not affect parsing.
//! The writer emits exactly this layout, so write-parse-write is
//! byte-stable; the parser additionally skips blank lines and `#` comments.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{LgtNetwork, NodeId, Taxa, TaxonId, Tree};

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::NetworkFormat { line, message: message.into() }
}

fn parse_index(token: &str, line: usize) -> Result<usize> {
    token.parse().map_err(|_| err(line, format!("`{token}` is not a node id")))
}

/// Parses the network format; `origin` annotation lines are checked for
/// shape and otherwise ignored.
pub fn parse_network(input: &str) -> Result<LgtNetwork> {
    let mut taxa: Option<Arc<Taxa>> = None;
    let mut labels: Vec<(Option<String>, usize)> = Vec::new();
    let mut sedges: Vec<(usize, usize, usize)> = Vec::new();
    let mut tedges: Vec<(usize, usize, usize)> = Vec::new();
    let mut origins: Vec<(usize, usize)> = Vec::new();

    for (idx, raw) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().expect("non-empty line has a first token");
        match keyword {
            "taxa:" => {
                if taxa.is_some() {
                    return Err(err(lineno, "second `taxa:` line"));
                }
                let mut t = Taxa::new();
                for label in tokens {
                    t.insert(label)?;
                }
                taxa = Some(Arc::new(t));
            }
            "node" => {
                let token = tokens.next().ok_or_else(|| err(lineno, "missing node id"))?;
                let id = parse_index(token, lineno)?;
                if id != labels.len() {
                    return Err(err(
                        lineno,
                        format!("expected node {} but found node {id}", labels.len()),
                    ));
                }
                let label = tokens.next().map(str::to_string);
                if tokens.next().is_some() {
                    return Err(err(lineno, "a node line is `node <id>` or `node <id> <taxon>`"));
                }
                labels.push((label, lineno));
            }
            "sedge" | "tedge" => {
                let u = tokens.next().ok_or_else(|| err(lineno, "missing parent id"))?;
                let v = tokens.next().ok_or_else(|| err(lineno, "missing child id"))?;
                if tokens.next().is_some() {
                    return Err(err(lineno, "an edge has exactly two endpoints"));
                }
                let rec = (parse_index(u, lineno)?, parse_index(v, lineno)?, lineno);
                if keyword == "sedge" {
                    sedges.push(rec);
                } else {
                    tedges.push(rec);
                }
            }
            "origin" => {
                let _name = tokens.next().ok_or_else(|| err(lineno, "missing character name"))?;
                let node = tokens.next().ok_or_else(|| err(lineno, "missing origin node id"))?;
                if tokens.next().is_some() {
                    return Err(err(lineno, "an origin line is `origin <character> <node>`"));
                }
                origins.push((parse_index(node, lineno)?, lineno));
            }
            other => return Err(err(lineno, format!("unknown keyword `{other}`"))),
        }
    }

    let taxa = taxa.ok_or_else(|| err(1, "missing `taxa:` line"))?;
    let n = labels.len();
    if n == 0 {
        return Err(err(1, "no `node` lines"));
    }
    let mut leaf_taxon: Vec<Option<TaxonId>> = Vec::with_capacity(n);
    for (label, lineno) in &labels {
        leaf_taxon.push(match label {
            Some(l) => Some(taxa.require(l).map_err(|_| {
                err(*lineno, format!("taxon `{l}` is not in the `taxa:` line"))
            })?),
            None => None,
        });
    }
    let check = |i: usize, lineno: usize| -> Result<NodeId> {
        if i >= n {
            return Err(err(lineno, format!("node id {i} is out of range")));
        }
        Ok(NodeId(i as u32))
    };
    let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    for &(u, v, lineno) in &sedges {
        let (u, v) = (check(u, lineno)?, check(v, lineno)?);
        if parent[v.index()].is_some() {
            return Err(err(lineno, format!("node {} has two parents", v.0)));
        }
        parent[v.index()] = Some(u);
        children[u.index()].push(v);
    }
    let mut roots = (0..n).filter(|&i| parent[i].is_none());
    let root = NodeId(roots.next().ok_or_else(|| err(1, "every node has a parent"))? as u32);
    if let Some(extra) = roots.next() {
        return Err(err(
            labels[extra].1,
            format!("nodes {} and {extra} both lack a parent", root.0),
        ));
    }
    let mut transfers = Vec::with_capacity(tedges.len());
    for &(u, v, lineno) in &tedges {
        transfers.push((check(u, lineno)?, check(v, lineno)?));
    }
    for &(node, lineno) in &origins {
        check(node, lineno)?;
    }
    let support = Tree::from_parts(taxa, root, parent, children, leaf_taxon)?;
    LgtNetwork::new(support, transfers)
}

/// Writes the network format with per-character origin annotations appended;
/// output ends with a newline.
pub fn export_network(net: &LgtNetwork, origins: &[(String, NodeId)]) -> String {
    let tree = net.support();
    let taxa = tree.taxa();
    let mut out = String::new();
    out.push_str("taxa:");
    for label in taxa.labels() {
        out.push(' ');
        out.push_str(label);
    }
    out.push('\n');
    for v in tree.nodes() {
        match tree.leaf_taxon(v) {
            Some(t) => out.push_str(&format!("node {} {}\n", v.0, taxa.name(t))),
            None => out.push_str(&format!("node {}\n", v.0)),
        }
    }
    for v in tree.nodes() {
        for c in tree.children(v) {
            out.push_str(&format!("sedge {} {}\n", v.0, c.0));
        }
    }
    for &(d, r) in net.transfers() {
        out.push_str(&format!("tedge {} {}\n", d.0, r.0));
    }
    for (name, node) in origins {
        out.push_str(&format!("origin {} {}\n", name, node.0));
    }
    out
}

/// Writes the network format without annotations.
pub fn write_network(net: &LgtNetwork) -> String {
    export_network(net, &[])
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders a network for Graphviz: support edges solid, transfers dashed,
/// origins appended to their node's label.
pub fn network_to_dot(net: &LgtNetwork, origins: &[(String, NodeId)]) -> String {
    let tree = net.support();
    let taxa = tree.taxa();
    let mut out = String::from("digraph network {\n  rankdir=TB;\n");
    for v in tree.nodes() {
        let mut label = match tree.leaf_taxon(v) {
            Some(t) => taxa.name(t).to_string(),
            None => String::new(),
        };
        for (name, node) in origins {
            if *node == v {
                if !label.is_empty() {
                    label.push_str("\\n");
                }
                label.push_str(&dot_escape(name));
            }
        }
        if tree.leaf_taxon(v).is_some() {
            out.push_str(&format!("  n{} [label=\"{}\" shape=box];\n", v.0, label));
        } else if label.is_empty() {
            out.push_str(&format!("  n{} [shape=point];\n", v.0));
        } else {
            out.push_str(&format!("  n{} [label=\"{}\" shape=ellipse];\n", v.0, label));
        }
    }
    for v in tree.nodes() {
        for c in tree.children(v) {
            out.push_str(&format!("  n{} -> n{};\n", v.0, c.0));
        }
    }
    for &(d, r) in net.transfers() {
        out.push_str(&format!("  n{} -> n{} [style=dashed constraint=false];\n", d.0, r.0));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> LgtNetwork {
        let tree = crate::io::newick::parse_newick("(((a,b),(c,d)),(e,f));").unwrap();
        let (sub, _) = tree.subdivide_all_edges();
        LgtNetwork::new(sub, vec![(NodeId(15), NodeId(19))]).unwrap()
    }

    #[test]
    fn write_parse_write_is_byte_stable() {
        let net = sample();
        let text = write_network(&net);
        let parsed = parse_network(&text).unwrap();
        assert_eq!(parsed, net);
        assert_eq!(write_network(&parsed), text);
    }

    #[test]
    fn comments_blanks_and_origins_are_skipped() {
        let net = sample();
        let with_extras = format!(
            "# generated\n\n{}",
            export_network(&net, &[("C1".into(), NodeId(15))])
        );
        assert_eq!(parse_network(&with_extras).unwrap(), net);
    }

    #[test]
    fn suppressed_networks_round_trip() {
        let net = sample().suppressed();
        let text = write_network(&net);
        assert_eq!(parse_network(&text).unwrap(), net);
    }

    #[test]
    fn format_errors_carry_line_numbers() {
        let cases = [
            // second declaration of node 0
            ("taxa: a\nnode 0 a\nnode 0 a\n", 3),
            // sedge to an id that is never declared
            ("taxa: a b\nnode 0\nnode 1 a\nnode 2 b\nsedge 0 1\nsedge 0 3\n", 6),
            // unknown keyword
            ("taxa: a\nnode 0 a\nblob 0\n", 3),
            // two parents
            ("taxa: a b\nnode 0\nnode 1 a\nnode 2 b\nsedge 0 1\nsedge 0 2\nsedge 1 2\n", 7),
            // label not in the registry
            ("taxa: a\nnode 0 b\n", 2),
            // a second root
            ("taxa: a b\nnode 0\nnode 1 a\nnode 2 b\nsedge 0 1\n", 4),
            // missing taxa line
            ("node 0 a\n", 1),
        ];
        for (text, line) in cases {
            match parse_network(text) {
                Err(Error::NetworkFormat { line: at, .. }) => {
                    assert_eq!(at, line, "for {text:?}")
                }
                other => panic!("expected a format error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn invalid_transfers_are_rejected_at_validation() {
        // Comparable endpoints pass the parser but fail network validation.
        let text = "taxa: a b\nnode 0\nnode 1 a\nnode 2 b\nnode 3\nnode 4\n\
                    sedge 0 3\nsedge 0 4\nsedge 3 1\nsedge 4 2\ntedge 3 1\n";
        assert!(matches!(parse_network(text), Err(Error::InvalidNetwork(_))));
    }

    #[test]
    fn dot_output_mentions_every_edge_and_origin() {
        let net = sample();
        let dot = network_to_dot(&net, &[("C2".into(), NodeId(15))]);
        assert!(dot.contains("n15 -> n19 [style=dashed"));
        assert!(dot.contains("n2 -> n13;"));
        assert!(dot.contains("[label=\"a\""));
        assert!(dot.contains("n15 [label=\"C2\" shape=ellipse]"));
    }
}
