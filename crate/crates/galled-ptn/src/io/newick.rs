//! Newick reading and writing: `(((a,b),(c,d)),(e,f));`. Branch lengths and
//! internal node labels are accepted on input and discarded — the model is
//! purely topological.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Shape, Taxa, Tree};

fn is_label_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'.' || b == b'-'
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Parser<'a> {
        Parser { bytes: input.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::NewickParse { offset: self.pos, message: message.into() }
    }

    fn label(&mut self) -> Result<&'a str> {
        let start = self.pos;
        while self.pos < self.bytes.len() && is_label_byte(self.bytes[self.pos]) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected a taxon label"));
        }
        Ok(std::str::from_utf8(&self.bytes[start..self.pos]).expect("label bytes are ASCII"))
    }

    /// Consumes and discards an optional `:<length>` suffix.
    fn skip_branch_length(&mut self) -> Result<()> {
        self.skip_ws();
        if self.peek() != Some(b':') {
            return Ok(());
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-'))
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected a branch length after ':'"));
        }
        Ok(())
    }

    /// Consumes and discards an optional internal node label.
    fn skip_internal_label(&mut self) {
        self.skip_ws();
        while self.peek().is_some_and(is_label_byte) {
            self.pos += 1;
        }
    }

    /// Parses one tree; labels are handed to `leaf` to become taxa.
    fn parse(&mut self, mut leaf: impl FnMut(&str) -> Result<Shape>) -> Result<Shape> {
        let mut stack: Vec<Vec<Shape>> = Vec::new();
        'subtree: loop {
            self.skip_ws();
            let mut current = match self.peek() {
                Some(b'(') => {
                    self.pos += 1;
                    stack.push(Vec::new());
                    continue 'subtree;
                }
                Some(b) if is_label_byte(b) => {
                    let name = self.label()?;
                    let shape = leaf(name)?;
                    self.skip_branch_length()?;
                    shape
                }
                _ => return Err(self.error("expected '(' or a taxon label")),
            };
            loop {
                self.skip_ws();
                match self.peek() {
                    Some(b',') => {
                        self.pos += 1;
                        stack
                            .last_mut()
                            .ok_or_else(|| self.error("',' outside parentheses"))?
                            .push(current);
                        continue 'subtree;
                    }
                    Some(b')') => {
                        let mut kids = stack.pop().ok_or_else(|| self.error("unmatched ')'"))?;
                        kids.push(current);
                        if kids.len() < 2 {
                            return Err(self.error("an internal node needs at least two children"));
                        }
                        self.pos += 1;
                        self.skip_internal_label();
                        self.skip_branch_length()?;
                        current = Shape::Node(kids);
                    }
                    Some(b';') => {
                        if !stack.is_empty() {
                            return Err(self.error("unmatched '('"));
                        }
                        self.pos += 1;
                        self.skip_ws();
                        if self.pos != self.bytes.len() {
                            return Err(self.error("content after the closing ';'"));
                        }
                        return Ok(current);
                    }
                    _ => return Err(self.error("expected ',', ')' or ';'")),
                }
            }
        }
    }
}

/// Parses a newick tree, registering taxa in order of first appearance.
pub fn parse_newick(input: &str) -> Result<Tree> {
    let mut parser = Parser::new(input);
    let mut taxa = Taxa::new();
    let shape = parser.parse(|name| Ok(Shape::Leaf(taxa.insert(name)?)))?;
    Tree::from_shape(Arc::new(taxa), &shape)
}

/// Parses a newick tree whose labels must already exist in `taxa`.
pub fn parse_newick_with_taxa(input: &str, taxa: &Arc<Taxa>) -> Result<Tree> {
    let mut parser = Parser::new(input);
    let shape = parser.parse(|name| Ok(Shape::Leaf(taxa.require(name)?)))?;
    Tree::from_shape(taxa.clone(), &shape)
}

/// Writes a tree as newick, children in stored order, no trailing newline.
/// Trees with subdivision nodes have no newick form and are refused.
pub fn write_newick(tree: &Tree) -> Result<String> {
    if !tree.is_subdivision_free() {
        return Err(Error::InvalidTree(
            "a tree with subdivision nodes cannot be written as newick".into(),
        ));
    }
    enum Step {
        Visit(crate::model::NodeId),
        Text(&'static str),
    }
    let mut out = String::new();
    let mut stack = vec![Step::Visit(tree.root())];
    while let Some(step) = stack.pop() {
        match step {
            Step::Text(t) => out.push_str(t),
            Step::Visit(v) => {
                if let Some(t) = tree.leaf_taxon(v) {
                    out.push_str(tree.taxa().name(t));
                } else {
                    out.push('(');
                    stack.push(Step::Text(")"));
                    for (i, c) in tree.children(v).iter().enumerate().rev() {
                        stack.push(Step::Visit(*c));
                        if i > 0 {
                            stack.push(Step::Text(","));
                        }
                    }
                }
            }
        }
    }
    out.push(';');
    Ok(out)
}
