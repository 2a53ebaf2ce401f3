//! Newick reading and writing.
//!
//! Supports unquoted labels, single-quoted labels (with `''` as an escaped
//! quote), internal node labels, `:length` suffixes, `[...]` comments and
//! arbitrary arity. Labels are kept byte-for-byte.

use std::path::Path;

use super::{nfc, IngestError};
use crate::scalar::Scalar;
use crate::tree::{NodeId, PhyloTree};

pub fn parse_newick_file<T: Scalar>(path: &Path) -> Result<PhyloTree<T>, IngestError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
    parse_newick(&text).map_err(|e| e.in_file(path))
}

pub fn parse_newick<T: Scalar>(text: &str) -> Result<PhyloTree<T>, IngestError> {
    let mut p = Parser { src: text.as_bytes(), text, pos: 0 };
    p.skip_ws();
    if p.at_end() {
        return Err(IngestError::Format("empty Newick input".into()));
    }
    let mut tree = PhyloTree::with_root(None);
    let root = tree.root();
    p.subtree(&mut tree, root)?;
    p.skip_ws();
    match p.peek() {
        Some(b';') => p.pos += 1,
        Some(b')') => return Err(p.err("unbalanced parentheses: unexpected ')'")),
        Some(_) => return Err(p.err("expected ';'")),
        None => return Err(p.err("missing terminating ';'")),
    }
    p.skip_ws();
    if !p.at_end() {
        return Err(p.err("trailing content after ';'"));
    }
    tree.validate().map_err(|e| IngestError::Format(e.to_string()))?;
    Ok(tree)
}

struct Parser<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> IngestError {
        IngestError::Format(format!("Newick offset {}: {msg}", self.pos))
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => self.pos += 1,
                Some(b'[') => {
                    while let Some(c) = self.peek() {
                        self.pos += 1;
                        if c == b']' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
    }

    /// Parses one subtree into the (already created) node `id`.
    fn subtree<T: Scalar>(&mut self, tree: &mut PhyloTree<T>, id: NodeId) -> Result<(), IngestError> {
        self.skip_ws();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                let child = tree.add_child(id, None, None);
                self.subtree(tree, child)?;
                self.skip_ws();
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    None | Some(b';') => return Err(self.err("unbalanced parentheses: missing ')'")),
                    Some(_) => return Err(self.err("expected ',' or ')'")),
                }
            }
        }
        self.skip_ws();
        let label = self.label()?;
        tree.node_mut(id).label = label.map(|l| nfc(&l));
        self.skip_ws();
        if self.peek() == Some(b':') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while let Some(c) = self.peek() {
                if matches!(c, b',' | b')' | b'(' | b';' | b'[') || c.is_ascii_whitespace() {
                    break;
                }
                self.pos += 1;
            }
            let tok = &self.text[start..self.pos];
            let len: T = tok.parse().map_err(|_| self.err(&format!("invalid branch length {tok:?}")))?;
            if !len.is_finite() || len < T::zero() {
                return Err(self.err(&format!("branch length {tok:?} must be finite and non-negative")));
            }
            tree.node_mut(id).length = Some(len);
        }
        Ok(())
    }

    fn label(&mut self) -> Result<Option<String>, IngestError> {
        if self.peek() == Some(b'\'') {
            self.pos += 1;
            let mut out = String::new();
            let mut start = self.pos;
            loop {
                match self.peek() {
                    None => return Err(self.err("unterminated quoted label")),
                    Some(b'\'') => {
                        out.push_str(&self.text[start..self.pos]);
                        self.pos += 1;
                        if self.peek() == Some(b'\'') {
                            out.push('\'');
                            self.pos += 1;
                            start = self.pos;
                        } else {
                            break;
                        }
                    }
                    Some(_) => self.pos += 1,
                }
            }
            return Ok(Some(out));
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if matches!(c, b',' | b')' | b'(' | b';' | b':' | b'[' | b'\'') || c.is_ascii_whitespace() {
                break;
            }
            self.pos += 1;
        }
        Ok((self.pos > start).then(|| self.text[start..self.pos].to_string()))
    }
}

/// Serializes a tree; labels are quoted when they contain Newick metacharacters.
pub fn to_newick<T: Scalar>(tree: &PhyloTree<T>) -> String {
    let mut out = String::new();
    write_node(tree, tree.root(), &mut out);
    out.push(';');
    out
}

fn write_node<T: Scalar>(tree: &PhyloTree<T>, id: NodeId, out: &mut String) {
    let n = tree.node(id);
    if !n.is_leaf() {
        out.push('(');
        for (i, &c) in n.children.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write_node(tree, c, out);
        }
        out.push(')');
    }
    if let Some(l) = &n.label {
        out.push_str(&quote_label(l));
    }
    if let Some(len) = n.length {
        out.push(':');
        out.push_str(&len.to_string());
    }
}

fn quote_label(label: &str) -> String {
    let needs = label.is_empty()
        || label.chars().any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '[' | ']' | '\'' | ':' | ';' | ','));
    if needs {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_string()
    }
}

impl<T: Scalar> PhyloTree<T> {
    pub fn to_newick(&self) -> String {
        to_newick(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Result<PhyloTree<f64>, IngestError> {
        parse_newick(s)
    }

    #[test]
    fn reads_multifurcating_root() {
        let t = p("(A,B,(C,D));").unwrap();
        let root = t.node(t.root());
        assert_eq!(root.children.len(), 3);
        let labels: Vec<_> = root.children.iter().map(|&c| t.node(c).label.clone()).collect();
        assert_eq!(labels, vec![Some("A".into()), Some("B".into()), None]);
        assert_eq!(t.node(root.children[2]).children.len(), 2);
    }

    #[test]
    fn quoted_labels_and_lengths() {
        let t = p("('Old Norse':1.5,Ice:2);").unwrap();
        let root = t.node(t.root());
        let a = t.node(root.children[0]);
        let b = t.node(root.children[1]);
        assert_eq!(a.label.as_deref(), Some("Old Norse"));
        assert_eq!(a.length, Some(1.5));
        assert_eq!(b.label.as_deref(), Some("Ice"));
        assert_eq!(b.length, Some(2.0));
    }

    #[test]
    fn quoted_label_with_parentheses_and_escaped_quote() {
        let t = p("('A (x)','O''Brien',C)root;").unwrap();
        assert_eq!(t.leaf_labels(), vec!["A (x)", "O'Brien", "C"]);
        assert_eq!(t.node(t.root()).label.as_deref(), Some("root"));
        let again = p(&t.to_newick()).unwrap();
        assert_eq!(again.leaf_labels(), t.leaf_labels());
    }

    #[test]
    fn labels_are_nfc_normalized() {
        let t = p("(e\u{301}a,b,c);").unwrap();
        assert_eq!(t.leaf_labels()[0], "\u{e9}a");
    }

    #[test]
    fn errors() {
        assert!(p("((A,B);").unwrap_err().to_string().contains("unbalanced"));
        assert!(p("(A,B));").unwrap_err().to_string().contains("unbalanced"));
        assert!(p("").unwrap_err().to_string().contains("empty"));
        assert!(p("   ").is_err());
        assert!(p("(A,A);").unwrap_err().to_string().contains("duplicate"));
        assert!(p("(A,B)").is_err());
        assert!(p("(A:x,B);").is_err());
        assert!(p("(A:-1,B);").is_err());
        assert!(p("(A,);").is_err());
    }

    #[test]
    fn comments_and_whitespace() {
        let t = p(" ( A [note] , B\n ) [root comment];").unwrap();
        assert_eq!(t.leaf_labels(), vec!["A", "B"]);
    }

    #[test]
    fn non_ascii_labels_are_byte_exact() {
        let t = p("('Ελληνικά',Azərbaycan,'日本語');").unwrap();
        assert_eq!(t.leaf_labels(), vec!["Ελληνικά", "Azərbaycan", "日本語"]);
    }
}
