//! The `treetext v1` format.
//!
//! ```text
//! treetext v1
//! -
//! 0
//! ```
//!
//! Line one is the header, every further line one node (`-` for the root),
//! lines sorted by length and then by the numeric value of the bit string,
//! and the text ends with a newline.

use crate::tree::{BinaryTree, NodePath, TreeError, MAX_DEPTH};

pub const HEADER: &str = "treetext v1";

pub fn emit(tree: &BinaryTree) -> String {
    let mut out = String::with_capacity(HEADER.len() + 1 + tree.len() * 8);
    out.push_str(HEADER);
    out.push('\n');
    for u in tree.iter() {
        out.push_str(&u.to_string());
        out.push('\n');
    }
    out
}

pub fn parse(text: &str) -> Result<BinaryTree, TreeError> {
    let format = |line: usize, message: &str| TreeError::Format {
        line,
        message: message.to_string(),
    };
    if !text.ends_with('\n') {
        let last = text.lines().count().max(1);
        return Err(format(last, "missing trailing newline"));
    }
    let mut lines = text[..text.len() - 1].split('\n');
    match lines.next() {
        Some(HEADER) => {}
        _ => return Err(format(1, "expected header \"treetext v1\"")),
    }
    let mut nodes: Vec<NodePath> = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let u = NodePath::parse(line).ok_or_else(|| format(lineno, "not a node"))?;
        if u.depth() > MAX_DEPTH {
            return Err(TreeError::DepthExceeded(u.depth()));
        }
        if let Some(prev) = nodes.last() {
            if *prev >= u {
                return Err(format(lineno, "nodes out of canonical order"));
            }
        }
        nodes.push(u);
    }
    BinaryTree::validate(nodes)
}
