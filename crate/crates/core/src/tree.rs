//! Finite rooted binary trees as prefix-closed sets of bit words.
//!
//! A node is the word `u = (u_1, ..., u_k)` describing the path from the
//! root (`0` = left, `1` = right); a tree is a finite set of such words
//! that contains the parent of each of its non-root members.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::dyadic::DyadicRational;

/// Hard bound on node depth. Everything deeper is rejected on input so
/// that dyadic exponents stay bounded.
pub const MAX_DEPTH: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("prefix violation: parent of node {0} is missing")]
    PrefixViolation(NodePath),
    #[error("operation requires a nonempty tree")]
    EmptyTree,
    #[error("node depth {0} exceeds the maximum depth {MAX_DEPTH}")]
    DepthExceeded(usize),
    #[error("node {0} is not an external node of the tree")]
    NotExternal(NodePath),
    #[error("format error on line {line}: {message}")]
    Format { line: usize, message: String },
}

/// A finite bit word, i.e. the address of a node.
///
/// Bits are packed most-significant first, 64 per word; unused trailing
/// bits are always zero, which makes the derived word comparison agree
/// with numeric comparison for words of equal length.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct NodePath {
    len: u32,
    words: Vec<u64>,
}

impl NodePath {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut p = Self::root();
        for b in bits {
            p.push(b);
        }
        p
    }

    /// Parse `"-"` (the root) or a nonempty string over `{0,1}`.
    pub fn parse(s: &str) -> Option<Self> {
        if s == "-" {
            return Some(Self::root());
        }
        if s.is_empty() {
            return None;
        }
        let mut p = Self::root();
        for c in s.chars() {
            match c {
                '0' => p.push(false),
                '1' => p.push(true),
                _ => return None,
            }
        }
        Some(p)
    }

    pub fn depth(&self) -> usize {
        self.len as usize
    }

    pub fn is_root(&self) -> bool {
        self.len == 0
    }

    /// Bit `i` (zero-based, so `bit(0)` is `u_1`).
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.depth(), "bit index {i} out of range");
        (self.words[i / 64] >> (63 - i % 64)) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.depth()).map(move |i| self.bit(i))
    }

    pub fn push(&mut self, bit: bool) {
        let i = self.len as usize;
        if i % 64 == 0 {
            self.words.push(0);
        }
        if bit {
            self.words[i / 64] |= 1 << (63 - i % 64);
        }
        self.len += 1;
    }

    pub fn pop(&mut self) -> Option<bool> {
        if self.len == 0 {
            return None;
        }
        let i = self.len as usize - 1;
        let b = self.bit(i);
        self.words[i / 64] &= !(1 << (63 - i % 64));
        if i % 64 == 0 {
            self.words.pop();
        }
        self.len -= 1;
        Some(b)
    }

    pub fn child(&self, bit: bool) -> Self {
        let mut c = self.clone();
        c.push(bit);
        c
    }

    pub fn parent(&self) -> Option<Self> {
        let mut p = self.clone();
        p.pop().map(|_| p)
    }

    /// The ancestor at depth `d` (`d <= depth`).
    pub fn prefix(&self, d: usize) -> Self {
        assert!(d <= self.depth());
        Self::from_bits(self.bits().take(d))
    }

    pub fn concat(&self, tail: &NodePath) -> Self {
        let mut p = self.clone();
        for b in tail.bits() {
            p.push(b);
        }
        p
    }

    pub fn is_prefix_of(&self, other: &NodePath) -> bool {
        self.depth() <= other.depth() && (0..self.depth()).all(|i| self.bit(i) == other.bit(i))
    }

    /// `w` such that `prefix · w = self`, if `prefix` is a prefix.
    pub fn strip_prefix(&self, prefix: &NodePath) -> Option<Self> {
        if !prefix.is_prefix_of(self) {
            return None;
        }
        Some(Self::from_bits(self.bits().skip(prefix.depth())))
    }

    /// The bits read as a binary integer.
    pub fn value(&self) -> BigUint {
        let mut v = BigUint::zero();
        for w in &self.words {
            v = (v << 64u32) + BigUint::from(*w);
        }
        let pad = self.words.len() * 64 - self.depth();
        v >> pad
    }

    /// Node with the given depth whose bits spell `value`.
    pub fn from_value(value: &BigUint, depth: usize) -> Self {
        Self::from_bits((0..depth).rev().map(|i| value.bit(i as u64)))
    }

    /// Left end `value / 2^depth` of the dyadic interval addressed by
    /// this node.
    pub fn interval_start(&self) -> DyadicRational {
        DyadicRational::new(BigInt::from(self.value()), self.len)
    }

    /// Lexicographic order on bit strings, a proper prefix first. For
    /// pairwise prefix-free sets (like a tree's external nodes) this is the
    /// left-to-right order of the addressed intervals.
    pub fn lex_cmp(&self, other: &NodePath) -> Ordering {
        let common = self.depth().min(other.depth());
        let full = common / 64;
        for w in 0..full {
            match self.words[w].cmp(&other.words[w]) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        let rest = common % 64;
        if rest > 0 {
            let mask = !0u64 << (64 - rest);
            match (self.words[full] & mask).cmp(&(other.words[full] & mask)) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        self.len.cmp(&other.len)
    }
}

/// Canonical order: by depth, then by numeric value.
impl Ord for NodePath {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.words.cmp(&other.words))
    }
}

impl PartialOrd for NodePath {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            return f.write_str("-");
        }
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NodePath({self})")
    }
}

/// Number of external nodes at each depth, `U_0, U_1, ..., U_K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelProfile {
    counts: Vec<u64>,
}

impl LevelProfile {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        LevelProfile { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn max_depth(&self) -> usize {
        self.counts.len().saturating_sub(1)
    }

    pub fn external_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `sum_k 2^{-k} U_k`, which equals one for every binary tree.
    pub fn kraft_sum(&self) -> DyadicRational {
        let top = self.max_depth() as u32;
        let scaled: BigInt = self
            .counts
            .iter()
            .enumerate()
            .map(|(k, &u)| BigInt::from(u) << (top - k as u32))
            .sum();
        DyadicRational::new(scaled, top)
    }

    /// `sum_k k 2^{-k} U_k`.
    pub fn discounted_path_length(&self) -> DyadicRational {
        let top = self.max_depth() as u32;
        let scaled: BigInt = self
            .counts
            .iter()
            .enumerate()
            .map(|(k, &u)| (BigInt::from(u) * k) << (top - k as u32))
            .sum();
        DyadicRational::new(scaled, top)
    }
}

/// A finite, prefix-closed set of nodes. Immutable once built except
/// through [`BinaryTree::attach`], which only ever adds an external node.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BinaryTree {
    nodes: BTreeSet<NodePath>,
}

impl BinaryTree {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn root_only() -> Self {
        let mut nodes = BTreeSet::new();
        nodes.insert(NodePath::root());
        BinaryTree { nodes }
    }

    /// Accept `candidate` iff it is prefix-closed. The reported offender is
    /// the shortest, then numerically smallest, node whose parent is absent.
    pub fn validate<I: IntoIterator<Item = NodePath>>(candidate: I) -> Result<Self, TreeError> {
        let nodes: BTreeSet<NodePath> = candidate.into_iter().collect();
        for u in &nodes {
            if u.depth() > MAX_DEPTH {
                return Err(TreeError::DepthExceeded(u.depth()));
            }
            match u.parent() {
                None => {}
                Some(p) if nodes.contains(&p) => {}
                Some(_) => return Err(TreeError::PrefixViolation(u.clone())),
            }
        }
        Ok(BinaryTree { nodes })
    }

    /// Build from nodes already known to be prefix-closed.
    pub(crate) fn from_closed_set(nodes: BTreeSet<NodePath>) -> Self {
        debug_assert!(nodes
            .iter()
            .all(|u| u.parent().is_none_or(|p| nodes.contains(&p))));
        BinaryTree { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, u: &NodePath) -> bool {
        self.nodes.contains(u)
    }

    /// Nodes in canonical (depth, value) order.
    pub fn iter(&self) -> impl Iterator<Item = &NodePath> {
        self.nodes.iter()
    }

    pub fn is_external(&self, u: &NodePath) -> bool {
        match u.parent() {
            None => self.is_empty(),
            Some(p) => !self.contains(u) && self.contains(&p),
        }
    }

    /// Add the external node `u`.
    pub fn attach(&mut self, u: NodePath) -> Result<(), TreeError> {
        if !self.is_external(&u) {
            return Err(TreeError::NotExternal(u));
        }
        if u.depth() > MAX_DEPTH {
            return Err(TreeError::DepthExceeded(u.depth()));
        }
        self.nodes.insert(u);
        Ok(())
    }

    /// `T(u) = { w : u·w ∈ T }`; empty when `u` is not in the tree.
    pub fn subtree_at(&self, u: &NodePath) -> BinaryTree {
        if !self.contains(u) {
            return BinaryTree::empty();
        }
        let nodes = self
            .nodes
            .iter()
            .filter(|w| w.depth() >= u.depth())
            .filter_map(|w| w.strip_prefix(u))
            .collect();
        BinaryTree { nodes }
    }

    pub fn left(&self) -> BinaryTree {
        self.subtree_at(&NodePath::root().child(false))
    }

    pub fn right(&self) -> BinaryTree {
        self.subtree_at(&NodePath::root().child(true))
    }

    /// `∂T`, in canonical order. The empty tree has the root as its only
    /// external node.
    pub fn external_frontier(&self) -> BTreeSet<NodePath> {
        if self.is_empty() {
            return BTreeSet::from([NodePath::root()]);
        }
        let mut out = BTreeSet::new();
        for u in &self.nodes {
            for b in [false, true] {
                let c = u.child(b);
                if !self.nodes.contains(&c) {
                    out.insert(c);
                }
            }
        }
        out
    }

    /// External nodes ordered left to right along the unit interval.
    pub fn external_left_to_right(&self) -> Vec<NodePath> {
        let mut v: Vec<NodePath> = self.external_frontier().into_iter().collect();
        v.sort_by(|a, b| a.lex_cmp(b));
        v
    }

    pub fn level_profile(&self) -> LevelProfile {
        let mut counts = Vec::new();
        for u in self.external_frontier() {
            let k = u.depth();
            if counts.len() <= k {
                counts.resize(k + 1, 0);
            }
            counts[k] += 1;
        }
        LevelProfile { counts }
    }

    /// Height (maximal external depth) and fill level (minimal external
    /// depth).
    pub fn height_fill(&self) -> Result<(usize, usize), TreeError> {
        if self.is_empty() {
            return Err(TreeError::EmptyTree);
        }
        let frontier = self.external_frontier();
        // canonical order sorts by depth first
        let fill = frontier.first().map(NodePath::depth).unwrap_or(0);
        let height = frontier.last().map(NodePath::depth).unwrap_or(0);
        Ok((height, fill))
    }

    /// Maximal external depth, zero for the empty tree.
    pub fn height(&self) -> usize {
        self.height_fill().map(|(h, _)| h).unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> NodePath {
        NodePath::parse(s).unwrap()
    }

    fn tree(nodes: &[&str]) -> BinaryTree {
        BinaryTree::validate(nodes.iter().map(|s| p(s))).unwrap()
    }

    #[test]
    fn path_basics() {
        let u = p("0110");
        assert_eq!(u.depth(), 4);
        assert_eq!(u.to_string(), "0110");
        assert_eq!(u.parent().unwrap(), p("011"));
        assert_eq!(u.value(), BigUint::from(6u32));
        assert_eq!(NodePath::from_value(&BigUint::from(6u32), 4), u);
        assert_eq!(p("-").to_string(), "-");
        assert!(NodePath::parse("").is_none());
        assert!(NodePath::parse("012").is_none());
        assert_eq!(u.interval_start(), DyadicRational::new(3, 3));
    }

    #[test]
    fn long_paths_cross_word_boundaries() {
        let bits: Vec<bool> = (0..150).map(|i| i % 3 == 0).collect();
        let mut u = NodePath::from_bits(bits.iter().copied());
        assert_eq!(u.bits().collect::<Vec<_>>(), bits);
        for _ in 0..150 {
            u.pop();
        }
        assert_eq!(u, NodePath::root());
    }

    #[test]
    fn canonical_and_lex_orders() {
        assert!(p("1") < p("00"));
        assert!(p("01") < p("10"));
        assert_eq!(p("1").lex_cmp(&p("00")), Ordering::Greater);
        assert_eq!(p("0").lex_cmp(&p("01")), Ordering::Less);
    }

    #[test]
    fn validate_examples() {
        assert!(BinaryTree::validate(Vec::new()).unwrap().is_empty());
        assert_eq!(tree(&["-", "0", "1", "01"]).len(), 4);
        assert_eq!(
            BinaryTree::validate([p("0")]),
            Err(TreeError::PrefixViolation(p("0")))
        );
        // shortest, then smallest offender
        assert_eq!(
            BinaryTree::validate([p("-"), p("11"), p("010"), p("10")]),
            Err(TreeError::PrefixViolation(p("10")))
        );
    }

    #[test]
    fn subtree_examples() {
        assert_eq!(tree(&["-", "0", "1"]).left(), tree(&["-"]));
        assert!(tree(&["-"]).right().is_empty());
        assert_eq!(tree(&["-", "1", "10"]).subtree_at(&p("1")), tree(&["-", "0"]));
    }

    #[test]
    fn frontier_examples() {
        assert_eq!(
            BinaryTree::empty().external_frontier(),
            BTreeSet::from([NodePath::root()])
        );
        assert_eq!(
            tree(&["-"]).external_frontier(),
            BTreeSet::from([p("0"), p("1")])
        );
        assert_eq!(
            tree(&["-", "0"]).external_frontier(),
            BTreeSet::from([p("1"), p("00"), p("01")])
        );
        assert_eq!(
            tree(&["-", "0"]).external_left_to_right(),
            vec![p("00"), p("01"), p("1")]
        );
    }

    #[test]
    fn profile_examples() {
        assert_eq!(tree(&["-"]).level_profile().counts(), &[0, 2]);
        assert_eq!(tree(&["-", "0"]).level_profile().counts(), &[0, 1, 2]);
        assert_eq!(BinaryTree::empty().level_profile().counts(), &[1]);
        assert_eq!(
            tree(&["-", "0"]).level_profile().kraft_sum(),
            DyadicRational::one()
        );
    }

    #[test]
    fn height_fill_examples() {
        assert_eq!(tree(&["-"]).height_fill(), Ok((1, 1)));
        assert_eq!(tree(&["-", "0"]).height_fill(), Ok((2, 1)));
        assert_eq!(tree(&["-", "0", "1"]).height_fill(), Ok((2, 2)));
        assert_eq!(BinaryTree::empty().height_fill(), Err(TreeError::EmptyTree));
    }

    #[test]
    fn attach_requires_external_node() {
        let mut t = BinaryTree::empty();
        t.attach(p("-")).unwrap();
        assert_eq!(t.attach(p("00")), Err(TreeError::NotExternal(p("00"))));
        t.attach(p("0")).unwrap();
        assert_eq!(t, tree(&["-", "0"]));
    }

    #[test]
    fn depth_guard() {
        let deep = NodePath::from_bits(std::iter::repeat_n(false, MAX_DEPTH + 1));
        let mut nodes: Vec<NodePath> = (0..=MAX_DEPTH + 1).map(|d| deep.prefix(d)).collect();
        nodes.reverse();
        assert_eq!(
            BinaryTree::validate(nodes),
            Err(TreeError::DepthExceeded(MAX_DEPTH + 1))
        );
    }
}
