//! Growing binary search trees (BST) and digital search trees (DST).
//!
//! Each model has two routes that produce the same law on trees of a given
//! size: the key-driven algorithm (`bst_build`, `dst_build`) and the
//! external-node dynamics (`grow_uniform_external`, `grow_dst_external`),
//! where the next node is an external node of the current tree chosen
//! uniformly (BST) or with probability `2^{-depth}` (DST).

use std::collections::HashSet;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicRational;
use crate::rng::RngStream;
use crate::tree::{BinaryTree, NodePath, TreeError, MAX_DEPTH};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GrowthError {
    #[error("key {0} repeats an earlier key")]
    DuplicateKey(usize),
    #[error("key {index} = {value} is not in the open unit interval")]
    KeyOutOfRange { index: usize, value: f64 },
    #[error("routing exceeded depth {0}; the bit streams collide")]
    DepthExceeded(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Bst,
    Dst,
}

impl std::str::FromStr for Model {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bst" => Ok(Model::Bst),
            "dst" => Ok(Model::Dst),
            other => Err(format!("unknown model '{other}' (expected bst or dst)")),
        }
    }
}

/// Distinct keys in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KeySequence {
    keys: Vec<f64>,
}

impl KeySequence {
    /// Indices in errors are one-based positions in the input.
    pub fn new(keys: Vec<f64>) -> Result<Self, GrowthError> {
        let mut seen = HashSet::with_capacity(keys.len());
        for (i, &k) in keys.iter().enumerate() {
            if !(k > 0.0 && k < 1.0) {
                return Err(GrowthError::KeyOutOfRange {
                    index: i + 1,
                    value: k,
                });
            }
            if !seen.insert(k.to_bits()) {
                return Err(GrowthError::DuplicateKey(i + 1));
            }
        }
        Ok(KeySequence { keys })
    }

    pub fn uniform(n: usize, rng: &mut RngStream) -> Self {
        loop {
            let keys: Vec<f64> = (0..n).map(|_| rng.uniform_open()).collect();
            if let Ok(k) = Self::new(keys) {
                return k;
            }
        }
    }

    pub fn keys(&self) -> &[f64] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// `(T_1, ..., T_n)`: the BST shapes of the key prefixes.
pub fn bst_build(keys: &KeySequence) -> Vec<BinaryTree> {
    let mut out = Vec::with_capacity(keys.len());
    bst_fold(keys, |t| out.push(t.clone()));
    out
}

/// The BST shape of all keys.
pub fn bst_tree(keys: &KeySequence) -> BinaryTree {
    bst_fold(keys, |_| {})
}

fn bst_fold(keys: &KeySequence, mut each: impl FnMut(&BinaryTree)) -> BinaryTree {
    const NIL: usize = usize::MAX;
    // child indices into `keys`, per inserted key
    let mut children: Vec<[usize; 2]> = Vec::with_capacity(keys.len());
    let mut tree = BinaryTree::empty();
    for (i, &k) in keys.keys().iter().enumerate() {
        let mut path = NodePath::root();
        if i > 0 {
            let mut node = 0;
            loop {
                let dir = k > keys.keys()[node];
                path.push(dir);
                let next = children[node][dir as usize];
                if next == NIL {
                    children[node][dir as usize] = i;
                    break;
                }
                node = next;
            }
        }
        children.push([NIL, NIL]);
        tree.attach(path)
            .expect("a BST insertion always lands on an external node");
        each(&tree);
    }
    tree
}

/// The routing bits `u_1, u_2, ...` of one DST item.
pub trait BitStream {
    /// Bit `u_index`, `index >= 1`. Repeated calls return the same bit.
    fn bit(&mut self, index: usize) -> bool;
}

/// A finite bit word continued by zeros.
#[derive(Debug, Clone)]
pub struct FixedBits(pub Vec<bool>);

impl BitStream for FixedBits {
    fn bit(&mut self, index: usize) -> bool {
        self.0.get(index - 1).copied().unwrap_or(false)
    }
}

/// Binary expansion of a key in `[0, 1)`; every float is a binary
/// rational, and its expansion terminates in zeros.
#[derive(Debug, Clone)]
pub struct KeyBits {
    num: BigUint,
    exp: u32,
}

impl KeyBits {
    pub fn new(key: f64) -> Self {
        assert!((0.0..1.0).contains(&key), "key {key} not in [0, 1)");
        Self::from_dyadic(&DyadicRational::from_f64(key).expect("finite key"))
    }

    pub fn from_dyadic(key: &DyadicRational) -> Self {
        assert!(
            !key.is_negative() && *key < DyadicRational::one(),
            "key {key} not in [0, 1)"
        );
        KeyBits {
            num: key.numerator().magnitude().clone(),
            exp: key.exponent(),
        }
    }
}

/// Binary expansion of a rational `p / q` in `[0, 1)` by long division.
#[derive(Debug, Clone)]
pub struct RationalBits {
    q: u64,
    rem: u64,
    bits: Vec<bool>,
}

impl RationalBits {
    pub fn new(p: u64, q: u64) -> Self {
        assert!(q > 0 && p < q, "{p}/{q} not in [0, 1)");
        RationalBits {
            q,
            rem: p,
            bits: Vec::new(),
        }
    }
}

impl BitStream for RationalBits {
    fn bit(&mut self, index: usize) -> bool {
        while self.bits.len() < index {
            let twice = self.rem as u128 * 2;
            let b = twice >= self.q as u128;
            self.rem = (twice - if b { self.q as u128 } else { 0 }) as u64;
            self.bits.push(b);
        }
        self.bits[index - 1]
    }
}

impl BitStream for KeyBits {
    fn bit(&mut self, index: usize) -> bool {
        if index > self.exp as usize {
            return false;
        }
        self.num.bit((self.exp as usize - index) as u64)
    }
}

/// Fair coin flips realized lazily from an RNG stream.
#[derive(Debug, Clone)]
pub struct RandomBits {
    rng: RngStream,
    bits: Vec<u64>,
}

impl RandomBits {
    pub fn new(rng: RngStream) -> Self {
        RandomBits {
            rng,
            bits: Vec::new(),
        }
    }
}

impl BitStream for RandomBits {
    fn bit(&mut self, index: usize) -> bool {
        let i = index - 1;
        while self.bits.len() * 64 <= i {
            self.bits.push(rand::RngCore::next_u64(&mut self.rng));
        }
        (self.bits[i / 64] >> (i % 64)) & 1 == 1
    }
}

/// `(T_1, ..., T_n)` for the DST algorithm: item `m` follows its bits from
/// the root and is stored in the first free node.
pub fn dst_build<S: BitStream>(streams: &mut [S]) -> Result<Vec<BinaryTree>, GrowthError> {
    dst_build_with_limit(streams, MAX_DEPTH)
}

pub fn dst_build_with_limit<S: BitStream>(
    streams: &mut [S],
    max_depth: usize,
) -> Result<Vec<BinaryTree>, GrowthError> {
    let mut tree = BinaryTree::empty();
    let mut out = Vec::with_capacity(streams.len());
    for s in streams.iter_mut() {
        let mut path = NodePath::root();
        while tree.contains(&path) {
            if path.depth() >= max_depth {
                return Err(GrowthError::DepthExceeded(path.depth() + 1));
            }
            let b = s.bit(path.depth() + 1);
            path.push(b);
        }
        tree.attach(path)?;
        out.push(tree.clone());
    }
    Ok(out)
}

/// External nodes of a tree grouped by depth, each group in increasing
/// numeric order; the concatenation is the canonical order of `∂T`.
#[derive(Debug, Clone)]
pub struct Frontier {
    by_depth: Vec<Vec<NodePath>>,
    total: usize,
}

impl Frontier {
    pub fn of(tree: &BinaryTree) -> Self {
        let mut f = Frontier {
            by_depth: Vec::new(),
            total: 0,
        };
        // BTreeSet iteration is already canonical
        for u in tree.external_frontier() {
            f.push_sorted(u);
        }
        f
    }

    fn push_sorted(&mut self, u: NodePath) {
        let k = u.depth();
        if self.by_depth.len() <= k {
            self.by_depth.resize_with(k + 1, Vec::new);
        }
        let v = &mut self.by_depth[k];
        let pos = v.binary_search(&u).unwrap_or_else(|p| p);
        v.insert(pos, u);
        self.total += 1;
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// The `i`-th external node in canonical order.
    pub fn nth(&self, mut i: usize) -> &NodePath {
        for group in &self.by_depth {
            if i < group.len() {
                return &group[i];
            }
            i -= group.len();
        }
        panic!("frontier index out of range");
    }

    /// Turn the external node `u` into an internal one.
    pub fn replace(&mut self, u: &NodePath) {
        let v = &mut self.by_depth[u.depth()];
        let pos = v.binary_search(u).expect("node is external");
        v.remove(pos);
        self.total -= 1;
        self.push_sorted(u.child(false));
        self.push_sorted(u.child(true));
    }

    /// Index into `∂T` drawn with probability `2^{-depth}`, by inverse
    /// transform over the canonical order with exact dyadic weights.
    pub fn sample_dyadic(&self, rng: &mut RngStream) -> &NodePath {
        let top = self.by_depth.len() - 1;
        if top < 127 {
            // r uniform on [0, 2^top); cumulative weights scaled by 2^top
            let mut r = if top == 0 {
                0
            } else {
                let hi = rand::RngCore::next_u64(rng) as u128;
                let lo = rand::RngCore::next_u64(rng) as u128;
                ((hi << 64) | lo) >> (128 - top)
            };
            for (k, group) in self.by_depth.iter().enumerate() {
                let w = 1u128 << (top - k);
                let block = w * group.len() as u128;
                if r < block {
                    return &group[(r / w) as usize];
                }
                r -= block;
            }
            unreachable!("Kraft sum of a frontier is one");
        }
        let mut r = BigUint::from(0u8);
        for _ in 0..top.div_ceil(32) {
            r = (r << 32u32) + BigUint::from(rand::RngCore::next_u32(rng));
        }
        r >>= top.div_ceil(32) * 32 - top;
        for (k, group) in self.by_depth.iter().enumerate() {
            let w = BigUint::from(1u8) << (top - k);
            let block = &w * group.len();
            if r < block {
                let idx: usize = (&r / &w).try_into().expect("index fits");
                return &group[idx];
            }
            r -= block;
        }
        unreachable!("Kraft sum of a frontier is one");
    }
}

/// Incremental growth of one tree under the external-node dynamics.
#[derive(Debug, Clone)]
pub struct Grower {
    model: Model,
    tree: BinaryTree,
    frontier: Frontier,
}

impl Grower {
    pub fn new(model: Model, tree: BinaryTree) -> Self {
        let frontier = Frontier::of(&tree);
        Grower {
            model,
            tree,
            frontier,
        }
    }

    /// Add one node; returns it.
    pub fn step(&mut self, rng: &mut RngStream) -> NodePath {
        let u = match self.model {
            Model::Bst => {
                let i = rng.below(self.frontier.len() as u64) as usize;
                self.frontier.nth(i).clone()
            }
            Model::Dst => self.frontier.sample_dyadic(rng).clone(),
        };
        self.frontier.replace(&u);
        self.tree
            .attach(u.clone())
            .expect("frontier holds external nodes");
        u
    }

    pub fn tree(&self) -> &BinaryTree {
        &self.tree
    }

    pub fn frontier(&self) -> &Frontier {
        &self.frontier
    }

    pub fn into_tree(self) -> BinaryTree {
        self.tree
    }
}

/// One BST step: attach an external node chosen uniformly at random.
pub fn grow_uniform_external(tree: &BinaryTree, rng: &mut RngStream) -> BinaryTree {
    let mut g = Grower::new(Model::Bst, tree.clone());
    g.step(rng);
    g.into_tree()
}

/// One DST step: attach external node `u` with probability `2^{-|u|}`.
pub fn grow_dst_external(tree: &BinaryTree, rng: &mut RngStream) -> BinaryTree {
    let mut g = Grower::new(Model::Dst, tree.clone());
    g.step(rng);
    g.into_tree()
}

/// `T_n` grown from the empty tree by `n` dynamics steps.
pub fn grow_to(model: Model, n: usize, rng: &mut RngStream) -> BinaryTree {
    let mut g = Grower::new(model, BinaryTree::empty());
    for _ in 0..n {
        g.step(rng);
    }
    g.into_tree()
}

/// `φ({log2 n})` with `φ(x) = 2^x - 1 - x`; exactly zero at powers of two.
pub fn opt_eta_gap(n: u64) -> f64 {
    assert!(n >= 1, "opt_eta_gap needs n >= 1");
    if n.is_power_of_two() {
        return 0.0;
    }
    let l = (n as f64).log2();
    let x = l - l.floor();
    x.exp2() - 1.0 - x
}

/// `η` of the tree with `nodes` nodes grown by always filling a shallowest
/// external node: with `2^m + r` external nodes, `η = m + r 2^{-m}`.
pub fn opt_eta(nodes: u64) -> DyadicRational {
    let externals = nodes + 1;
    let m = 63 - externals.leading_zeros();
    let r = externals - (1u64 << m);
    &DyadicRational::from_int(m as i64) + &DyadicRational::new(r, m)
}

/// Exact mean and variance of `η` for the random BST on `0..=n` nodes,
/// from the distributional recursion `η_n = 1 + ½(η_I + η'_{n-1-I})`.
/// Quadratic in `n`.
pub fn bst_eta_moments(n: usize) -> Vec<(f64, f64)> {
    let mut mean = vec![0.0; n + 1];
    let mut second = vec![0.0; n + 1];
    let (mut sum_mean, mut sum_second) = (0.0, 0.0);
    for m in 1..=n {
        let e1 = sum_mean / m as f64;
        let e2 = sum_second / m as f64;
        let cross: f64 = (0..m).map(|i| mean[i] * mean[m - 1 - i]).sum::<f64>() / m as f64;
        mean[m] = 1.0 + e1;
        second[m] = 1.0 + 2.0 * e1 + 0.5 * (e2 + cross);
        sum_mean += mean[m];
        sum_second += second[m];
    }
    mean.iter()
        .zip(&second)
        .map(|(&m1, &m2)| (m1, m2 - m1 * m1))
        .collect()
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
    fn bst_examples() {
        let one = KeySequence::new(vec![0.5]).unwrap();
        assert_eq!(bst_build(&one), vec![tree(&["-"])]);
        let four = KeySequence::new(vec![0.5, 0.2, 0.7, 0.1]).unwrap();
        let seq = bst_build(&four);
        assert_eq!(seq[3], tree(&["-", "0", "1", "00"]));
        assert_eq!(
            KeySequence::new(vec![0.5, 0.5]),
            Err(GrowthError::DuplicateKey(2))
        );
        assert!(matches!(
            KeySequence::new(vec![0.5, 1.0]),
            Err(GrowthError::KeyOutOfRange { index: 2, .. })
        ));
    }

    #[test]
    fn bst_sequence_grows_by_external_nodes() {
        let mut rng = RngStream::new(11);
        let keys = KeySequence::uniform(60, &mut rng);
        let seq = bst_build(&keys);
        for w in seq.windows(2) {
            assert_eq!(w[1].len(), w[0].len() + 1);
            let new: Vec<_> = w[1].iter().filter(|u| !w[0].contains(u)).collect();
            assert_eq!(new.len(), 1);
            assert!(w[0].is_external(new[0]));
        }
    }

    #[test]
    fn dst_examples() {
        let mut one = vec![FixedBits(vec![true])];
        assert_eq!(dst_build(&mut one).unwrap(), vec![tree(&["-"])]);
        let mut three = vec![
            FixedBits(vec![false]),
            FixedBits(vec![false]),
            FixedBits(vec![true]),
        ];
        assert_eq!(
            dst_build(&mut three).unwrap()[2],
            tree(&["-", "0", "1"])
        );
    }

    #[test]
    fn colliding_streams_exceed_the_depth_limit() {
        let mut zeros = vec![FixedBits(vec![]); 4];
        assert_eq!(
            dst_build_with_limit(&mut zeros, 2),
            Err(GrowthError::DepthExceeded(3))
        );
        let mut zeros = vec![FixedBits(vec![]); 3];
        assert!(dst_build_with_limit(&mut zeros, 2).is_ok());
    }

    #[test]
    fn key_bits_follow_the_binary_expansion() {
        let mut b = KeyBits::new(0.625); // 0.101
        let got: Vec<bool> = (1..=5).map(|i| b.bit(i)).collect();
        assert_eq!(got, vec![true, false, true, false, false]);
        let mut half = KeyBits::new(0.5);
        assert!(half.bit(1));
        assert!(!half.bit(2));
    }

    #[test]
    fn rational_bits_of_one_third() {
        let mut b = RationalBits::new(1, 3);
        let got: Vec<bool> = (1..=6).map(|i| b.bit(i)).collect();
        assert_eq!(got, vec![false, true, false, true, false, true]);
    }

    #[test]
    fn random_bits_are_stable() {
        let mut b = RandomBits::new(RngStream::new(3));
        let first: Vec<bool> = (1..=200).map(|i| b.bit(i)).collect();
        let again: Vec<bool> = (1..=200).map(|i| b.bit(i)).collect();
        assert_eq!(first, again);
    }

    #[test]
    fn dynamics_from_the_empty_tree() {
        let mut rng = RngStream::new(1);
        assert_eq!(grow_uniform_external(&BinaryTree::empty(), &mut rng), tree(&["-"]));
        assert_eq!(grow_dst_external(&BinaryTree::empty(), &mut rng), tree(&["-"]));
    }

    #[test]
    fn bst_step_from_root_is_a_fair_coin() {
        let mut rng = RngStream::new(2);
        let root = tree(&["-"]);
        let n = 20_000;
        let left = (0..n)
            .filter(|_| grow_uniform_external(&root, &mut rng).contains(&p("0")))
            .count();
        // 4 standard errors of a fair coin
        assert!((left as f64 / n as f64 - 0.5).abs() < 4.0 * 0.5 / (n as f64).sqrt());
    }

    #[test]
    fn dst_step_weights() {
        let mut rng = RngStream::new(3);
        let t = tree(&["-", "0"]);
        let n = 40_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let g = grow_dst_external(&t, &mut rng);
            if g.contains(&p("1")) {
                counts[0] += 1;
            } else if g.contains(&p("00")) {
                counts[1] += 1;
            } else {
                counts[2] += 1;
            }
        }
        for (c, prob) in counts.iter().zip([0.5, 0.25, 0.25]) {
            let se = (prob * (1.0 - prob) / n as f64).sqrt();
            assert!((*c as f64 / n as f64 - prob).abs() < 4.0 * se);
        }
    }

    #[test]
    fn frontier_order_matches_tree() {
        let mut rng = RngStream::new(4);
        let t = grow_to(Model::Bst, 40, &mut rng);
        let f = Frontier::of(&t);
        let canon: Vec<NodePath> = t.external_frontier().into_iter().collect();
        assert_eq!(f.len(), canon.len());
        for (i, u) in canon.iter().enumerate() {
            assert_eq!(f.nth(i), u);
        }
    }

    #[test]
    fn opt_gap_examples() {
        assert_eq!(opt_eta_gap(8), 0.0);
        assert_eq!(opt_eta_gap(1), 0.0);
        // φ(log2 3 - 1), evaluated independently with 2^x = 3/2
        let x = 3f64.log2() - 1.0;
        assert!((opt_eta_gap(3) - (1.5 - 1.0 - x)).abs() < 1e-15);
        assert!((opt_eta_gap(3) + 0.084_962_500_721_156_18).abs() < 1e-14);
    }

    /// Grow by always attaching a shallowest external node.
    fn greedy_eta(nodes: usize) -> DyadicRational {
        let mut t = BinaryTree::empty();
        for _ in 0..nodes {
            let u = t.external_frontier().into_iter().next().unwrap();
            t.attach(u).unwrap();
        }
        t.level_profile().discounted_path_length()
    }

    #[test]
    fn opt_eta_is_the_greedy_tree_and_matches_the_gap_formula() {
        for n in 1..=40 {
            assert_eq!(opt_eta(n as u64), greedy_eta(n), "n = {n}");
        }
        // the gap identity holds with the number of external nodes
        for nodes in 1u64..200 {
            let ext = nodes + 1;
            let lhs = opt_eta(nodes).to_f64() - (ext as f64).log2();
            assert!((lhs - opt_eta_gap(ext)).abs() < 1e-12, "nodes = {nodes}");
        }
    }

    #[test]
    fn bst_eta_moments_match_the_recursion_oracle() {
        let m = bst_eta_moments(100);
        assert_eq!(m[0], (0.0, 0.0));
        assert_eq!(m[1], (1.0, 0.0));
        // both two-node shapes have η = 3/2
        assert!((m[2].0 - 1.5).abs() < 1e-15 && m[2].1.abs() < 1e-15);
        assert!((m[100].0 - 5.187377517639621).abs() < 1e-12);
        // independent numpy evaluation of the same recursion
        assert!((m[100].1 - 0.2523191417966153).abs() < 1e-12);
    }
}
