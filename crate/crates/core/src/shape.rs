//! Pointer-free tree shapes for bulk simulation.
//!
//! [`BinaryTree`] stores every node's full address, which is what exact
//! interrogation needs but is heavy for Monte Carlo at `n = 10^5`. A
//! [`SearchShape`] keeps child indices only and converts to either form on
//! demand.

use crate::growth::{BitStream, GrowthError, Model};
use crate::rng::RngStream;
use crate::silhouette::LevelSequence;
use crate::tree::{BinaryTree, NodePath};

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Default)]
pub struct SearchShape {
    left: Vec<u32>,
    right: Vec<u32>,
    root: Option<u32>,
}

impl SearchShape {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    /// BST of keys `0..n` inserted in increasing order of `priority`; node
    /// `i` is key `i`. With iid priorities this is the random BST on `n`
    /// keys (a Cartesian tree), built in linear time.
    pub fn from_priorities(priority: &[f64]) -> Self {
        let n = priority.len();
        let mut left = vec![NIL; n];
        let mut right = vec![NIL; n];
        let mut stack: Vec<u32> = Vec::new();
        for i in 0..n {
            let mut last = NIL;
            while let Some(&top) = stack.last() {
                if priority[top as usize] > priority[i] {
                    last = stack.pop().expect("nonempty");
                } else {
                    break;
                }
            }
            left[i] = last;
            if let Some(&top) = stack.last() {
                right[top as usize] = i as u32;
            }
            stack.push(i as u32);
        }
        SearchShape {
            left,
            right,
            root: stack.first().copied(),
        }
    }

    /// Random BST with `n` nodes.
    pub fn random_bst(n: usize, rng: &mut RngStream) -> Self {
        let pr: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        Self::from_priorities(&pr)
    }

    /// Random DST with `n` nodes; each item routes on fresh fair bits.
    pub fn random_dst(n: usize, rng: &mut RngStream) -> Self {
        let mut s = Self::empty();
        let mut word = 0u64;
        let mut avail = 0u32;
        for _ in 0..n {
            s.insert_with(|| {
                if avail == 0 {
                    word = rand::RngCore::next_u64(rng);
                    avail = 64;
                }
                avail -= 1;
                let b = word & 1 == 1;
                word >>= 1;
                b
            });
        }
        s
    }

    pub fn random(model: Model, n: usize, rng: &mut RngStream) -> Self {
        match model {
            Model::Bst => Self::random_bst(n, rng),
            Model::Dst => Self::random_dst(n, rng),
        }
    }

    /// DST insertion: follow `bits` to the first free position. Returns the
    /// depth of the new node.
    pub fn insert_by_bits(
        &mut self,
        bits: &mut impl BitStream,
        max_depth: usize,
    ) -> Result<usize, GrowthError> {
        let mut depth = 0usize;
        let mut node = match self.root {
            None => {
                self.push_node();
                self.root = Some(0);
                return Ok(0);
            }
            Some(r) => r,
        };
        loop {
            if depth >= max_depth {
                return Err(GrowthError::DepthExceeded(depth + 1));
            }
            let b = bits.bit(depth + 1);
            depth += 1;
            let next = self.child(node, b);
            if next == NIL {
                let id = self.push_node();
                if b {
                    self.right[node as usize] = id;
                } else {
                    self.left[node as usize] = id;
                }
                return Ok(depth);
            }
            node = next;
        }
    }

    fn insert_with(&mut self, mut next_bit: impl FnMut() -> bool) -> usize {
        let Some(mut node) = self.root else {
            self.push_node();
            self.root = Some(0);
            return 0;
        };
        let mut depth = 0;
        loop {
            let b = next_bit();
            depth += 1;
            let next = self.child(node, b);
            if next == NIL {
                let id = self.push_node();
                if b {
                    self.right[node as usize] = id;
                } else {
                    self.left[node as usize] = id;
                }
                return depth;
            }
            node = next;
        }
    }

    fn push_node(&mut self) -> u32 {
        let id = self.left.len() as u32;
        self.left.push(NIL);
        self.right.push(NIL);
        id
    }

    fn child(&self, node: u32, bit: bool) -> u32 {
        if bit {
            self.right[node as usize]
        } else {
            self.left[node as usize]
        }
    }

    /// `X_s` for the point whose binary digits are `bits`.
    pub fn depth_along(&self, bits: &mut impl BitStream) -> usize {
        let mut depth = 0;
        let mut node = match self.root {
            None => return 0,
            Some(r) => r,
        };
        loop {
            let next = self.child(node, bits.bit(depth + 1));
            depth += 1;
            if next == NIL {
                return depth;
            }
            node = next;
        }
    }

    /// External levels, left to right.
    pub fn external_levels(&self) -> LevelSequence {
        let mut levels = Vec::with_capacity(self.len() + 1);
        let mut stack = vec![(self.root.unwrap_or(NIL), 0u32)];
        while let Some((node, d)) = stack.pop() {
            if node == NIL {
                levels.push(d);
            } else {
                stack.push((self.right[node as usize], d + 1));
                stack.push((self.left[node as usize], d + 1));
            }
        }
        LevelSequence::from_levels_unchecked(levels)
    }

    pub fn to_tree(&self) -> BinaryTree {
        let mut nodes = Vec::with_capacity(self.len());
        if let Some(r) = self.root {
            let mut stack = vec![(r, NodePath::root())];
            while let Some((node, path)) = stack.pop() {
                for b in [false, true] {
                    let c = self.child(node, b);
                    if c != NIL {
                        stack.push((c, path.child(b)));
                    }
                }
                nodes.push(path);
            }
        }
        BinaryTree::from_closed_set(nodes.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::{bst_tree, FixedBits, KeySequence, RationalBits};
    use crate::silhouette::depth_along;

    #[test]
    fn cartesian_tree_is_the_bst_of_the_insertion_order() {
        let mut rng = RngStream::new(8);
        for n in [0, 1, 2, 5, 40, 300] {
            let pr: Vec<f64> = (0..n).map(|_| rng.uniform_open()).collect();
            // key i arrives at time pr[i]; its key value is (i + 1) / (n + 1)
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| pr[a].total_cmp(&pr[b]));
            let keys: Vec<f64> = order
                .iter()
                .map(|&i| (i + 1) as f64 / (n + 1) as f64)
                .collect();
            let expected = bst_tree(&KeySequence::new(keys).unwrap());
            assert_eq!(SearchShape::from_priorities(&pr).to_tree(), expected);
        }
    }

    #[test]
    fn levels_match_tree() {
        let mut rng = RngStream::new(9);
        for model in [Model::Bst, Model::Dst] {
            let s = SearchShape::random(model, 200, &mut rng);
            let t = s.to_tree();
            assert_eq!(t.len(), 200);
            assert_eq!(s.external_levels(), LevelSequence::from_tree(&t));
            let mut a = RationalBits::new(1, 3);
            let mut b = RationalBits::new(1, 3);
            assert_eq!(s.depth_along(&mut a), depth_along(&t, &mut b));
        }
        assert_eq!(SearchShape::empty().external_levels().levels(), &[0]);
    }

    #[test]
    fn insert_by_bits_reports_depths() {
        let mut s = SearchShape::empty();
        let mut zero = FixedBits(vec![]);
        assert_eq!(s.insert_by_bits(&mut zero, 5).unwrap(), 0);
        assert_eq!(s.insert_by_bits(&mut zero, 5).unwrap(), 1);
        assert_eq!(s.insert_by_bits(&mut FixedBits(vec![true]), 5).unwrap(), 1);
        assert_eq!(s.insert_by_bits(&mut zero, 1), Err(GrowthError::DepthExceeded(2)));
    }
}
