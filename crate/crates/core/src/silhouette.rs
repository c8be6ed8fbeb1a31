//! Silhouettes, integrated silhouettes and the exact functionals built on
//! them.
//!
//! The silhouette `X_s(T)` is the depth of the external node reached by
//! following the binary digits of `s`. It is a step function whose pieces
//! are the dyadic intervals of the external nodes, so everything here is
//! exact in [`DyadicRational`] arithmetic.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::dyadic::DyadicRational;
use crate::growth::{BitStream, KeyBits};
use crate::limit::harmonic;
use crate::tree::{BinaryTree, LevelProfile, NodePath, MAX_DEPTH};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SilhouetteError {
    #[error("{0} is outside [0, 1]")]
    Domain(String),
    #[error("not a silhouette: {0}")]
    NotASilhouette(String),
    #[error("resolution {resolution} is coarser than the required {needed}")]
    ResolutionTooCoarse { resolution: u32, needed: u32 },
    #[error("reconstruction would need more than {0} external nodes")]
    TooLarge(usize),
}

/// Limit on the external nodes a reconstruction may create.
pub const MAX_RECONSTRUCTED_EXTERNALS: usize = 1 << 26;

/// Constant level on `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub start: DyadicRational,
    pub end: DyadicRational,
    pub level: u32,
}

/// A right-continuous step function on `[0, 1]` in merged form; the value
/// at 1 is the level of the last piece.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepFunction {
    pieces: Vec<Piece>,
}

impl StepFunction {
    /// Checks that the pieces partition `[0, 1)` and that neighbours have
    /// different levels.
    pub fn new(pieces: Vec<Piece>) -> Result<Self, SilhouetteError> {
        let bad = |m: &str| Err(SilhouetteError::NotASilhouette(m.to_string()));
        let Some(first) = pieces.first() else {
            return bad("no pieces");
        };
        if !first.start.is_zero() {
            return bad("first piece does not start at 0");
        }
        if pieces.last().map(|p| &p.end) != Some(&DyadicRational::one()) {
            return bad("last piece does not end at 1");
        }
        for (i, p) in pieces.iter().enumerate() {
            if p.start >= p.end {
                return bad("empty or reversed piece");
            }
            if i > 0 {
                let prev = &pieces[i - 1];
                if prev.end != p.start {
                    return bad("pieces do not abut");
                }
                if prev.level == p.level {
                    return bad("adjacent pieces share a level");
                }
            }
        }
        Ok(StepFunction { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn eval(&self, s: &DyadicRational) -> Result<u32, SilhouetteError> {
        check_unit(s)?;
        let i = self.pieces.partition_point(|p| p.end <= *s);
        Ok(self.pieces[i.min(self.pieces.len() - 1)].level)
    }

    /// `∫₀¹ f`.
    pub fn integral(&self) -> DyadicRational {
        self.pieces
            .iter()
            .map(|p| (&p.end - &p.start).mul_int(p.level as i64))
            .sum()
    }

    /// Lebesgue measure of `{s : f(s) = k}`.
    pub fn preimage_measure(&self, k: u32) -> DyadicRational {
        self.pieces
            .iter()
            .filter(|p| p.level == k)
            .map(|p| &p.end - &p.start)
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("start_num,start_exp,end_num,end_exp,level\n");
        for p in &self.pieces {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.start.numerator(),
                p.start.exponent(),
                p.end.numerator(),
                p.end.exponent(),
                p.level
            ));
        }
        out
    }
}

fn check_unit(s: &DyadicRational) -> Result<(), SilhouetteError> {
    if s.is_negative() || *s > DyadicRational::one() {
        return Err(SilhouetteError::Domain(s.to_string()));
    }
    Ok(())
}

/// External levels of a tree, left to right. This is the silhouette
/// without breakpoints: piece `i` has width `2^{-levels[i]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSequence {
    levels: Vec<u32>,
    height: u32,
    fill: u32,
}

/// Heights up to this use `u128` fixed point instead of big integers.
const FAST_HEIGHT: u32 = 120;

impl LevelSequence {
    /// Accepts exactly the level sequences of binary trees: every piece
    /// aligned to its own width and the pieces tiling `[0, 1)`.
    pub fn from_levels(levels: Vec<u32>) -> Result<Self, SilhouetteError> {
        walk_externals(&levels, |_| {})?;
        Ok(Self::from_levels_unchecked(levels))
    }

    pub(crate) fn from_levels_unchecked(levels: Vec<u32>) -> Self {
        let height = levels.iter().copied().max().unwrap_or(0);
        let fill = levels.iter().copied().min().unwrap_or(0);
        LevelSequence {
            levels,
            height,
            fill,
        }
    }

    pub fn from_tree(tree: &BinaryTree) -> Self {
        let levels = tree
            .external_left_to_right()
            .iter()
            .map(|u| u.depth() as u32)
            .collect();
        Self::from_levels_unchecked(levels)
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Number of tree nodes, `#∂T - 1`.
    pub fn nodes(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn fill(&self) -> u32 {
        self.fill
    }

    pub fn profile(&self) -> LevelProfile {
        let mut counts = vec![0u64; self.height as usize + 1];
        for &l in &self.levels {
            counts[l as usize] += 1;
        }
        LevelProfile::from_counts(counts)
    }

    /// `Σ 2^{-level}`, exactly.
    pub fn kraft_sum(&self) -> DyadicRational {
        let h = self.height;
        if h <= FAST_HEIGHT {
            let s: u128 = self.levels.iter().map(|&l| 1u128 << (h - l)).sum();
            return dyadic_from_u128(s, h);
        }
        let s: BigUint = self
            .levels
            .iter()
            .map(|&l| BigUint::one() << (h - l))
            .sum();
        DyadicRational::new(BigInt::from(s), h)
    }

    /// `η = Σ level · 2^{-level}`, exactly.
    pub fn eta(&self) -> DyadicRational {
        let h = self.height;
        if h <= FAST_HEIGHT {
            let s: u128 = self
                .levels
                .iter()
                .map(|&l| (l as u128) << (h - l))
                .sum();
            return dyadic_from_u128(s, h);
        }
        let s: BigUint = self
            .levels
            .iter()
            .map(|&l| BigUint::from(l) << (h - l))
            .sum();
        DyadicRational::new(BigInt::from(s), h)
    }

    pub fn eta_f64(&self) -> f64 {
        self.eta().to_f64()
    }

    /// `Y(j 2^{-k})` for `j = 0, ..., 2^k`.
    pub fn y_grid(&self, k: u32) -> Vec<DyadicRational> {
        assert!(k <= 24, "grid 2^{k} too fine");
        let d = self.height.max(k);
        let mut out = Vec::with_capacity((1usize << k) + 1);
        if d <= FAST_HEIGHT {
            let step = 1u128 << (d - k);
            let (mut next, mut pos, mut acc) = (0u128, 0u128, 0u128);
            for &l in &self.levels {
                let w = 1u128 << (d - l);
                let end = pos + w;
                while next < end {
                    out.push(dyadic_from_u128(acc + l as u128 * (next - pos), d));
                    next += step;
                }
                acc += l as u128 * w;
                pos = end;
            }
            out.push(dyadic_from_u128(acc, d));
            return out;
        }
        let step = BigUint::one() << (d - k);
        let (mut next, mut pos, mut acc) = (BigUint::zero(), BigUint::zero(), BigUint::zero());
        for &l in &self.levels {
            let w = BigUint::one() << (d - l);
            let end = &pos + &w;
            while next < end {
                let v = &acc + (&next - &pos) * l;
                out.push(DyadicRational::new(BigInt::from(v), d));
                next += &step;
            }
            acc += w * l;
            pos = end;
        }
        out.push(DyadicRational::new(BigInt::from(acc), d));
        out
    }

    /// `Δ_k Y°`: the `2^k` increments of the tied-down integrated
    /// silhouette. They sum to zero exactly.
    pub fn ynorm_increments(&self, k: u32) -> Vec<DyadicRational> {
        let y = self.y_grid(k);
        let drift = self.eta().scale_pow2(-(k as i64));
        y.windows(2).map(|w| &(&w[1] - &w[0]) - &drift).collect()
    }

    pub fn to_step_function(&self) -> StepFunction {
        let mut pieces: Vec<Piece> = Vec::new();
        let mut pos = DyadicRational::zero();
        for &l in &self.levels {
            let end = &pos + &DyadicRational::pow2_neg(l);
            match pieces.last_mut() {
                Some(p) if p.level == l => p.end = end.clone(),
                _ => pieces.push(Piece {
                    start: pos,
                    end: end.clone(),
                    level: l,
                }),
            }
            pos = end;
        }
        StepFunction { pieces }
    }

    pub fn to_tree(&self) -> BinaryTree {
        let mut nodes = Vec::with_capacity(self.levels.len());
        walk_externals(&self.levels, |u| nodes.push(u.clone()))
            .expect("level sequence was validated");
        BinaryTree::from_closed_set(nodes.into_iter().collect())
    }
}

fn dyadic_from_u128(num: u128, exp: u32) -> DyadicRational {
    DyadicRational::new(BigInt::from(num), exp)
}

/// Visit the external nodes named by a level sequence, left to right,
/// failing if the sequence is not the frontier of a tree.
///
/// `internal` receives, between two consecutive external nodes, their
/// longest common prefix: the internal node that separates them in order.
fn walk_externals(
    levels: &[u32],
    mut internal: impl FnMut(&NodePath),
) -> Result<(), SilhouetteError> {
    let bad = |m: String| Err(SilhouetteError::NotASilhouette(m));
    if levels.is_empty() {
        return bad("no pieces".into());
    }
    let mut cur = NodePath::root();
    for (i, &l) in levels.iter().enumerate() {
        if l as usize > MAX_DEPTH {
            return bad(format!("level {l} exceeds the depth limit"));
        }
        if i > 0 {
            // successor interval: drop trailing ones, flip the last zero
            loop {
                match cur.pop() {
                    Some(true) => continue,
                    Some(false) => {
                        internal(&cur);
                        cur.push(true);
                        break;
                    }
                    None => return bad("pieces extend past 1".into()),
                }
            }
        }
        if cur.depth() > l as usize {
            return bad(format!(
                "piece {} at level {l} is not aligned to width 2^-{l}",
                i + 1
            ));
        }
        while cur.depth() < l as usize {
            cur.push(false);
        }
    }
    if cur.bits().any(|b| !b) {
        return bad("pieces stop short of 1".into());
    }
    Ok(())
}

pub fn silhouette_of(tree: &BinaryTree) -> StepFunction {
    LevelSequence::from_tree(tree).to_step_function()
}

/// `X_s(T)` for a real `s`; floats are binary rationals and use the
/// expansion ending in zeros, except `s = 1` which follows the right spine.
pub fn eval_at(tree: &BinaryTree, s: f64) -> Result<usize, SilhouetteError> {
    if !(0.0..=1.0).contains(&s) {
        return Err(SilhouetteError::Domain(s.to_string()));
    }
    eval_at_dyadic(tree, &DyadicRational::from_f64(s).expect("finite"))
}

pub fn eval_at_dyadic(tree: &BinaryTree, s: &DyadicRational) -> Result<usize, SilhouetteError> {
    check_unit(s)?;
    if *s == DyadicRational::one() {
        let mut u = NodePath::root();
        while tree.contains(&u) {
            u.push(true);
        }
        return Ok(u.depth());
    }
    Ok(depth_along(tree, &mut KeyBits::from_dyadic(s)))
}

/// Depth of the external node reached by following `bits` from the root.
pub fn depth_along(tree: &BinaryTree, bits: &mut impl BitStream) -> usize {
    let mut u = NodePath::root();
    while tree.contains(&u) {
        let b = bits.bit(u.depth() + 1);
        u.push(b);
    }
    u.depth()
}

/// The unique tree with the given silhouette.
pub fn tree_from_silhouette(f: &StepFunction) -> Result<BinaryTree, SilhouetteError> {
    let mut levels = Vec::new();
    for p in f.pieces() {
        let l = p.level;
        if l as usize > MAX_DEPTH {
            return Err(SilhouetteError::NotASilhouette(format!(
                "level {l} exceeds the depth limit"
            )));
        }
        for x in [&p.start, &p.end] {
            if x.exponent() > l {
                return Err(SilhouetteError::NotASilhouette(format!(
                    "endpoint {x} of a level-{l} piece is not a multiple of 2^-{l}"
                )));
            }
        }
        let count = (&p.end - &p.start).numerator_at(l);
        let count = count
            .to_usize()
            .filter(|&c| levels.len() + c <= MAX_RECONSTRUCTED_EXTERNALS)
            .ok_or(SilhouetteError::TooLarge(MAX_RECONSTRUCTED_EXTERNALS))?;
        levels.extend(std::iter::repeat_n(l, count));
    }
    Ok(LevelSequence::from_levels(levels)?.to_tree())
}

/// `η(T) = ∫₀¹ X_s(T) ds = Σ_k k 2^{-k} U_k(T)`.
pub fn eta_of(tree: &BinaryTree) -> DyadicRational {
    tree.level_profile().discounted_path_length()
}

/// Segment of a piecewise-linear function starting at `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Knot {
    pub t: DyadicRational,
    pub value: DyadicRational,
    /// Slope on `[t, next knot)`; zero on the final knot at 1.
    pub slope: DyadicRational,
}

/// A continuous piecewise-linear function on `[0, 1]` with all breakpoints
/// on the grid `j 2^{-m}`. Only the breakpoints are stored, which makes the
/// grid values at resolution `m` available exactly without materializing
/// `2^m + 1` of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLFunction {
    resolution: u32,
    knots: Vec<Knot>,
}

impl PLFunction {
    pub fn zero(resolution: u32) -> Self {
        PLFunction {
            resolution,
            knots: vec![
                Knot {
                    t: DyadicRational::zero(),
                    value: DyadicRational::zero(),
                    slope: DyadicRational::zero(),
                },
                Knot {
                    t: DyadicRational::one(),
                    value: DyadicRational::zero(),
                    slope: DyadicRational::zero(),
                },
            ],
        }
    }

    /// From the `2^m + 1` grid values.
    pub fn from_grid(resolution: u32, values: &[DyadicRational]) -> Self {
        assert!(resolution <= 24, "dense grid 2^{resolution} too large");
        assert_eq!(values.len(), (1usize << resolution) + 1);
        let mut knots = Vec::new();
        for j in 0..values.len() - 1 {
            let slope = (&values[j + 1] - &values[j]).scale_pow2(resolution as i64);
            knots.push(Knot {
                t: DyadicRational::new(j as i64, resolution),
                value: values[j].clone(),
                slope,
            });
        }
        knots.push(Knot {
            t: DyadicRational::one(),
            value: values[values.len() - 1].clone(),
            slope: DyadicRational::zero(),
        });
        Self::from_knots(resolution, knots)
    }

    /// Drops knots that do not change the slope.
    fn from_knots(resolution: u32, knots: Vec<Knot>) -> Self {
        let last = knots.len() - 1;
        let mut out: Vec<Knot> = Vec::with_capacity(knots.len());
        for (i, k) in knots.into_iter().enumerate() {
            if i != 0 && i != last && out.last().map(|p| &p.slope) == Some(&k.slope) {
                continue;
            }
            out.push(k);
        }
        PLFunction {
            resolution,
            knots: out,
        }
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn value_at(&self, t: &DyadicRational) -> Result<DyadicRational, SilhouetteError> {
        check_unit(t)?;
        let i = self.knots.partition_point(|k| k.t <= *t) - 1;
        let k = &self.knots[i];
        Ok(&k.value + &(&k.slope * &(t - &k.t)))
    }

    /// Value at the grid point `j 2^{-m}`.
    pub fn value_at_index(&self, j: &BigUint) -> Result<DyadicRational, SilhouetteError> {
        self.value_at(&DyadicRational::new(BigInt::from(j.clone()), self.resolution))
    }

    pub fn value_f64(&self, t: f64) -> f64 {
        let i = self
            .knots
            .partition_point(|k| k.t.to_f64() <= t)
            .clamp(1, self.knots.len())
            - 1;
        let k = &self.knots[i];
        k.value.to_f64() + k.slope.to_f64() * (t - k.t.to_f64())
    }

    pub fn max_f64(&self) -> f64 {
        self.knots
            .iter()
            .map(|k| k.value.to_f64())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_f64(&self) -> f64 {
        self.knots
            .iter()
            .map(|k| k.value.to_f64())
            .fold(f64::INFINITY, f64::min)
    }

    /// `f(t) - t f(1)`.
    pub fn tie_down(&self) -> Self {
        let end = self.knots.last().expect("nonempty").value.clone();
        let knots = self
            .knots
            .iter()
            .enumerate()
            .map(|(i, k)| Knot {
                t: k.t.clone(),
                value: &k.value - &(&k.t * &end),
                slope: if i + 1 == self.knots.len() {
                    DyadicRational::zero()
                } else {
                    &k.slope - &end
                },
            })
            .collect();
        Self::from_knots(self.resolution, knots)
    }

    /// Exact `(Δ_k f)_j = f(j 2^{-k}) - f((j-1) 2^{-k})`, `j = 1..=2^k`.
    pub fn increments(&self, k: u32) -> Result<Vec<DyadicRational>, SilhouetteError> {
        if k > self.resolution {
            return Err(SilhouetteError::ResolutionTooCoarse {
                resolution: self.resolution,
                needed: k,
            });
        }
        assert!(k <= 24, "2^{k} increments requested");
        let vals: Vec<DyadicRational> = (0..=(1i64 << k))
            .map(|j| self.value_at(&DyadicRational::new(j, k)).expect("in range"))
            .collect();
        Ok(vals.windows(2).map(|w| &w[1] - &w[0]).collect())
    }

    /// One row per knot, `j` being its grid index at this resolution.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,resolution,value_num,value_exp\n");
        for k in &self.knots {
            let j = k.t.numerator_at(self.resolution);
            out.push_str(&format!(
                "{},{},{},{}\n",
                j,
                self.resolution,
                k.value.numerator(),
                k.value.exponent()
            ));
        }
        out
    }
}

/// The integral function `t ↦ ∫₀ᵗ f` of a step function, on grid `m`.
pub fn integrate(f: &StepFunction, resolution: u32) -> PLFunction {
    let mut knots = Vec::with_capacity(f.pieces().len() + 1);
    let mut acc = DyadicRational::zero();
    for p in f.pieces() {
        let level = DyadicRational::from_int(p.level as i64);
        let next = &acc + &(&(&p.end - &p.start) * &level);
        knots.push(Knot {
            t: p.start.clone(),
            value: acc,
            slope: level,
        });
        acc = next;
    }
    knots.push(Knot {
        t: DyadicRational::one(),
        value: acc,
        slope: DyadicRational::zero(),
    });
    PLFunction::from_knots(resolution, knots)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Functionals {
    pub y: PLFunction,
    pub ynorm: PLFunction,
    pub eta: DyadicRational,
    pub eta_centered: f64,
}

/// `Y`, `Y°`, `η` and `η° = η - H(#T)`.
pub fn functionals(tree: &BinaryTree, resolution: u32) -> Result<Functionals, SilhouetteError> {
    let height = tree.height() as u32;
    if resolution < height {
        return Err(SilhouetteError::ResolutionTooCoarse {
            resolution,
            needed: height,
        });
    }
    let y = integrate(&silhouette_of(tree), resolution);
    let eta = y.knots().last().expect("nonempty").value.clone();
    let ynorm = y.tie_down();
    let eta_centered = eta.to_f64() - harmonic(tree.len() as u64);
    Ok(Functionals {
        y,
        ynorm,
        eta,
        eta_centered,
    })
}

pub fn increments_dyadic(f: &PLFunction, k: u32) -> Result<Vec<f64>, SilhouetteError> {
    Ok(f.increments(k)?.iter().map(DyadicRational::to_f64).collect())
}

/// `sup { |f(t) - f(s)| : |t - s| <= delta }`.
///
/// On each cell between knots the difference is linear, so the supremum
/// sits at a vertex of the band `|t - s| <= delta` cut by the knot grid:
/// either two knots, or a knot `x` paired with `x ± delta`.
pub fn modulus_of_continuity(f: &PLFunction, delta: f64) -> Result<f64, SilhouetteError> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(SilhouetteError::Domain(delta.to_string()));
    }
    let xs: Vec<f64> = f.knots().iter().map(|k| k.t.to_f64()).collect();
    let ys: Vec<f64> = f.knots().iter().map(|k| k.value.to_f64()).collect();
    let mut best = 0.0f64;

    // knot pairs within delta: sliding window max and min
    let mut hi: std::collections::VecDeque<usize> = Default::default();
    let mut lo: std::collections::VecDeque<usize> = Default::default();
    let mut left = 0;
    for i in 0..xs.len() {
        while xs[i] - xs[left] > delta {
            left += 1;
        }
        while hi.back().is_some_and(|&b| ys[b] <= ys[i]) {
            hi.pop_back();
        }
        hi.push_back(i);
        while lo.back().is_some_and(|&b| ys[b] >= ys[i]) {
            lo.pop_back();
        }
        lo.push_back(i);
        while hi.front().is_some_and(|&b| b < left) {
            hi.pop_front();
        }
        while lo.front().is_some_and(|&b| b < left) {
            lo.pop_front();
        }
        best = best.max(ys[hi[0]] - ys[lo[0]]);
    }

    for (x, y) in xs.iter().zip(&ys) {
        for other in [x + delta, x - delta] {
            if (0.0..=1.0).contains(&other) {
                best = best.max((f.value_f64(other) - y).abs());
            }
        }
    }
    Ok(best)
}
