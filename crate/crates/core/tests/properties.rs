use std::collections::BTreeSet;

use num_bigint::BigUint;
use proptest::prelude::*;

use tree_silhouette::growth::{dst_build, FixedBits};
use tree_silhouette::silhouette::{
    eta_of, eval_at_dyadic, functionals, silhouette_of, tree_from_silhouette,
};
use tree_silhouette::stats::EmpiricalDistribution;
use tree_silhouette::{
    codec, BinaryTree, DyadicRational, LevelSequence, Model, NodePath, RngStream, SearchShape,
};

/// Prefix closure of arbitrary bit words: any finite binary tree.
fn arb_tree() -> impl Strategy<Value = BinaryTree> {
    prop::collection::vec(prop::collection::vec(any::<bool>(), 0..10), 0..25).prop_map(|words| {
        let mut nodes = BTreeSet::new();
        for w in words {
            for d in 0..=w.len() {
                nodes.insert(NodePath::from_bits(w[..d].iter().copied()));
            }
        }
        BinaryTree::validate(nodes).expect("prefix closed")
    })
}

fn random_tree() -> impl Strategy<Value = BinaryTree> {
    (any::<u64>(), 0usize..300, any::<bool>()).prop_map(|(seed, n, dst)| {
        let model = if dst { Model::Dst } else { Model::Bst };
        SearchShape::random(model, n, &mut RngStream::new(seed)).to_tree()
    })
}

fn any_tree() -> impl Strategy<Value = BinaryTree> {
    prop_oneof![arb_tree(), random_tree()]
}

fn half() -> DyadicRational {
    DyadicRational::pow2_neg(1)
}

fn phi(t: &DyadicRational) -> DyadicRational {
    let rest = &DyadicRational::one() - t;
    let m = if *t < rest { t.clone() } else { rest };
    &m * &half()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kraft_sum_is_one(t in any_tree()) {
        prop_assert_eq!(t.level_profile().kraft_sum(), DyadicRational::one());
        prop_assert_eq!(LevelSequence::from_tree(&t).kraft_sum(), DyadicRational::one());
    }

    #[test]
    fn treetext_round_trip(t in any_tree()) {
        prop_assert_eq!(codec::parse(&codec::emit(&t)).unwrap(), t);
    }

    #[test]
    fn silhouette_round_trip(t in any_tree()) {
        let x = silhouette_of(&t);
        prop_assert_eq!(tree_from_silhouette(&x).unwrap(), t.clone());
        prop_assert_eq!(LevelSequence::from_tree(&t).to_tree(), t);
    }

    #[test]
    fn eta_agrees_across_computations(t in any_tree()) {
        let eta = eta_of(&t);
        prop_assert_eq!(&silhouette_of(&t).integral(), &eta);
        prop_assert_eq!(&LevelSequence::from_tree(&t).eta(), &eta);
        prop_assert_eq!(&t.level_profile().discounted_path_length(), &eta);
        let f = functionals(&t, t.height() as u32).unwrap();
        prop_assert_eq!(f.y.value_at(&DyadicRational::one()).unwrap(), eta);
    }

    #[test]
    fn preimage_measure_is_the_weighted_profile(t in any_tree()) {
        let x = silhouette_of(&t);
        let counts = t.level_profile().counts().to_vec();
        for (k, &u) in counts.iter().enumerate() {
            let expected = DyadicRational::new(u, k as u32);
            prop_assert_eq!(x.preimage_measure(k as u32), expected);
        }
        prop_assert!(x.preimage_measure(counts.len() as u32 + 1).is_zero());
    }

    #[test]
    fn silhouette_recursion_through_the_root(t in any_tree(), b in 1u32..14, a in any::<u64>()) {
        prop_assume!(!t.is_empty());
        let a = a % ((1u64 << b) + 1);
        let s = DyadicRational::new(a, b);
        let here = eval_at_dyadic(&t, &s).unwrap();
        let (sub, s2) = if s < half() {
            (t.left(), s.scale_pow2(1))
        } else {
            (t.right(), &s.scale_pow2(1) - &DyadicRational::one())
        };
        prop_assert_eq!(here, 1 + eval_at_dyadic(&sub, &s2).unwrap());
    }

    #[test]
    fn normalized_integral_decomposes_at_the_root(t in any_tree()) {
        prop_assume!(!t.is_empty());
        let (l, r) = (t.left(), t.right());
        let m = t.height() as u32;
        let ft = functionals(&t, m).unwrap();
        let fl = functionals(&l, m - 1).unwrap();
        let fr = functionals(&r, m - 1).unwrap();
        let one = DyadicRational::one();
        prop_assert_eq!(
            &ft.eta,
            &(&one + &(&(&fl.eta + &fr.eta) * &half()))
        );
        let gap = &fl.eta - &fr.eta;
        for j in 0..=(1u64 << m) {
            let t_ = DyadicRational::new(j, m);
            let two_t = t_.scale_pow2(1);
            let a_arg = if two_t > one { one.clone() } else { two_t.clone() };
            let b_arg = if two_t < one { DyadicRational::zero() } else { &two_t - &one };
            let rhs = &(&(&fl.ynorm.value_at(&a_arg).unwrap() + &fr.ynorm.value_at(&b_arg).unwrap())
                * &half())
                + &(&gap * &phi(&t_));
            prop_assert_eq!(ft.ynorm.value_at(&t_).unwrap(), rhs);
        }
    }

    #[test]
    fn increments_are_subtree_discounted_lengths(t in random_tree(), k in 1u32..4) {
        let levels = LevelSequence::from_tree(&t);
        prop_assume!(levels.fill() >= k);
        let eta = eta_of(&t);
        let inc = levels.ynorm_increments(k);
        let f = functionals(&t, t.height() as u32).unwrap();
        prop_assert_eq!(&f.ynorm.increments(k).unwrap(), &inc);
        for (j, d) in inc.iter().enumerate() {
            let u = NodePath::from_value(&BigUint::from(j as u64), k as usize);
            let sub = eta_of(&t.subtree_at(&u));
            let expected = (&(&DyadicRational::from_int(k as i64) + &sub) - &eta)
                .scale_pow2(-(k as i64));
            prop_assert_eq!(d, &expected);
        }
        prop_assert!(inc.iter().cloned().sum::<DyadicRational>().is_zero());
    }

    #[test]
    fn arena_dst_matches_dst_build(
        words in prop::collection::vec(prop::collection::vec(any::<bool>(), 12), 0..60)
    ) {
        let mut streams: Vec<FixedBits> = words.iter().cloned().map(FixedBits).collect();
        let expected = dst_build(&mut streams).unwrap().pop().unwrap_or_else(BinaryTree::empty);
        let mut shape = SearchShape::empty();
        let mut all_fit = true;
        for w in &words {
            all_fit &= shape.insert_by_bits(&mut FixedBits(w.clone()), 64).is_ok();
        }
        prop_assert!(all_fit);
        prop_assert_eq!(shape.to_tree(), expected);
    }

    #[test]
    fn w1_triangle_inequality(
        a in prop::collection::vec(-5.0f64..5.0, 50),
        b in prop::collection::vec(-5.0f64..5.0, 50),
        c in prop::collection::vec(-5.0f64..5.0, 50),
    ) {
        let (a, b, c) = (
            EmpiricalDistribution::new(a).unwrap(),
            EmpiricalDistribution::new(b).unwrap(),
            EmpiricalDistribution::new(c).unwrap(),
        );
        prop_assert!(a.w1(&c) <= a.w1(&b) + b.w1(&c) + 1e-12);
        prop_assert!(a.w1(&a) == 0.0);
    }
}

#[test]
fn normalized_integral_is_tied_down() {
    for seed in 0..20 {
        let t = SearchShape::random_bst(100, &mut RngStream::new(seed)).to_tree();
        let f = functionals(&t, t.height() as u32).unwrap();
        assert!(f.ynorm.value_at(&DyadicRational::zero()).unwrap().is_zero());
        assert!(f.ynorm.value_at(&DyadicRational::one()).unwrap().is_zero());
    }
}
