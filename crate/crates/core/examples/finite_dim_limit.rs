//! Dyadic increments of the tied-down integrated silhouette of a large BST
//! next to draws from their limit law.

use tree_silhouette::limit::{sample_findim_limit, SeriesSampler};
use tree_silhouette::stats::EmpiricalDistribution;
use tree_silhouette::{RngStream, SearchShape};

fn main() {
    let (n, k, reps) = (5000, 2u32, 2000u64);
    let root = RngStream::new(17);
    let sampler = SeriesSampler::new(20).unwrap();

    let mut tree_cols = vec![Vec::new(); 1 << k];
    let mut limit_cols = vec![Vec::new(); 1 << k];
    for r in 0..reps {
        let levels = SearchShape::random_bst(n, &mut root.split(r)).external_levels();
        if levels.fill() < k {
            continue;
        }
        for (j, d) in levels.ynorm_increments(k).iter().enumerate() {
            tree_cols[j].push(d.to_f64());
        }
        let lim = sample_findim_limit(k, &mut root.split(reps + r), &sampler).unwrap();
        for (j, d) in lim.delta.iter().enumerate() {
            limit_cols[j].push(*d);
        }
    }
    for j in 0..1 << k {
        let a = EmpiricalDistribution::new(tree_cols[j].clone()).unwrap();
        let b = EmpiricalDistribution::new(limit_cols[j].clone()).unwrap();
        println!(
            "j = {}: tree sd {:.4}, limit sd {:.4}, W1 {:.4}",
            j + 1,
            a.sd(),
            b.sd(),
            a.w1(&b)
        );
    }
}
