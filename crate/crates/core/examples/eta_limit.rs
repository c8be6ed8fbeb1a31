//! `η_n - H_n` for random BSTs against the series sampler for `η_∞`, and
//! the moment generating function bound.

use tree_silhouette::limit::{harmonic, mgf_eta_inf, SeriesSampler, ETA_INF_VARIANCE};
use tree_silhouette::stats::EmpiricalDistribution;
use tree_silhouette::{RngStream, SearchShape};

fn main() {
    let n = 2000;
    let reps = 4000;
    let root = RngStream::new(5);
    let h = harmonic(n as u64);

    let trees: Vec<f64> = (0..reps)
        .map(|r| {
            let shape = SearchShape::random_bst(n, &mut root.split(r));
            shape.external_levels().eta_f64() - h
        })
        .collect();
    let sampler = SeriesSampler::new(20).unwrap();
    let mut rng = root.split(u64::MAX);
    let limit: Vec<f64> = (0..reps).map(|_| sampler.sample(&mut rng)).collect();

    let a = EmpiricalDistribution::new(trees).unwrap();
    let b = EmpiricalDistribution::new(limit).unwrap();
    println!("trees:  mean {:+.4}  var {:.4}", a.mean(), a.variance());
    println!("series: mean {:+.4}  var {:.4}", b.mean(), b.variance());
    println!("limit variance 2(1 - pi^2/12) = {ETA_INF_VARIANCE:.5}");
    println!("W1 = {:.4}, KS = {:.4}", a.w1(&b), a.ks_two_sample(&b));

    for t in [-1.0, 1.0] {
        let m: f64 = a.samples().iter().map(|x| (t * x).exp()).sum::<f64>() / reps as f64;
        println!("t = {t:+}: E exp(t(eta_n - H_n)) = {m:.4} <= M(t) = {:.4}", mgf_eta_inf(t, 40).unwrap());
    }
}
