//! Iterate the operator `Ψ` on a particle pool started at the point mass
//! and watch the `a`-marginal settle on the law of `η_∞`.

use tree_silhouette::limit::{psi_apply_capped, PsiSample, SeriesSampler};
use tree_silhouette::stats::EmpiricalDistribution;
use tree_silhouette::RngStream;

fn main() {
    let pool_size = 3000;
    let root = RngStream::new(11);
    let sampler = SeriesSampler::new(20).unwrap();
    let mut rng = root.split(0);
    let target =
        EmpiricalDistribution::new((0..pool_size).map(|_| sampler.sample(&mut rng)).collect())
            .unwrap();

    let mut pool = vec![PsiSample::degenerate(); pool_size];
    for it in 1..=15u64 {
        let stream = root.split(it);
        let mut next: Vec<PsiSample> = (0..pool_size as u64)
            .map(|r| psi_apply_capped(&pool, &mut stream.split(r), 6).unwrap())
            .collect();
        let mean = next.iter().map(|p| p.a).sum::<f64>() / pool_size as f64;
        for p in &mut next {
            p.a -= mean;
        }
        pool = next;
        let a = EmpiricalDistribution::new(pool.iter().map(|p| p.a).collect()).unwrap();
        let sup = pool.iter().map(|p| p.f.sup_norm()).sum::<f64>() / pool_size as f64;
        println!(
            "iteration {it:2}: var(a) {:.4}, W1 to eta_inf {:.4}, mean sup|f| {:.4}",
            a.variance(),
            a.w1(&target),
            sup
        );
    }
}
