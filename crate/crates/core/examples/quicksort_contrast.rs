//! The Quicksort fixed point next to `η_∞`: same splitting, different toll.

use tree_silhouette::limit::{quicksort_pool, sample_eta_inf};
use tree_silhouette::stats::EmpiricalDistribution;
use tree_silhouette::RngStream;

fn main() {
    let root = RngStream::new(9);
    let qs = quicksort_pool(&mut root.split(0), 20, 20_000).unwrap();
    let mut rng = root.split(1);
    let eta: Vec<f64> = (0..20_000).map(|_| sample_eta_inf(&mut rng, 20).unwrap()).collect();

    let qs = EmpiricalDistribution::new(qs).unwrap();
    let eta = EmpiricalDistribution::new(eta).unwrap();
    println!("quicksort: mean {:+.4} var {:.4} (7 - 2pi^2/3 = {:.4})", qs.mean(), qs.variance(),
        7.0 - 2.0 * std::f64::consts::PI.powi(2) / 3.0);
    println!("eta_inf:   mean {:+.4} var {:.4}", eta.mean(), eta.variance());
    println!("W1 between the two laws: {:.4}", qs.w1(&eta));
}
