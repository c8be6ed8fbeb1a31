use super::LimitError;
use crate::rng::RngStream;

/// Direct recursion costs `2^iterations` uniforms.
pub const MAX_QUICKSORT_ITERATIONS: u32 = 24;

/// `C(x) = 1 + 2(x log x + (1 - x) log(1 - x))`, with `C(0) = C(1) = 1`.
pub fn quicksort_toll(x: f64) -> f64 {
    let xlx = |y: f64| if y > 0.0 { y * y.ln() } else { 0.0 };
    1.0 + 2.0 * (xlx(x) + xlx(1.0 - x))
}

/// One draw of the `iterations`-fold map `ξ X + (1 - ξ) X' + C(ξ)` started
/// at zero, by direct recursion.
pub fn sample_quicksort_limit(rng: &mut RngStream, iterations: u32) -> Result<f64, LimitError> {
    if !(1..=MAX_QUICKSORT_ITERATIONS).contains(&iterations) {
        return Err(LimitError::Domain(format!(
            "iterations = {iterations} (need 1..={MAX_QUICKSORT_ITERATIONS})"
        )));
    }
    fn draw(rng: &mut RngStream, depth: u32) -> f64 {
        if depth == 0 {
            return 0.0;
        }
        let xi = rng.uniform_open();
        let x = draw(rng, depth - 1);
        let y = draw(rng, depth - 1);
        xi * x + (1.0 - xi) * y + quicksort_toll(xi)
    }
    Ok(draw(rng, iterations))
}

/// Population version: each generation resamples pairs from the previous
/// generation's pool of `pool_size` draws.
pub fn quicksort_pool(
    rng: &mut RngStream,
    iterations: u32,
    pool_size: usize,
) -> Result<Vec<f64>, LimitError> {
    if iterations == 0 || pool_size == 0 {
        return Err(LimitError::Domain("need iterations >= 1 and pool_size >= 1".into()));
    }
    let mut pool = vec![0.0; pool_size];
    for _ in 0..iterations {
        pool = (0..pool_size)
            .map(|_| {
                let x = pool[rng.below(pool_size as u64) as usize];
                let y = pool[rng.below(pool_size as u64) as usize];
                let xi = rng.uniform_open();
                xi * x + (1.0 - xi) * y + quicksort_toll(xi)
            })
            .collect();
    }
    Ok(pool)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toll_values() {
        assert!((quicksort_toll(0.5) - (1.0 - 2.0 * std::f64::consts::LN_2)).abs() < 1e-15);
        assert_eq!(quicksort_toll(0.0), 1.0);
        assert_eq!(quicksort_toll(1.0), 1.0);
        let min = (1..1000)
            .map(|i| quicksort_toll(i as f64 / 1000.0))
            .fold(f64::INFINITY, f64::min);
        assert!((min - quicksort_toll(0.5)).abs() < 1e-12);
    }

    #[test]
    fn one_iteration_is_the_toll() {
        let mut a = RngStream::new(1);
        let mut b = RngStream::new(1);
        let x = sample_quicksort_limit(&mut a, 1).unwrap();
        assert_eq!(x, quicksort_toll(b.uniform_open()));
        assert!(sample_quicksort_limit(&mut a, 0).is_err());
    }

    /// `E C(ξ)²` by composite Simpson on a fine grid.
    fn toll_second_moment() -> f64 {
        let n = 200_000;
        let h = 1.0 / n as f64;
        (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * quicksort_toll(i as f64 * h).powi(2)
            })
            .sum::<f64>()
            * h
            / 3.0
    }

    #[test]
    fn pool_mean_and_variance() {
        let mut rng = RngStream::new(2);
        // Resampling makes the pool mean a random walk over generations,
        // with sd about sqrt(iterations * 0.42 / pool), 0.003 here.
        let pool = quicksort_pool(&mut rng, 20, 1_000_000).unwrap();
        let n = pool.len() as f64;
        let m = pool.iter().sum::<f64>() / n;
        let v = pool.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(m.abs() < 0.012, "mean {m}");
        // fixed point: var = (2/3) var + E C² ; also the classical 7 - 2π²/3
        let target = 3.0 * toll_second_moment();
        assert!((target - (7.0 - 2.0 * std::f64::consts::PI.powi(2) / 3.0)).abs() < 1e-6);
        assert!((v - target).abs() < 0.02, "var {v} vs {target}");
    }

    #[test]
    fn recursion_mean_is_zero() {
        let mut rng = RngStream::new(3);
        let n = 20_000;
        let m = (0..n)
            .map(|_| sample_quicksort_limit(&mut rng, 10).unwrap())
            .sum::<f64>()
            / n as f64;
        // sd of the mean is below 0.65 / sqrt(n) = 0.0046
        assert!(m.abs() < 0.018, "mean {m}");
    }
}
