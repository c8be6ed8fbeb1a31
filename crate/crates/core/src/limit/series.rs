use rand_distr::{Distribution, StandardNormal};

use super::special::ZETA_VARIANCE;
use super::LimitError;
use crate::rng::RngStream;

pub const DEFAULT_LEVELS: u32 = 20;
pub const MAX_LEVELS: u32 = 30;
/// Levels drawn term by term; deeper levels are summed in law.
pub const DEFAULT_EXACT_LEVELS: u32 = 10;

/// `ζ = 1 + ½(log ξ + log(1 - ξ))`.
pub fn zeta_from_xi(xi: f64) -> f64 {
    1.0 + 0.5 * (xi.ln() + (-xi).ln_1p())
}

pub fn sample_zeta(rng: &mut RngStream) -> f64 {
    zeta_from_xi(rng.uniform_open())
}

/// Sampler for the truncated series `Σ_{n=0}^{N} 2^{-n} Σ_{k=1}^{2^n} ζ_{n,k}`.
///
/// Levels up to `exact_levels` are drawn term by term. Level `n` beyond
/// that is a sum of `2^n` iid terms scaled by `2^{-n}`; the sum of all such
/// levels is drawn as one centred normal with the exact variance
/// `var ζ · (2^{-exact} - 2^{-N})`. Mean and variance of the result are
/// exact; the approximation only touches third and higher cumulants, which
/// are below `4^{-exact}` in size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSampler {
    levels: u32,
    exact_levels: u32,
}

impl SeriesSampler {
    pub fn new(levels: u32) -> Result<Self, LimitError> {
        if levels > MAX_LEVELS {
            return Err(LimitError::LevelOverflow(levels));
        }
        Ok(SeriesSampler {
            levels,
            exact_levels: levels.min(DEFAULT_EXACT_LEVELS),
        })
    }

    /// Every term drawn individually.
    pub fn exact(levels: u32) -> Result<Self, LimitError> {
        Ok(Self::new(levels)?.with_exact_levels(levels))
    }

    pub fn with_exact_levels(mut self, exact_levels: u32) -> Self {
        self.exact_levels = exact_levels.min(self.levels);
        self
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn exact_levels(&self) -> u32 {
        self.exact_levels
    }

    /// Standard deviation of the omitted tail beyond level `N`.
    pub fn truncation_sd(&self) -> f64 {
        (ZETA_VARIANCE * 2f64.powi(-(self.levels as i32))).sqrt()
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        let mut total = 0.0;
        for n in 0..=self.exact_levels {
            let level: f64 = (0..1u64 << n).map(|_| sample_zeta(rng)).sum();
            total += level * 2f64.powi(-(n as i32));
        }
        if self.levels > self.exact_levels {
            let var = ZETA_VARIANCE
                * (2f64.powi(-(self.exact_levels as i32)) - 2f64.powi(-(self.levels as i32)));
            let z: f64 = StandardNormal.sample(rng);
            total += var.sqrt() * z;
        }
        total
    }
}

pub fn sample_eta_inf(rng: &mut RngStream, levels: u32) -> Result<f64, LimitError> {
    Ok(SeriesSampler::new(levels)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::special::{ETA_INF_VARIANCE, ZETA_MAX};

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn zeta_at_half_is_the_maximum() {
        assert!((zeta_from_xi(0.5) - ZETA_MAX).abs() < 1e-15);
        let mut rng = RngStream::new(1);
        assert!((0..10_000).all(|_| sample_zeta(&mut rng) <= ZETA_MAX));
    }

    #[test]
    fn zeta_moments() {
        let mut rng = RngStream::new(2);
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_zeta(&mut rng)).collect();
        let (m, v) = mean_var(&xs);
        assert!(m.abs() < 0.002, "mean {m}");
        assert!((v - ZETA_VARIANCE).abs() < 0.002, "var {v}");
    }

    #[test]
    fn level_zero_is_one_zeta() {
        let mut a = RngStream::new(3);
        let mut b = RngStream::new(3);
        assert_eq!(sample_eta_inf(&mut a, 0).unwrap(), sample_zeta(&mut b));
        assert_eq!(
            sample_eta_inf(&mut a, 31),
            Err(LimitError::LevelOverflow(31))
        );
    }

    #[test]
    fn truncation_sd_at_twenty() {
        let s = SeriesSampler::new(20).unwrap();
        assert!((s.truncation_sd() - 4.115e-4).abs() < 1e-6);
    }

    #[test]
    fn series_variance() {
        let mut rng = RngStream::new(4);
        let s = SeriesSampler::new(20).unwrap().with_exact_levels(6);
        let xs: Vec<f64> = (0..100_000).map(|_| s.sample(&mut rng)).collect();
        let (m, v) = mean_var(&xs);
        assert!(m.abs() < 0.01);
        assert!((v - ETA_INF_VARIANCE).abs() < 0.01, "var {v}");
    }

    #[test]
    fn exact_and_gaussian_tail_agree_in_law() {
        let mut rng = RngStream::new(5);
        let exact = SeriesSampler::exact(8).unwrap();
        let approx = SeriesSampler::new(8).unwrap().with_exact_levels(3);
        let mut a: Vec<f64> = (0..20_000).map(|_| exact.sample(&mut rng)).collect();
        let mut b: Vec<f64> = (0..20_000).map(|_| approx.sample(&mut rng)).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let w1 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64;
        // two-sample W1 noise at this size is about 0.007
        assert!(w1 < 0.02, "w1 {w1}");
    }
}
