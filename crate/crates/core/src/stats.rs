//! Empirical distributions and the distances used to compare them.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("paired samples have lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("goodness-of-fit needs at least two cells with positive expectation")]
    TooFewCells,
}

#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
    sorted: Vec<f64>,
    mean: f64,
    variance: f64,
}

impl EmpiricalDistribution {
    pub fn new(samples: Vec<f64>) -> Result<Self, StatsError> {
        if samples.is_empty() {
            return Err(StatsError::EmptySample);
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let variance = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Ok(EmpiricalDistribution {
            samples,
            sorted,
            mean,
            variance,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        self.sd() / (self.len() as f64).sqrt()
    }

    /// Linear-interpolation quantile (type 7).
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let h = p * (self.sorted.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(self.sorted.len() - 1);
        self.sorted[lo] + (h - lo as f64) * (self.sorted[hi] - self.sorted[lo])
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    /// `sup_x |F_n(x) - F(x)|` against a continuous CDF.
    pub fn ks_against(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let n = self.sorted.len() as f64;
        let mut d = 0.0f64;
        for (i, &x) in self.sorted.iter().enumerate() {
            let f = cdf(x);
            d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
        }
        d
    }

    pub fn ks_standard_normal(&self) -> f64 {
        let z = Normal::standard();
        self.ks_against(|x| z.cdf(x))
    }

    /// Two-sample `sup_x |F(x) - G(x)|`.
    pub fn ks_two_sample(&self, other: &Self) -> f64 {
        let (a, b) = (&self.sorted, &other.sorted);
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let (mut i, mut j) = (0, 0);
        let mut d = 0.0f64;
        while i < a.len() && j < b.len() {
            let x = a[i].min(b[j]);
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            d = d.max((i as f64 / na - j as f64 / nb).abs());
        }
        d
    }

    /// `∫ |F(x) - G(x)| dx`; for equal sizes this is the mean distance
    /// between order statistics.
    pub fn w1(&self, other: &Self) -> f64 {
        let (a, b) = (&self.sorted, &other.sorted);
        if a.len() == b.len() {
            return a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64;
        }
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let (mut i, mut j) = (0, 0);
        let mut total = 0.0;
        let mut prev = a[0].min(b[0]);
        while i < a.len() || j < b.len() {
            let x = match (a.get(i), b.get(j)) {
                (Some(&p), Some(&q)) => p.min(q),
                (Some(&p), None) => p,
                (None, Some(&q)) => q,
                (None, None) => unreachable!(),
            };
            total += (x - prev) * (i as f64 / na - j as f64 / nb).abs();
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            prev = x;
        }
        total
    }
}

pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    Ok(sab / (saa * sbb).sqrt())
}

/// Comparison target for [`dist_stats`].
pub enum Reference<'a> {
    Sample(&'a EmpiricalDistribution),
    StandardNormal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistStats {
    pub ks: f64,
    /// Absent for an analytic reference.
    pub w1: Option<f64>,
    pub corr: Option<f64>,
}

/// KS and W1 between `a` and a reference; with `paired`, also the
/// correlation of `a` and the reference sample taken index by index.
pub fn dist_stats(
    a: &EmpiricalDistribution,
    b: Reference<'_>,
    paired: bool,
) -> Result<DistStats, StatsError> {
    match b {
        Reference::StandardNormal => Ok(DistStats {
            ks: a.ks_standard_normal(),
            w1: None,
            corr: None,
        }),
        Reference::Sample(b) => Ok(DistStats {
            ks: a.ks_two_sample(b),
            w1: Some(a.w1(b)),
            corr: if paired {
                Some(pearson(a.samples(), b.samples())?)
            } else {
                None
            },
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness-of-fit of `observed` counts to cell probabilities.
/// Adjacent cells are pooled left to right until each expected count is at
/// least 5.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquare, StatsError> {
    if observed.len() != probs.len() {
        return Err(StatsError::LengthMismatch(observed.len(), probs.len()));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(StatsError::EmptySample);
    }
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&obs, &p) in observed.iter().zip(probs) {
        o += obs as f64;
        e += p * total as f64;
        if e >= 5.0 {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    if cells.len() < 2 {
        return Err(StatsError::TooFewCells);
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cells.len() - 1;
    let p_value = ChiSquared::new(dof as f64)
        .expect("positive degrees of freedom")
        .sf(statistic);
    Ok(ChiSquare {
        statistic,
        dof,
        p_value,
    })
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand_distr::{Distribution, StandardNormal};

    fn emp(v: Vec<f64>) -> EmpiricalDistribution {
        EmpiricalDistribution::new(v).unwrap()
    }

    #[test]
    fn identical_samples_have_zero_distance() {
        let a = emp(vec![0.3, 0.1, 0.7, 0.7]);
        assert_eq!(a.ks_two_sample(&a), 0.0);
        assert_eq!(a.w1(&a), 0.0);
        assert!(EmpiricalDistribution::new(vec![]).is_err());
    }

    #[test]
    fn normal_sample_passes_ks() {
        let mut rng = RngStream::new(1);
        let xs: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        assert!(emp(xs).ks_standard_normal() < 0.006);
    }

    #[test]
    fn shift_moves_w1_by_the_shift() {
        let mut rng = RngStream::new(2);
        let a: Vec<f64> = (0..50_000).map(|_| rng.uniform()).collect();
        let b: Vec<f64> = (0..50_000).map(|_| rng.uniform() + 0.1).collect();
        let w = emp(a).w1(&emp(b));
        assert!((w - 0.1).abs() < 0.01, "w1 {w}");
    }

    #[test]
    fn unequal_sizes_use_the_cdf_integral() {
        let a = emp(vec![0.0, 1.0]);
        let b = emp(vec![0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
        // F - G = 1/2 - 1/3 on [0, 1)
        assert!((a.w1(&b) - 1.0 / 6.0).abs() < 1e-15);
        assert!((a.ks_two_sample(&b) - 1.0 / 6.0).abs() < 1e-15);
        let c = emp(vec![0.5]);
        assert!((a.w1(&c) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quantiles() {
        let a = emp(vec![4.0, 1.0, 3.0, 2.0]);
        assert_eq!(a.median(), 2.5);
        assert_eq!(a.quantile(0.0), 1.0);
        assert_eq!(a.quantile(1.0), 4.0);
        assert!((a.variance() - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn correlation() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(pearson(&[1.0], &[1.0, 2.0]), Err(StatsError::LengthMismatch(1, 2)));
    }

    #[test]
    fn chi_square_pools_small_cells() {
        let r = chi_square_gof(&[50, 30, 15, 4, 1], &[0.5, 0.3, 0.15, 0.04, 0.01]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.dof, 3);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let bad = chi_square_gof(&[100, 0], &[0.5, 0.5]).unwrap();
        assert!(bad.p_value < 1e-10);
    }
}
