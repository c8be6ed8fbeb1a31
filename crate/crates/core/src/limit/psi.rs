use super::LimitError;
use crate::rng::RngStream;

/// Output resolution cap for [`psi_apply`].
pub const DEFAULT_PSI_CAP: u32 = 12;

/// Real values of a continuous function at `j 2^{-m}`, linear in between.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    resolution: u32,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zero(resolution: u32) -> Self {
        GridFunction {
            resolution,
            values: vec![0.0; (1usize << resolution) + 1],
        }
    }

    pub fn new(resolution: u32, values: Vec<f64>) -> Result<Self, LimitError> {
        if values.len() != (1usize << resolution) + 1 {
            return Err(LimitError::Domain(format!(
                "{} values for resolution {resolution}",
                values.len()
            )));
        }
        Ok(GridFunction { resolution, values })
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let scaled = t.clamp(0.0, 1.0) * (self.values.len() - 1) as f64;
        let i = (scaled.floor() as usize).min(self.values.len() - 2);
        let frac = scaled - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// A point of `C₀₀[0,1] × ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiSample {
    pub f: GridFunction,
    pub a: f64,
}

impl PsiSample {
    /// `(0, 0)`.
    pub fn degenerate() -> Self {
        PsiSample {
            f: GridFunction::zero(0),
            a: 0.0,
        }
    }
}

/// `φ(t) = ½ min(t, 1 - t)`.
pub fn phi_tent(t: f64) -> f64 {
    0.5 * t.min(1.0 - t)
}

/// `Ψ` applied to given inputs: `A Y + B Y' + (η - η' + log ξ - log(1-ξ)) φ`
/// and `1 + ½(η + η') + ½(log ξ + log(1-ξ))`, where
/// `A f(t) = ½ f(2t ∧ 1)` and `B f(t) = ½ f((2t - 1)⁺)`.
///
/// `out_resolution` must be the input resolution or one more.
pub fn psi_map(y: &PsiSample, y2: &PsiSample, xi: f64, out_resolution: u32) -> PsiSample {
    let m = y.f.resolution;
    assert_eq!(m, y2.f.resolution, "pool samples must share a resolution");
    assert!(
        out_resolution == m || out_resolution == m + 1,
        "output resolution {out_resolution} from input {m}"
    );
    let factor = 1usize << (m + 1 - out_resolution);
    let full = 1usize << m;
    let (log_xi, log_rest) = (xi.ln(), (-xi).ln_1p());
    let weight = y.a - y2.a + log_xi - log_rest;
    let size = 1usize << out_resolution;
    let values = (0..=size)
        .map(|j| {
            let x = j * factor;
            let ia = x.min(full);
            let ib = x.saturating_sub(full);
            let t = j as f64 / size as f64;
            0.5 * y.f.values[ia] + 0.5 * y2.f.values[ib] + weight * phi_tent(t)
        })
        .collect();
    PsiSample {
        f: GridFunction {
            resolution: out_resolution,
            values,
        },
        a: 1.0 + 0.5 * (y.a + y2.a) + 0.5 * (log_xi + log_rest),
    }
}

/// One draw from `Ψ(μ)` where `μ` is the empirical law of `pool`; output
/// resolution grows by one up to `cap`.
pub fn psi_apply_capped(
    pool: &[PsiSample],
    rng: &mut RngStream,
    cap: u32,
) -> Result<PsiSample, LimitError> {
    if pool.is_empty() {
        return Err(LimitError::EmptyPool);
    }
    let i = rng.below(pool.len() as u64) as usize;
    let j = rng.below(pool.len() as u64) as usize;
    let xi = rng.uniform_open();
    let m = pool[i].f.resolution;
    let out = if m < cap { m + 1 } else { m };
    Ok(psi_map(&pool[i], &pool[j], xi, out))
}

pub fn psi_apply(pool: &[PsiSample], rng: &mut RngStream) -> Result<PsiSample, LimitError> {
    psi_apply_capped(pool, rng, DEFAULT_PSI_CAP)
}
