use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

use super::LimitError;

/// `var ζ_∞ = 1 - π²/12`.
pub const ZETA_VARIANCE: f64 = 1.0 - PI * PI / 12.0;
/// `var η_∞ = 2 var ζ_∞`.
pub const ETA_INF_VARIANCE: f64 = 2.0 * ZETA_VARIANCE;
/// `ζ_∞ <= 1 - log 2`, attained at `ξ = 1/2`.
pub const ZETA_MAX: f64 = 1.0 - LN_2;
pub const DEFAULT_MGF_LEVELS: u32 = 40;

/// `H_n = Σ_{k<=n} 1/k`, summed smallest terms first.
pub fn harmonic(n: u64) -> f64 {
    (1..=n).rev().map(|k| 1.0 / k as f64).sum()
}

const SERIES_TERMS: usize = 64;

/// `ζ(k) - 1` for `k = 2..SERIES_TERMS`, by Euler–Maclaurin from `n = 10`.
fn zeta_minus_one() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        const B: [f64; 6] = [
            1.0 / 6.0,
            -1.0 / 30.0,
            1.0 / 42.0,
            -1.0 / 30.0,
            5.0 / 66.0,
            -691.0 / 2730.0,
        ];
        let big_n = 10.0f64;
        let mut out = vec![0.0; SERIES_TERMS + 1];
        for (k, slot) in out.iter_mut().enumerate().skip(2) {
            let s = k as f64;
            let mut tail = big_n.powf(1.0 - s) / (s - 1.0) + 0.5 * big_n.powf(-s);
            // B_{2j}/(2j)! * s(s+1)...(s+2j-2) * N^{-s-2j+1}
            let mut rising = s;
            let mut fact = 2.0;
            for (j, b) in B.iter().enumerate() {
                let p = 2 * (j + 1);
                tail += b / fact * rising * big_n.powf(-s - p as f64 + 1.0);
                rising *= (s + p as f64 - 1.0) * (s + p as f64);
                fact *= ((p + 1) * (p + 2)) as f64;
            }
            let head: f64 = (2..10).rev().map(|n| (n as f64).powf(-s)).sum();
            *slot = head + tail;
        }
        out
    })
}

/// `log M₀(t)` with `M₀(t) = E e^{t ζ_∞} = Γ(1+t/2)² e^t / Γ(2+t)`.
pub fn ln_mgf_zeta(t: f64) -> Result<f64, LimitError> {
    if t.is_nan() || t <= -2.0 {
        return Err(LimitError::Domain(format!("t = {t} (need t > -2)")));
    }
    if t.abs() > 0.5 {
        return Ok(2.0 * ln_gamma(1.0 + t / 2.0) + t - ln_gamma(2.0 + t));
    }
    // Taylor series from log Γ(1+z) = -γz + Σ (-z)^k ζ(k)/k; the linear
    // terms cancel because E ζ_∞ = 0.
    let zm1 = zeta_minus_one();
    let mut sum = 0.0;
    let mut tk = t;
    let mut half = 0.5;
    for (k, z) in zm1.iter().enumerate().skip(2) {
        tk *= -t;
        half *= 0.5;
        // tk = -(-t)^k, half = 2^-k
        let coeff = -z + (1.0 + z) * 2.0 * half;
        sum += tk * coeff / k as f64;
    }
    Ok(-sum)
}

pub fn mgf_zeta(t: f64) -> Result<f64, LimitError> {
    Ok(ln_mgf_zeta(t)?.exp())
}

/// `M(t) = Π_{n=0}^{L} M₀(2^{-n} t)^{2^n}`.
pub fn mgf_eta_inf(t: f64, levels: u32) -> Result<f64, LimitError> {
    let mut log = 0.0;
    for n in 0..=levels {
        let scale = 2f64.powi(n as i32);
        log += scale * ln_mgf_zeta(t / scale)?;
    }
    Ok(log.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic(0), 0.0);
        assert!((harmonic(5) - 137.0 / 60.0).abs() < 1e-15);
        // independent high-precision summation
        assert!((harmonic(100) - 5.187_377_517_639_621).abs() < 1e-13);
    }

    #[test]
    fn zeta_table_matches_known_values() {
        let z = zeta_minus_one();
        assert!((z[2] - (PI * PI / 6.0 - 1.0)).abs() < 1e-14);
        assert!((z[4] - (PI.powi(4) / 90.0 - 1.0)).abs() < 1e-14);
        let direct: f64 = (2..200).map(|n| (n as f64).powi(-30)).sum();
        assert!((z[30] - direct).abs() < 1e-24);
    }

    #[test]
    fn series_and_gamma_branches_agree() {
        for t in [-0.5, -0.3, 0.1, 0.25, 0.49, 0.5] {
            let series = ln_mgf_zeta(t).unwrap();
            let gamma = 2.0 * ln_gamma(1.0 + t / 2.0) + t - ln_gamma(2.0 + t);
            assert!((series - gamma).abs() < 1e-13, "t = {t}: {series} vs {gamma}");
        }
    }

    #[test]
    fn mgf_zeta_values() {
        assert_eq!(mgf_zeta(0.0).unwrap(), 1.0);
        let e2 = 2f64.exp() / 6.0;
        assert!((mgf_zeta(2.0).unwrap() - e2).abs() < 1e-12);
        assert!(matches!(mgf_zeta(-2.0), Err(LimitError::Domain(_))));
        // small-t behaviour is var/2 t^2
        let t = 1e-6;
        let l = ln_mgf_zeta(t).unwrap();
        assert!((l / (t * t) - ZETA_VARIANCE / 2.0).abs() < 1e-6);
    }

    #[test]
    fn mgf_eta_inf_values() {
        // product evaluated independently at 50 significant digits
        assert!((mgf_eta_inf(1.0, 40).unwrap() - 1.155_691_645_275_446).abs() < 1e-13);
        assert!((mgf_eta_inf(-1.0, 40).unwrap() - 1.279_921_503_714_910).abs() < 1e-13);
        assert!((mgf_eta_inf(2.0, 40).unwrap() - 1.644_832_432_727_000).abs() < 1e-12);
        assert!((mgf_eta_inf(0.5, 40).unwrap() - 1.040_504_117_242_740).abs() < 1e-13);
        assert_eq!(mgf_eta_inf(0.0, 40).unwrap(), 1.0);
        assert!(mgf_eta_inf(-2.5, 40).is_err());
    }

    #[test]
    fn mgf_product_truncation() {
        // The level-n log factor is about 2^-n var t^2 / 2, so the tail
        // after level L is about 2^-L var t^2 / 2.
        let m20 = mgf_eta_inf(1.0, 20).unwrap();
        let m40 = mgf_eta_inf(1.0, 40).unwrap();
        let m60 = mgf_eta_inf(1.0, 60).unwrap();
        let tail20 = 2f64.powi(-20) * ZETA_VARIANCE / 2.0 * m40;
        assert!(((m40 - m20) - tail20).abs() < 0.01 * tail20);
        assert!((m60 - m40).abs() < 1e-12);
    }
}
