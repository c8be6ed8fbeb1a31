use super::series::SeriesSampler;
use super::LimitError;
use crate::rng::RngStream;

pub const MAX_RHO_K: u32 = 20;
pub const MAX_FINDIM_K: u32 = 10;

/// Log-proportions `ρ_k` and proportions `V_k` of a recursive uniform
/// splitting of `[0, 1]` to depth `k`, indexed left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoV {
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
}

/// Each internal node `u` of depth `< k` carries a uniform `ξ_u`; going
/// right multiplies by `ξ_u`, going left by `1 - ξ_u`.
pub fn sample_rho_v(k: u32, rng: &mut RngStream) -> Result<RhoV, LimitError> {
    if !(1..=MAX_RHO_K).contains(&k) {
        return Err(LimitError::Domain(format!("k = {k} (need 1 <= k <= {MAX_RHO_K})")));
    }
    let mut rho = vec![0.0];
    let mut v = vec![1.0];
    for _ in 0..k {
        let mut next_rho = Vec::with_capacity(rho.len() * 2);
        let mut next_v = Vec::with_capacity(v.len() * 2);
        for (r, p) in rho.iter().zip(&v) {
            let xi = rng.uniform_open();
            next_rho.push(r + (-xi).ln_1p());
            next_v.push(p * (1.0 - xi));
            next_rho.push(r + xi.ln());
            next_v.push(p * xi);
        }
        rho = next_rho;
        v = next_v;
    }
    Ok(RhoV { rho, v })
}

/// One draw of the limit of `(Δ_k Y°(T_n), η°(T_n))` together with its
/// ingredients.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitFinDim {
    pub k: u32,
    pub delta: Vec<f64>,
    pub eta_centered_limit: f64,
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
    pub eta_components: Vec<f64>,
}

/// `δ_j = 2^{-k}(k + ρ_j + η_j - η°)` with `η° = 2^{-k} Σ_j (k + ρ_j + η_j)`,
/// the `η_j` iid copies of `η_∞`.
pub fn sample_findim_limit(
    k: u32,
    rng: &mut RngStream,
    series: &SeriesSampler,
) -> Result<LimitFinDim, LimitError> {
    if !(1..=MAX_FINDIM_K).contains(&k) {
        return Err(LimitError::Domain(format!(
            "k = {k} (need 1 <= k <= {MAX_FINDIM_K})"
        )));
    }
    let RhoV { rho, v } = sample_rho_v(k, rng)?;
    let eta: Vec<f64> = (0..rho.len()).map(|_| series.sample(rng)).collect();
    let scale = 2f64.powi(-(k as i32));
    let x: Vec<f64> = rho
        .iter()
        .zip(&eta)
        .map(|(r, e)| k as f64 + r + e)
        .collect();
    let eta_centered_limit = scale * x.iter().sum::<f64>();
    let mut delta: Vec<f64> = x.iter().map(|xj| scale * (xj - eta_centered_limit)).collect();
    // put the vector exactly on the zero-sum hyperplane despite rounding
    let last = delta.len() - 1;
    delta[last] = -delta[..last].iter().sum::<f64>();
    Ok(LimitFinDim {
        k,
        delta,
        eta_centered_limit,
        rho,
        v,
        eta_components: eta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::series::zeta_from_xi;

    #[test]
    fn k_one_uses_one_split() {
        let mut a = RngStream::new(1);
        let mut b = RngStream::new(1);
        let rv = sample_rho_v(1, &mut a).unwrap();
        let xi = b.uniform_open();
        assert_eq!(rv.rho, vec![(1.0 - xi).ln(), xi.ln()]);
        assert_eq!(rv.v, vec![1.0 - xi, xi]);
        assert!(sample_rho_v(0, &mut a).is_err());
        assert!(sample_rho_v(21, &mut a).is_err());
    }

    #[test]
    fn proportions_sum_to_one() {
        let mut rng = RngStream::new(2);
        for k in [1, 2, 5, 12] {
            let rv = sample_rho_v(k, &mut rng).unwrap();
            assert_eq!(rv.v.len(), 1 << k);
            assert!((rv.v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (r, v) in rv.rho.iter().zip(&rv.v) {
                assert!((r.exp() - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn minus_rho_is_gamma_k() {
        let mut rng = RngStream::new(3);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| -sample_rho_v(4, &mut rng).unwrap().rho[5])
            .collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((m - 4.0).abs() < 0.02, "mean {m}");
        assert!((var - 4.0).abs() < 0.1, "var {var}");
    }

    #[test]
    fn increments_sum_to_zero_and_match_the_formula() {
        let mut rng = RngStream::new(4);
        let s = SeriesSampler::new(12).unwrap().with_exact_levels(4);
        for k in 1..=6 {
            let d = sample_findim_limit(k, &mut rng, &s).unwrap();
            assert_eq!(d.delta.iter().sum::<f64>(), 0.0);
            let scale = 2f64.powi(-(k as i32));
            for j in 0..d.delta.len() {
                let want =
                    scale * (k as f64 + d.rho[j] + d.eta_components[j] - d.eta_centered_limit);
                assert!((d.delta[j] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn k_one_is_the_fixed_point_map() {
        let mut a = RngStream::new(5);
        let s = SeriesSampler::new(10).unwrap().with_exact_levels(3);
        let d = sample_findim_limit(1, &mut a, &s).unwrap();
        let xi = d.v[1];
        let rhs = zeta_from_xi(xi) + 0.5 * (d.eta_components[0] + d.eta_components[1]);
        assert!((d.eta_centered_limit - rhs).abs() < 1e-12);
    }

    #[test]
    fn centered_limit_has_mean_zero() {
        let mut rng = RngStream::new(6);
        let s = SeriesSampler::new(20).unwrap().with_exact_levels(2);
        let n = 100_000;
        let m = (0..n)
            .map(|_| sample_findim_limit(3, &mut rng, &s).unwrap().eta_centered_limit)
            .sum::<f64>()
            / n as f64;
        assert!(m.abs() < 0.006, "mean {m}");
    }
}
