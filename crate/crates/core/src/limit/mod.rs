//! Limit objects: the fixed point `η_∞` and its series representation,
//! moment generating functions, the finite-dimensional limits of the
//! integrated silhouette, the operator `Ψ`, and the Quicksort fixed point
//! used for contrast.

mod findim;
mod psi;
mod quicksort;
mod series;
mod special;

pub use findim::{sample_findim_limit, sample_rho_v, LimitFinDim, RhoV, MAX_FINDIM_K, MAX_RHO_K};
pub use psi::{
    phi_tent, psi_apply, psi_apply_capped, psi_map, GridFunction, PsiSample, DEFAULT_PSI_CAP,
};
pub use quicksort::{quicksort_pool, quicksort_toll, sample_quicksort_limit, MAX_QUICKSORT_ITERATIONS};
pub use series::{
    sample_eta_inf, sample_zeta, zeta_from_xi, SeriesSampler, DEFAULT_EXACT_LEVELS,
    DEFAULT_LEVELS, MAX_LEVELS,
};
pub use special::{
    harmonic, ln_mgf_zeta, mgf_eta_inf, mgf_zeta, DEFAULT_MGF_LEVELS, ETA_INF_VARIANCE,
    ZETA_MAX, ZETA_VARIANCE,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LimitError {
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("{0} series levels requested; at most 30 are supported")]
    LevelOverflow(u32),
    #[error("the sample pool is empty")]
    EmptyPool,
}
