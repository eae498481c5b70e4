use serde::Serialize;

use crate::error::{Error, Result};
use crate::indexsets::DEFAULT_SIZE_CAP;

/// Which eigenvector source `solve` may use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyHint {
    /// Use a single coordinate matrix when its spectrum is separated, else a random combination.
    #[default]
    Auto,
    /// Always use a random combination.
    ForceGeneric,
}

/// Numerical thresholds and knobs shared by the library and the CLI.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Config {
    /// Relative commutator norm above which the family is declared non-commuting.
    pub tol_commute: f64,
    /// Eigenvalues closer than `tol_cluster · (1 + ‖A‖_F)` belong to one cluster.
    pub tol_cluster: f64,
    /// Singular values below `tol_rank · σ_max` count as zero.
    pub tol_rank: f64,
    /// Roots closer than `tol_dedup · (1 + max |z_i|)` are merged.
    pub tol_dedup: f64,
    /// Maximum relative residual of an accepted root.
    pub tol_accept: f64,
    /// Poisedness threshold on `σ_min / σ_max` of the Vandermonde matrix.
    pub tol_poised: f64,
    /// Eigenpair residual bound, relative to `1 + ‖A‖_F`.
    pub tol_eig: f64,
    pub seed: u64,
    pub refine_iters: usize,
    pub max_retries: usize,
    pub size_cap: usize,
    pub strategy: StrategyHint,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tol_commute: 1e-8,
            tol_cluster: 1e-7,
            tol_rank: 1e-10,
            tol_dedup: 1e-6,
            tol_accept: 1e-6,
            tol_poised: 1e-10,
            tol_eig: 1e-8,
            seed: 42,
            refine_iters: 3,
            max_retries: 5,
            size_cap: DEFAULT_SIZE_CAP,
            strategy: StrategyHint::Auto,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        let tols = [
            ("tol_commute", self.tol_commute),
            ("tol_cluster", self.tol_cluster),
            ("tol_rank", self.tol_rank),
            ("tol_dedup", self.tol_dedup),
            ("tol_accept", self.tol_accept),
            ("tol_poised", self.tol_poised),
            ("tol_eig", self.tol_eig),
        ];
        for (name, value) in tols {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be a positive finite number, got {value}"
                )));
            }
        }
        if self.max_retries == 0 {
            return Err(Error::InvalidParameter("max_retries must be at least 1".into()));
        }
        Ok(())
    }
}
