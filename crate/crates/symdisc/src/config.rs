//! Run configuration: grid sizes, search budgets, seeds, fingerprints.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Grid and refinement settings for torus/circle maximizations.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct GridConfig {
    /// Points per angle of the (n−1)-torus grid used by the two-point lower
    /// bound for n <= 4.
    pub coarse_torus: usize,
    /// Points on the unit circle for the sup-based membership oracle.
    pub coarse_circle: usize,
    /// Points on the unit circle for the infinitesimal lower bound.
    pub rho_grid: usize,
    /// Golden-section iterations per local refinement.
    pub refine_iters: usize,
    /// Random torus starts for the n >= 5 stochastic search.
    pub multistarts: usize,
    /// Stop threshold for refinement passes.
    pub tol: f64,
    /// Seed for every randomized piece of the grid machinery.
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            coarse_torus: 64,
            coarse_circle: 256,
            rho_grid: 4096,
            refine_iters: 60,
            multistarts: 64,
            tol: 1e-9,
            seed: 0x5eed,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.coarse_torus < 16 || self.coarse_circle < 16 || self.rho_grid < 16 {
            return Err(Error::Domain("grid sizes must be >= 16 points per angle".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain("grid tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Budgets for the analytic-disc upper-bound searches.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct SearchConfig {
    /// Polynomial degree of candidate discs.
    pub degree: usize,
    /// Independent optimizer restarts at the initial feasibility solve.
    pub restarts: usize,
    /// Simplex evaluations per restart.
    pub nm_maxfev: usize,
    /// Boundary samples used inside the optimizer loop.
    pub search_samples: usize,
    /// Boundary samples for final certificate validation.
    pub validate_samples: usize,
    /// Minimum accepted boundary margin of a validated disc.
    pub delta_min: f64,
    /// Absolute width at which the alpha bisection stops.
    pub bisect_tol: f64,
    /// Simplex evaluations for decomposition / chain refinement.
    pub refine_maxfev: usize,
    /// Enables the free (non-axis) split refinement for decompositions and
    /// the midpoint refinement for chains.
    pub refine_splits: bool,
    /// Seed for optimizer restarts.
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            degree: 6,
            restarts: 16,
            nm_maxfev: 2500,
            search_samples: 128,
            validate_samples: 512,
            delta_min: 1e-7,
            bisect_tol: 1e-5,
            refine_maxfev: 40,
            refine_splits: true,
            seed: 0x5eed,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.degree < 2 {
            return Err(Error::Domain("disc degree must be >= 2".into()));
        }
        if self.validate_samples < 256 {
            return Err(Error::Domain("validation requires >= 256 boundary samples".into()));
        }
        if !(self.delta_min > 0.0) || !(self.bisect_tol > 0.0) {
            return Err(Error::Domain("search thresholds must be positive".into()));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Everything a run depends on, bundled for reports and config files.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ConfigBundle {
    pub grid: GridConfig,
    pub search: SearchConfig,
}

impl ConfigBundle {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.search.validate()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.grid.seed = seed;
        self.search.seed = seed;
        self
    }

    /// SHA-256 over the canonical JSON serialization.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let digest = hasher.finalize();
        let mut out = String::with_capacity(64);
        for b in digest {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let bundle: ConfigBundle = serde_json::from_str(&text)?;
        bundle.validate()?;
        Ok(bundle)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fingerprint_is_stable_and_sensitive() {
        let a = ConfigBundle::default();
        let b = ConfigBundle::default();
        assert_eq!(a.fingerprint(), b.fingerprint());
        let mut c = ConfigBundle::default();
        c.search.degree = 8;
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn default_config_is_valid() {
        ConfigBundle::default().validate().unwrap();
    }

    #[test]
    fn rejects_tiny_grids() {
        let mut g = GridConfig::default();
        g.coarse_torus = 8;
        assert!(g.validate().is_err());
    }
}
