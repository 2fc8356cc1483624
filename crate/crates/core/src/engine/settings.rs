use crate::error::{check_positive, Error, Result};

/// Iteration counts, trajectory lengths and tuning constants for one chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McmcSettings {
    /// Iterations in the initial phase (treated as burn-in).
    pub n1: usize,
    /// Leapfrog steps per HMC update in the initial phase.
    pub l1: usize,
    /// Iterations in the sampling phase.
    pub n2: usize,
    /// Leapfrog steps per HMC update in the sampling phase.
    pub l2: usize,
    /// Stepsize adjustment factor.
    pub eps: f64,
    /// Features with `sigma_j <= zeta` are frozen during the HMC step.
    pub zeta: f64,
    /// Keep every `thin`-th sampling-phase draw.
    pub thin: usize,
    pub seed: u64,
}

/// `max(1, n2 / 10000)`.
pub fn default_thin(n2: usize) -> usize {
    (n2 / 10_000).max(1)
}

impl McmcSettings {
    /// Settings with `thin` set by [`default_thin`].
    pub fn new(n1: usize, l1: usize, n2: usize, l2: usize, eps: f64, zeta: f64, seed: u64) -> Self {
        Self {
            n1,
            l1,
            n2,
            l2,
            eps,
            zeta,
            thin: default_thin(n2),
            seed,
        }
    }

    pub fn with_thin(mut self, thin: usize) -> Self {
        self.thin = thin;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n2", self.n2),
            ("l1", self.l1),
            ("l2", self.l2),
            ("thin", self.thin),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::InvalidParameter { name, value: 0.0 });
            }
        }
        check_positive("eps", self.eps)?;
        if !(self.zeta >= 0.0 && self.zeta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "zeta",
                value: self.zeta,
            });
        }
        Ok(())
    }

    /// Number of draws a completed chain stores.
    pub fn stored_draws(&self) -> usize {
        self.n2 / self.thin
    }
}

impl Default for McmcSettings {
    /// The settings used for the larger simulated examples: 50K/10 then 500K/50.
    fn default() -> Self {
        Self::new(50_000, 10, 500_000, 50, 0.3, 0.05, 0)
    }
}
