// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Theta;
use crate::rng::SeedTriple;

/// Hard cap on photons sent in one key-distribution attempt.
pub const PHOTON_CAP: u64 = 1_000_000_000;

/// Parameters both parties agree on publicly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionParams {
    pub n_items: usize,
    pub k: usize,
    pub theta: Theta,
    pub loss: f64,
}

impl SessionParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_items == 0 {
            return Err(Error::Domain("database size must be at least 1".into()));
        }
        if self.n_items > u32::MAX as usize {
            return Err(Error::Domain(format!("database size {} exceeds 2^32 - 1", self.n_items)));
        }
        if self.k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        if self.k.checked_mul(self.n_items).is_none_or(|kn| kn as u64 > PHOTON_CAP) {
            return Err(Error::Domain("raw key length kN is too large".into()));
        }
        if !(0.0..1.0).contains(&self.loss) {
            return Err(Error::Domain(format!("loss rate {} outside [0, 1)", self.loss)));
        }
        Ok(())
    }

    pub fn raw_len(&self) -> usize {
        self.k * self.n_items
    }

    /// `sin^2(theta) / 2`.
    pub fn conclusive_probability(&self) -> f64 {
        0.5 * self.theta.radians().sin().powi(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub params: SessionParams,
    /// Probability that the channel flips Alice's outcome.
    pub noise: f64,
    /// Photons prepared per round; `None` uses [`SessionConfig::default_batch`].
    pub photon_batch: Option<usize>,
    pub seeds: SeedTriple,
    pub max_restarts: u32,
    /// Fraction of Alice's known final-key bits to reveal for an error-rate
    /// check before querying; `None` skips the check.
    pub error_sample: Option<f64>,
    /// Error rate above which Alice discards the key.
    pub error_threshold: f64,
}

impl SessionConfig {
    pub fn new(n_items: usize, k: usize, theta: Theta, seed: u64) -> Self {
        Self {
            params: SessionParams {
                n_items,
                k,
                theta,
                loss: 0.0,
            },
            noise: 0.0,
            photon_batch: None,
            seeds: SeedTriple::from_master(seed),
            max_restarts: 20,
            error_sample: None,
            error_threshold: 0.15,
        }
    }

    pub fn with_loss(mut self, loss: f64) -> Self {
        self.params.loss = loss;
        self
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_seeds(mut self, seeds: SeedTriple) -> Self {
        self.seeds = seeds;
        self
    }

    pub fn with_max_restarts(mut self, max_restarts: u32) -> Self {
        self.max_restarts = max_restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::Domain(format!("noise {} outside [0, 1]", self.noise)));
        }
        if self.photon_batch == Some(0) {
            return Err(Error::Domain("photon batch must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.error_threshold) {
            return Err(Error::Domain("error threshold outside [0, 1]".into()));
        }
        Ok(())
    }

    /// `ceil(2kN / (1 - loss))`: twice the expected photon count needed for
    /// kN retained bits.
    pub fn default_batch(&self) -> usize {
        let kn = self.params.raw_len() as f64;
        (2.0 * kn / (1.0 - self.params.loss)).ceil().max(1.0) as usize
    }

    pub fn batch(&self) -> usize {
        self.photon_batch.unwrap_or_else(|| self.default_batch())
    }
}
