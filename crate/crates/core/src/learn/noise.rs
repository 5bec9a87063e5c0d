use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OuParams {
    pub enabled: bool,
    pub theta: f64,
    pub sigma: f64,
    pub mu: f64,
    pub dt: f64,
}

impl Default for OuParams {
    fn default() -> Self {
        Self { enabled: false, theta: 0.15, sigma: 0.2, mu: 0.0, dt: 1.0 }
    }
}

/// Ornstein-Uhlenbeck process `dx = theta (mu - x) dt + sigma dW`.
///
/// Owns its random stream so that switching it on or off never shifts the
/// draws of anything else.
#[derive(Debug, Clone)]
pub struct OuNoise {
    params: OuParams,
    state: f64,
    rng: ChaCha8Rng,
}

impl OuNoise {
    pub fn new(params: OuParams, seed: u64) -> Self {
        Self { params, state: params.mu, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn disabled() -> Self {
        Self::new(OuParams::default(), 0)
    }

    pub fn sample(&mut self) -> f64 {
        if !self.params.enabled {
            return 0.0;
        }
        let p = &self.params;
        let z: f64 = StandardNormal.sample(&mut self.rng);
        self.state += p.theta * (p.mu - self.state) * p.dt + p.sigma * p.dt.sqrt() * z;
        self.state
    }

    pub fn reset(&mut self) {
        self.state = self.params.mu;
    }
}
