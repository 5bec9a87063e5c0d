use serde::{Deserialize, Serialize};

use super::gradient::MomentumParams;
use super::noise::OuParams;
use super::sampling::ExplorationSchedule;
use crate::error::{Error, Result};
use crate::game::CoalitionMode;
use crate::maps::DEFAULT_GAMMA;

/// Learner hyperparameters shared by all players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    /// Leader step size.
    pub alpha: f64,
    pub follower_steps: usize,
    pub poly_degree: usize,
    pub ridge: f64,
    pub hess_eps: f64,
    pub momentum: MomentumParams,
    pub buffer_capacity: usize,
    pub ou: OuParams,
    pub coalition: CoalitionMode,
    pub exploration: ExplorationSchedule,
    /// Keep the latest fitted coefficients per cell for inspection.
    pub record_fits: bool,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            alpha: 0.4,
            follower_steps: 5,
            poly_degree: 2,
            ridge: 1e-8,
            hess_eps: 1e-6,
            momentum: MomentumParams::default(),
            buffer_capacity: 32,
            ou: OuParams::default(),
            coalition: CoalitionMode::Additive,
            exploration: ExplorationSchedule::default(),
            record_fits: false,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.alpha > 0.0) {
            return bad(format!("alpha must be > 0, got {}", self.alpha));
        }
        if self.poly_degree < 2 {
            return bad(format!("poly_degree must be >= 2, got {}", self.poly_degree));
        }
        if self.follower_steps < 1 {
            return bad("follower_steps must be >= 1".into());
        }
        if self.buffer_capacity < 1 {
            return bad("buffer_capacity must be >= 1".into());
        }
        if !(self.ridge >= 0.0) || !(self.hess_eps >= 0.0) {
            return bad("ridge and hess_eps must be >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.momentum.beta) || !(self.momentum.alpha > 0.0) {
            return bad("momentum needs alpha > 0 and beta in [0, 1]".into());
        }
        let e = &self.exploration;
        if [e.epsilon_start, e.epsilon_end, e.radius_start, e.radius_end].iter().any(|v| !(0.0..=1.0).contains(v)) {
            return bad("exploration schedule values must lie in [0, 1]".into());
        }
        Ok(())
    }
}

/// Geometry and initialization of the performance maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub points_per_dim: usize,
    /// Layers of the stacked follower maps.
    pub layers: usize,
    pub gamma: f64,
    pub init_action: f64,
    /// Start of the follower maps. Under additive coalitions a zero start
    /// makes the initial coalition equal the leader's action.
    pub follower_init_action: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self { points_per_dim: 40, layers: 15, gamma: DEFAULT_GAMMA, init_action: 0.5, follower_init_action: 0.0 }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.points_per_dim < 2 {
            return Err(Error::Config("points_per_dim must be >= 2".into()));
        }
        if self.layers < 1 {
            return Err(Error::Config("layers must be >= 1".into()));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidGamma(self.gamma));
        }
        for a in [self.init_action, self.follower_init_action] {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::ActionOutOfRange(a));
            }
        }
        Ok(())
    }
}
