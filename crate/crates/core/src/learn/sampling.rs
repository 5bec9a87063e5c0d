//! Random-sampling best response used by the weighted-sum baseline.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::game::ActionValue;

/// Exploration probability and perturbation radius, both decaying
/// linearly over training progress in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplorationSchedule {
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub radius_start: f64,
    pub radius_end: f64,
}

impl Default for ExplorationSchedule {
    fn default() -> Self {
        Self { epsilon_start: 1.0, epsilon_end: 0.02, radius_start: 0.2, radius_end: 0.02 }
    }
}

impl ExplorationSchedule {
    pub fn epsilon(&self, progress: f64) -> f64 {
        lerp(self.epsilon_start, self.epsilon_end, progress)
    }

    pub fn radius(&self, progress: f64) -> f64 {
        lerp(self.radius_start, self.radius_end, progress)
    }
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    a + (b - a) * t
}

/// With probability `epsilon` a uniform action, otherwise `stored`
/// perturbed uniformly within `radius` and clamped to `[0, 1]`.
pub fn best_response_sample<R: Rng + ?Sized>(
    stored: ActionValue,
    epsilon: f64,
    radius: f64,
    rng: &mut R,
) -> ActionValue {
    if rng.random::<f64>() < epsilon {
        return ActionValue::clamped(rng.random::<f64>());
    }
    if radius <= 0.0 {
        return stored;
    }
    ActionValue::clamped(stored.get() + rng.random_range(-radius..=radius))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn epsilon_one_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let stored = ActionValue::new(0.9).unwrap();
        let draws: Vec<f64> = (0..4000).map(|_| best_response_sample(stored, 1.0, 0.0, &mut rng).get()).collect();
        let low = draws.iter().filter(|&&d| d < 0.5).count();
        assert!((1800..2200).contains(&low), "{low}");
    }

    #[test]
    fn greedy_without_radius_returns_stored() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let stored = ActionValue::new(0.37).unwrap();
        assert!((0..100).all(|_| best_response_sample(stored, 0.0, 0.0, &mut rng) == stored));
    }

    #[test]
    fn radius_window_is_clamped() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let stored = ActionValue::new(0.95).unwrap();
        for _ in 0..1000 {
            let a = best_response_sample(stored, 0.0, 0.1, &mut rng).get();
            assert!((0.85 - 1e-12..=1.0).contains(&a), "{a}");
        }
    }

    #[test]
    fn schedule_decays_linearly() {
        let s = ExplorationSchedule::default();
        assert_eq!(s.epsilon(0.0), 1.0);
        assert!((s.epsilon(1.0) - 0.02).abs() < 1e-15);
        assert!((s.epsilon(0.5) - 0.51).abs() < 1e-15);
        assert_eq!(s.epsilon(7.0), s.epsilon(1.0));
    }
}
