//! Leader-follower gradient laws on fitted surrogates.

use serde::{Deserialize, Serialize};

use super::noise::OuNoise;
use super::poly::PolyModel;
use crate::game::ActionValue;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaderGradient {
    pub value: f64,
    /// The follower curvature was too flat to invert; `value` is the plain
    /// leader partial.
    pub fallback: bool,
}

/// Leader learning field that anticipates the follower's best response:
///
/// `w_L = dU_L/da_L - (d2U_F/da_F da_L) (d2U_F/da_F^2)^-1 dU_L/da_F`
pub fn leader_gradient(
    leader: &PolyModel,
    follower: &PolyModel,
    a_l: f64,
    a_f: f64,
    hess_eps: f64,
) -> LeaderGradient {
    let direct = leader.d_leader(a_l, a_f);
    let curvature = follower.d_follower2(a_l, a_f);
    if curvature.abs() < hess_eps || !curvature.is_finite() {
        return LeaderGradient { value: direct, fallback: true };
    }
    let cross = follower.d_cross(a_l, a_f);
    let value = direct - cross / curvature * leader.d_follower(a_l, a_f);
    LeaderGradient { value, fallback: false }
}

/// Follower best-response field `dU_F/da_F`.
pub fn follower_gradient(follower: &PolyModel, a_l: f64, a_f: f64) -> f64 {
    follower.d_follower(a_l, a_f)
}

pub fn leader_update(cell: ActionValue, omega: f64, alpha: f64) -> ActionValue {
    ActionValue::clamped(cell.get() + alpha * omega)
}

/// Step size and velocity decay of the follower's momentum update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentumParams {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for MomentumParams {
    fn default() -> Self {
        Self { alpha: 0.5, beta: 0.4 }
    }
}

/// `v <- beta v + (1 - beta) w_F`, then `a_F <- clamp(a_F + alpha v + noise)`.
pub fn follower_update(
    cell: ActionValue,
    omega: f64,
    momentum: MomentumParams,
    velocity: &mut f64,
    noise: &mut OuNoise,
) -> ActionValue {
    *velocity = momentum.beta * *velocity + (1.0 - momentum.beta) * omega;
    ActionValue::clamped(cell.get() + momentum.alpha * *velocity + noise.sample())
}

/// Repeated follower updates against one fitted surrogate with the leader
/// action held fixed. The surrogate is not refitted inside the loop.
pub fn multi_step_follower(
    model: &PolyModel,
    a_l: f64,
    start: ActionValue,
    steps: usize,
    momentum: MomentumParams,
    velocity: &mut f64,
    noise: &mut OuNoise,
) -> ActionValue {
    let mut a_f = start;
    for _ in 0..steps {
        let omega = follower_gradient(model, a_l, a_f.get());
        a_f = follower_update(a_f, omega, momentum, velocity, noise);
    }
    a_f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::noise::OuParams;

    fn model(c: [f64; 6]) -> PolyModel {
        PolyModel::new(2, c.to_vec()).unwrap()
    }

    // U_L = -(a_L - 0.3)^2 = -0.09 + 0.6 a_L - a_L^2
    // U_F = -(a_F - a_L)^2 = -a_L^2 - a_F^2 + 2 a_L a_F
    #[test]
    fn leader_without_follower_coupling_is_plain_gradient() {
        let ul = model([-0.09, 0.6, 0.0, -1.0, 0.0, 0.0]);
        let uf = model([0.0, 0.0, 0.0, -1.0, -1.0, 2.0]);
        for (l, f) in [(0.1, 0.9), (0.3, 0.3), (0.8, 0.2)] {
            let g = leader_gradient(&ul, &uf, l, f, 1e-6);
            assert!(!g.fallback);
            assert!((g.value - (-2.0 * (l - 0.3))).abs() < 1e-12);
        }
    }

    // U_L = a_L + a_F, U_F = -a_F^2/2 + a_L a_F => w_L = 1 - (1)(-1)^-1 (1) = 2
    #[test]
    fn hand_evaluated_stackelberg_field() {
        let ul = model([0.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        let uf = model([0.0, 0.0, 0.0, 0.0, -0.5, 1.0]);
        let g = leader_gradient(&ul, &uf, 0.37, 0.81, 1e-6);
        assert!(!g.fallback);
        assert!((g.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn flat_follower_falls_back() {
        let ul = model([0.0, 1.5, 1.0, 0.0, 0.0, 0.0]);
        let uf = model([0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let g = leader_gradient(&ul, &uf, 0.5, 0.5, 1e-6);
        assert!(g.fallback);
        assert_eq!(g.value, 1.5);
    }

    #[test]
    fn follower_gradient_examples() {
        // -(a_F - 0.6)^2 = -0.36 + 1.2 a_F - a_F^2
        let uf = model([-0.36, 0.0, 1.2, 0.0, -1.0, 0.0]);
        assert!((follower_gradient(&uf, 0.2, 0.1) - 1.0).abs() < 1e-12);
        assert_eq!(follower_gradient(&model([3.0, 0.0, 0.0, 0.0, 0.0, 0.0]), 0.4, 0.4), 0.0);
        assert_eq!(follower_gradient(&model([0.0, 0.0, 0.0, 0.0, 0.0, 1.0]), 0.7, 0.1), 0.7);
    }

    #[test]
    fn leader_update_examples() {
        let a = ActionValue::new(0.5).unwrap();
        assert!((leader_update(a, 0.2, 0.4).get() - 0.58).abs() < 1e-15);
        assert_eq!(leader_update(a, 5.0, 0.4).get(), 1.0);
        assert_eq!(leader_update(a, 0.0, 0.4), a);
    }

    #[test]
    fn follower_update_examples() {
        let mut noise = OuNoise::disabled();
        let m = MomentumParams { alpha: 0.5, beta: 0.0 };
        let mut v = 0.0;
        let out = follower_update(ActionValue::new(0.2).unwrap(), 0.4, m, &mut v, &mut noise);
        assert!((out.get() - 0.4).abs() < 1e-15);

        let mut v = 0.0;
        let a = ActionValue::new(0.3).unwrap();
        assert_eq!(follower_update(a, 0.0, MomentumParams::default(), &mut v, &mut noise), a);

        let mut silent = OuNoise::new(OuParams { enabled: true, sigma: 0.0, ..Default::default() }, 1);
        let (mut v1, mut v2) = (0.1, 0.1);
        assert_eq!(
            follower_update(a, 0.3, MomentumParams::default(), &mut v1, &mut silent),
            follower_update(a, 0.3, MomentumParams::default(), &mut v2, &mut noise)
        );
    }

    #[test]
    fn multi_step_examples() {
        let uf = model([-0.36, 0.0, 1.2, 0.0, -1.0, 0.0]);
        let start = ActionValue::new(0.1).unwrap();
        let m = MomentumParams::default();
        let mut noise = OuNoise::disabled();

        let (mut v1, mut v2) = (0.0, 0.0);
        let one = multi_step_follower(&uf, 0.5, start, 1, m, &mut v1, &mut noise);
        let single = follower_update(start, follower_gradient(&uf, 0.5, 0.1), m, &mut v2, &mut noise);
        assert_eq!(one, single);
        assert_eq!(v1, v2);

        // argmax of -(a_F - 0.6)^2 is 0.6
        let mut v = 0.0;
        let conv = multi_step_follower(&uf, 0.5, start, 200, m, &mut v, &mut noise);
        assert!((conv.get() - 0.6).abs() < 1e-3);

        let rising = model([0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let mut v = 0.0;
        assert_eq!(multi_step_follower(&rising, 0.5, start, 50, m, &mut v, &mut noise).get(), 1.0);
    }
}
