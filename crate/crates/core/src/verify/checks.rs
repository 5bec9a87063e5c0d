use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::env::{RolePair, RoleSel, UtilityEnv};
use crate::error::Result;

/// A sampled point whose residual reached the tolerance. Players are
/// reported 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub sample: usize,
    pub player: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub role: Option<RoleSel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    pub samples: usize,
    pub tolerance: f64,
    /// Largest residual seen over all samples.
    pub max_residual: f64,
    /// True when every residual is strictly below the tolerance.
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl ConditionReport {
    fn new(condition: &str, samples: usize, tolerance: f64) -> Self {
        Self { condition: condition.into(), samples, tolerance, max_residual: 0.0, passed: true, violations: Vec::new() }
    }

    fn record(&mut self, value: f64, violation: impl FnOnce(f64) -> Violation) {
        let value = if value.is_nan() { f64::INFINITY } else { value.abs() };
        self.max_residual = self.max_residual.max(value);
        if !(value < self.tolerance) {
            self.passed = false;
            self.violations.push(violation(value));
        }
    }

    /// Distinct `(player, other)` pairs among the violations.
    pub fn offending_pairs(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = self.violations.iter().filter_map(|x| x.other.map(|o| (x.player, o))).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

fn random_roles(n: usize, h: f64, rng: &mut ChaCha8Rng) -> Vec<RolePair> {
    (0..n)
        .map(|_| RolePair { leader: rng.random_range(h..=1.0 - h), follower: rng.random_range(h..=1.0 - h) })
        .collect()
}

/// Central differences of every player's objectives with respect to every
/// other player's role actions. Separable utilities give zero.
pub fn check_cross_partials(
    env: &dyn UtilityEnv,
    samples: usize,
    tolerance: f64,
    h: f64,
    seed: u64,
) -> Result<ConditionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = env.players();
    let mut report = ConditionReport::new("cross_partials", samples, tolerance);
    for sample in 0..samples {
        let state = env.sample_state(&mut rng);
        let roles = random_roles(n, h, &mut rng);
        for j in 0..n {
            for role in [RoleSel::Leader, RoleSel::Follower] {
                let mut plus = roles.clone();
                let mut minus = roles.clone();
                plus[j].set(role, roles[j].get(role) + h);
                minus[j].set(role, roles[j].get(role) - h);
                let up = env.objectives(&state, &plus)?;
                let down = env.objectives(&state, &minus)?;
                for i in (0..n).filter(|&i| i != j) {
                    for (k, (a, b)) in up[i].iter().zip(&down[i]).enumerate() {
                        let d = (a - b) / (2.0 * h);
                        report.record(d, |value| Violation {
                            sample,
                            player: i + 1,
                            other: Some(j + 1),
                            role: Some(role),
                            objective: Some(k),
                            state: None,
                            value,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Sum of a player's objectives.
pub fn player_utility(objectives: &[f64]) -> f64 {
    objectives.iter().sum()
}

/// `|dU_i - dphi|` for one unilateral deviation of player `player`.
pub fn alignment_residual(
    env: &dyn UtilityEnv,
    potential: &dyn Fn(&[Vec<f64>]) -> f64,
    state: &[f64],
    roles: &[RolePair],
    player: usize,
    deviation: RolePair,
) -> Result<f64> {
    let before = env.objectives(state, roles)?;
    let mut moved = roles.to_vec();
    moved[player] = deviation;
    let after = env.objectives(state, &moved)?;
    let du = player_utility(&after[player]) - player_utility(&before[player]);
    let dphi = potential(&after) - potential(&before);
    Ok((du - dphi).abs())
}

/// `phi = sum_i U_i`.
pub fn sum_potential(objectives: &[Vec<f64>]) -> f64 {
    objectives.iter().map(|u| player_utility(u)).sum()
}

/// Compares utility and potential changes under random unilateral
/// deviations.
pub fn check_potential_alignment(
    env: &dyn UtilityEnv,
    potential: &dyn Fn(&[Vec<f64>]) -> f64,
    samples: usize,
    tolerance: f64,
    seed: u64,
) -> Result<ConditionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = env.players();
    let mut report = ConditionReport::new("potential_alignment", samples, tolerance);
    for sample in 0..samples {
        let state = env.sample_state(&mut rng);
        let roles = random_roles(n, 0.0, &mut rng);
        let player = rng.random_range(0..n);
        let deviation = RolePair { leader: rng.random(), follower: rng.random() };
        let r = alignment_residual(env, potential, &state, &roles, player, deviation)?;
        report.record(r, |value| Violation {
            sample,
            player: player + 1,
            other: None,
            role: None,
            objective: None,
            state: None,
            value,
        });
    }
    Ok(report)
}

/// For each state entry shared by several players, the spread of their
/// utilities' central differences with respect to that entry.
pub fn check_state_partials(
    env: &dyn UtilityEnv,
    samples: usize,
    tolerance: f64,
    h: f64,
    seed: u64,
) -> Result<ConditionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = env.players();
    let shared = env.shared_states();
    let mut report = ConditionReport::new("shared_state_partials", samples, tolerance);
    for sample in 0..samples {
        let state = env.sample_state(&mut rng);
        let roles = random_roles(n, 0.0, &mut rng);
        for (s, players) in &shared {
            let mut plus = state.clone();
            let mut minus = state.clone();
            plus[*s] += h;
            minus[*s] -= h;
            let up = env.objectives(&plus, &roles)?;
            let down = env.objectives(&minus, &roles)?;
            let d: Vec<f64> =
                players.iter().map(|&p| (player_utility(&up[p]) - player_utility(&down[p])) / (2.0 * h)).collect();
            let first = d[0];
            for (&p, &v) in players.iter().zip(&d).skip(1) {
                report.record(v - first, |value| Violation {
                    sample,
                    player: p + 1,
                    other: Some(players[0] + 1),
                    role: None,
                    objective: None,
                    state: Some(*s),
                    value,
                });
            }
        }
    }
    Ok(report)
}
