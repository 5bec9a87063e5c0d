//! Per-player learners: the weighted-sum best-response learner and the
//! stacked leader-follower learner (single leader-follower is `k = 2`).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::buffer::{Sample, SampleBuffer};
use super::config::{LearnerConfig, PolicyConfig};
use super::gradient::{leader_gradient, leader_update, multi_step_follower};
use super::noise::OuNoise;
use super::poly::{fit_poly, PolyModel, Role};
use super::sampling::best_response_sample;
use super::derive_seed;
use crate::error::Result;
use crate::game::{coalition_combine, ActionValue, ObjectiveKind, ObjectiveTerms, PlayerGame, VanillaWeights};
use crate::maps::{PerformanceMap, StackedMap, StoredMap, SupportGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Learning on; `progress` runs from 0 (first episode) to 1 (last).
    Train { progress: f64 },
    /// Greedy policy read-out; nothing is written.
    Eval,
}

impl Mode {
    pub fn is_training(self) -> bool {
        matches!(self, Mode::Train { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoleActions {
    pub leader: ActionValue,
    pub follower: ActionValue,
    pub layer: usize,
}

/// Output of one decision; handed back to [`PlayerLearner::observe`] once
/// the control window has been evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub action: ActionValue,
    pub cell: usize,
    pub roles: Vec<RoleActions>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LearnerStats {
    pub decisions: u64,
    pub games_played: u64,
    pub fits: u64,
    pub exploration_only: u64,
    pub hessian_fallbacks: u64,
    pub gate_closed: u64,
}

#[derive(Debug, Clone, Serialize)]
struct FitRecord {
    leader: Vec<f64>,
    follower: Vec<f64>,
}

pub enum PlayerLearner {
    Vanilla(VanillaLearner),
    Stacked(StackLearner),
}

impl PlayerLearner {
    pub fn new(
        game: &PlayerGame,
        state_dims: usize,
        policy: &PolicyConfig,
        cfg: &LearnerConfig,
        seed: u64,
    ) -> Result<Self> {
        policy.validate()?;
        cfg.validate()?;
        let grid = SupportGrid::unit(state_dims, policy.points_per_dim)?;
        let init = ActionValue::new(policy.init_action)?;
        let follower_init = ActionValue::new(policy.follower_init_action)?;
        Ok(match game {
            PlayerGame::Vanilla { weights } => PlayerLearner::Vanilla(VanillaLearner {
                weights: *weights,
                map: PerformanceMap::new(grid, init),
                gamma: policy.gamma,
                cfg: cfg.clone(),
                rng: ChaCha8Rng::seed_from_u64(seed),
                stats: LearnerStats::default(),
            }),
            PlayerGame::Stacked { objectives, hierarchy, beta, theta } => {
                let levels = hierarchy.resolve(objectives).into_iter().map(|o| o.kind.clone()).collect();
                let games = (0..hierarchy.games())
                    .map(|z| FollowerGame {
                        map: StackedMap::new(grid.clone(), policy.layers, follower_init),
                        velocity: vec![0.0; policy.layers * grid.len()],
                        buffer: SampleBuffer::new(grid.len(), cfg.buffer_capacity),
                        noise: OuNoise::new(cfg.ou, derive_seed(seed, 1 + z as u64)),
                    })
                    .collect();
                PlayerLearner::Stacked(StackLearner {
                    levels,
                    beta: beta.clone(),
                    theta: theta.clone(),
                    leader: PerformanceMap::new(grid, init),
                    games,
                    gamma: policy.gamma,
                    cfg: cfg.clone(),
                    rng: ChaCha8Rng::seed_from_u64(seed),
                    stats: LearnerStats::default(),
                    fits: cfg.record_fits.then(BTreeMap::new),
                })
            }
        })
    }

    pub fn decide(&mut self, state: &[f64], mode: Mode) -> Result<Decision> {
        match self {
            PlayerLearner::Vanilla(v) => v.decide(state, mode),
            PlayerLearner::Stacked(s) => s.stacked_step(state, mode),
        }
    }

    pub fn observe(&mut self, decision: &Decision, terms: &ObjectiveTerms, mode: Mode) -> Result<()> {
        if !mode.is_training() {
            return Ok(());
        }
        match self {
            PlayerLearner::Vanilla(v) => v.observe(decision, terms),
            PlayerLearner::Stacked(s) => {
                s.observe(decision, terms);
                Ok(())
            }
        }
    }

    pub fn stats(&self) -> &LearnerStats {
        match self {
            PlayerLearner::Vanilla(v) => &v.stats,
            PlayerLearner::Stacked(s) => &s.stats,
        }
    }

    /// Named maps for persistence.
    pub fn maps(&self) -> Vec<(String, StoredMap)> {
        match self {
            PlayerLearner::Vanilla(v) => vec![("policy".into(), StoredMap::Single(v.map.clone()))],
            PlayerLearner::Stacked(s) => {
                let mut out = vec![("leader".into(), StoredMap::Single(s.leader.clone()))];
                for (z, g) in s.games.iter().enumerate() {
                    out.push((format!("follower{}", z + 1), StoredMap::Stacked(g.map.clone())));
                }
                out
            }
        }
    }

    /// Latest fitted coefficients per `(game, cell)`, when recording is on.
    pub fn fit_log(&self) -> Option<serde_json::Value> {
        match self {
            PlayerLearner::Stacked(StackLearner { fits: Some(f), .. }) => Some(
                f.iter()
                    .map(|((z, cell), rec)| {
                        serde_json::json!({ "game": z + 1, "cell": cell, "leader": rec.leader, "follower": rec.follower })
                    })
                    .collect(),
            ),
            _ => None,
        }
    }
}

pub struct VanillaLearner {
    weights: VanillaWeights,
    map: PerformanceMap,
    gamma: f64,
    cfg: LearnerConfig,
    rng: ChaCha8Rng,
    stats: LearnerStats,
}

impl VanillaLearner {
    fn decide(&mut self, state: &[f64], mode: Mode) -> Result<Decision> {
        self.stats.decisions += 1;
        let cell = self.map.grid().nearest_cell(state);
        let action = match mode {
            Mode::Eval => self.map.interpolate(state, self.gamma)?,
            Mode::Train { progress } => {
                let stored = if self.map.cell(cell).visited() {
                    self.map.cell(cell).action
                } else {
                    self.map.interpolate(state, self.gamma)?
                };
                let sched = &self.cfg.exploration;
                best_response_sample(stored, sched.epsilon(progress), sched.radius(progress), &mut self.rng)
            }
        };
        Ok(Decision { action, cell, roles: Vec::new() })
    }

    fn observe(&mut self, decision: &Decision, terms: &ObjectiveTerms) -> Result<()> {
        let u = self.weights.utility(terms);
        self.map.update_cell(decision.cell, decision.action, u)?;
        Ok(())
    }
}

struct FollowerGame {
    map: StackedMap,
    /// Momentum per `(layer, cell)`.
    velocity: Vec<f64>,
    buffer: SampleBuffer,
    noise: OuNoise,
}

pub struct StackLearner {
    /// Objectives in hierarchy order.
    levels: Vec<ObjectiveKind>,
    beta: Vec<f64>,
    theta: Vec<Option<f64>>,
    leader: PerformanceMap,
    games: Vec<FollowerGame>,
    gamma: f64,
    cfg: LearnerConfig,
    rng: ChaCha8Rng,
    stats: LearnerStats,
    fits: Option<BTreeMap<(usize, usize), FitRecord>>,
}

impl StackLearner {
    pub fn games(&self) -> usize {
        self.games.len()
    }

    fn dither(&mut self, a: ActionValue, mode: Mode) -> ActionValue {
        let Mode::Train { progress } = mode else { return a };
        let d = self.cfg.exploration.radius(progress);
        if d <= 0.0 {
            return a;
        }
        ActionValue::clamped(a.get() + self.rng.random_range(-d..=d))
    }

    /// One decision through the chain of leader-follower games.
    ///
    /// Game 1's leader reads its own map and, when a fit is available,
    /// takes the anticipating gradient step. Every follower reads the
    /// layer selected by its leader's action and takes multi-step
    /// best-response updates. Each coalition becomes the next game's
    /// leader; the last coalition is executed. Executed actions are the
    /// pre-update policy outputs, dithered by the exploration radius
    /// during training so that per-cell fits see spread inputs.
    pub fn stacked_step(&mut self, state: &[f64], mode: Mode) -> Result<Decision> {
        let training = mode.is_training();
        self.stats.decisions += 1;
        let grid = self.leader.grid();
        let cell = grid.nearest_cell(&grid.clamp(state));
        let cells = grid.len();

        let lead_policy = self.leader.interpolate(state, self.gamma)?;
        let mut leader_exec = self.dither(lead_policy, mode);
        let mut roles = Vec::with_capacity(self.games.len());

        for z in 0..self.games.len() {
            self.stats.games_played += 1;
            let layer = self.games[z].map.layer_for(leader_exec);
            let follow_policy = self.games[z].map.layer(layer).interpolate(state, self.gamma)?;

            if training {
                let fitted = self.fit(z, cell);
                match fitted {
                    Some((m_l, m_f)) => {
                        self.stats.fits += 1;
                        if z == 0 {
                            let g = leader_gradient(&m_l, &m_f, lead_policy.get(), follow_policy.get(), self.cfg.hess_eps);
                            if g.fallback {
                                self.stats.hessian_fallbacks += 1;
                            }
                            let updated = leader_update(lead_policy, g.value, self.cfg.alpha);
                            self.leader.set_action(cell, updated);
                        }
                        let game = &mut self.games[z];
                        let slot = layer * cells + cell;
                        let updated = multi_step_follower(
                            &m_f,
                            leader_exec.get(),
                            follow_policy,
                            self.cfg.follower_steps,
                            self.cfg.momentum,
                            &mut game.velocity[slot],
                            &mut game.noise,
                        );
                        game.map.layer_mut(layer).set_action(cell, updated);
                    }
                    None => self.stats.exploration_only += 1,
                }
            }

            let follower_exec = self.dither(follow_policy, mode);
            roles.push(RoleActions { leader: leader_exec, follower: follower_exec, layer });
            leader_exec = coalition_combine(leader_exec, follower_exec, self.cfg.coalition);
        }

        Ok(Decision { action: leader_exec, cell, roles })
    }

    fn fit(&mut self, z: usize, cell: usize) -> Option<(PolyModel, PolyModel)> {
        let samples = self.games[z].buffer.samples(cell);
        let m_l = fit_poly(samples, Role::Leader, self.cfg.poly_degree, self.cfg.ridge).ok()?;
        let m_f = fit_poly(samples, Role::Follower, self.cfg.poly_degree, self.cfg.ridge).ok()?;
        if let Some(log) = self.fits.as_mut() {
            log.insert((z, cell), FitRecord { leader: m_l.coeffs().to_vec(), follower: m_f.coeffs().to_vec() });
        }
        Some((m_l, m_f))
    }

    /// Role utilities of game `z` (0-based): the leader scores the sum of
    /// the objectives up to its level, the follower trades that sum against
    /// the next objective. A closed gate zeroes the follower utility.
    pub fn role_utilities(&self, z: usize, terms: &ObjectiveTerms) -> (f64, f64) {
        let u_l: f64 = self.levels[..=z].iter().map(|k| k.evaluate(terms)).sum();
        let u_next = self.levels[z + 1].evaluate(terms);
        let beta = self.beta[z];
        let gated = self.theta[z].is_some_and(|t| u_l < t);
        let u_f = if gated { 0.0 } else { beta * u_l + (1.0 - beta) * u_next };
        (u_l, u_f)
    }

    fn observe(&mut self, decision: &Decision, terms: &ObjectiveTerms) {
        for (z, role) in decision.roles.iter().enumerate() {
            let (u_l, u_f) = self.role_utilities(z, terms);
            if self.theta[z].is_some_and(|t| u_l < t) {
                self.stats.gate_closed += 1;
            }
            let sample = Sample { a_l: role.leader.get(), a_f: role.follower.get(), u_l, u_f };
            self.games[z].buffer.push(decision.cell, sample);
        }
    }

    #[cfg(test)]
    pub(crate) fn buffer_samples(&mut self, z: usize, cell: usize) -> Vec<Sample> {
        self.games[z].buffer.samples(cell).to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameVariant, ObjectiveKind};

    fn kinds(demand: bool) -> Vec<ObjectiveKind> {
        let mut k = vec![
            ObjectiveKind::BottleneckOverflowPrev,
            ObjectiveKind::BottleneckOverflowNext,
            ObjectiveKind::Power,
        ];
        if demand {
            k.push(ObjectiveKind::Demand);
        }
        k
    }

    fn stack_variant() -> GameVariant {
        GameVariant::Stack {
            hierarchy: vec![
                ObjectiveKind::BottleneckOverflowNext,
                ObjectiveKind::BottleneckOverflowPrev,
                ObjectiveKind::Demand,
                ObjectiveKind::Power,
            ],
            beta_l: vec![0.5, 0.65, 0.75],
            theta_l: None,
        }
    }

    fn policy() -> PolicyConfig {
        PolicyConfig { points_per_dim: 5, layers: 15, ..Default::default() }
    }

    fn stacked(game: &PlayerGame, cfg: &LearnerConfig) -> StackLearner {
        match PlayerLearner::new(game, 2, &policy(), cfg, 9).unwrap() {
            PlayerLearner::Stacked(s) => s,
            _ => unreachable!(),
        }
    }

    #[test]
    fn final_player_plays_three_games_per_step() {
        let game = stack_variant().for_player(&kinds(true)).unwrap();
        let mut s = stacked(&game, &LearnerConfig::default());
        let d = s.stacked_step(&[0.4, 0.6], Mode::Train { progress: 0.0 }).unwrap();
        assert_eq!(d.roles.len(), 3);
        assert_eq!(s.stats.games_played, 3);
    }

    #[test]
    fn fixed_point_executes_fold_of_initial_actions() {
        let game = stack_variant().for_player(&kinds(false)).unwrap();
        let mut cfg = LearnerConfig::default();
        cfg.exploration.radius_start = 0.0;
        let policy = PolicyConfig { init_action: 0.2, follower_init_action: 0.2, ..policy() };
        let mut s = match PlayerLearner::new(&game, 2, &policy, &cfg, 1).unwrap() {
            PlayerLearner::Stacked(s) => s,
            _ => unreachable!(),
        };
        let d = s.stacked_step(&[0.5, 0.5], Mode::Train { progress: 0.0 }).unwrap();
        let a = ActionValue::new(0.2).unwrap();
        let expect = coalition_combine(coalition_combine(a, a, cfg.coalition), a, cfg.coalition);
        assert_eq!(d.action, expect);
        assert_eq!(s.stats.exploration_only, 2);
    }

    #[test]
    fn gate_zeroes_follower_samples() {
        let v = GameVariant::Ds2 {
            leader: vec![ObjectiveKind::bottleneck()],
            follower: vec![ObjectiveKind::Power],
            beta_l: 0.65,
            theta_l: Some(2.0),
        };
        let game = v.for_player(&kinds(false)).unwrap();
        let mut s = stacked(&game, &LearnerConfig::default());
        let d = s.stacked_step(&[0.1, 0.9], Mode::Train { progress: 0.0 }).unwrap();
        let bad = ObjectiveTerms { fill_prev: 0.5, fill_next: 1.0, power: 0.8, demand: None };
        s.observe(&d, &bad);
        let good = ObjectiveTerms { fill_prev: 1.0, fill_next: 1.0, power: 0.8, demand: None };
        s.observe(&d, &good);
        let samples = s.buffer_samples(0, d.cell);
        assert_eq!(samples[0].u_f, 0.0);
        assert_eq!(samples[0].u_l, 1.5);
        assert!((samples[1].u_f - (0.65 * 2.0 + 0.35 * 0.8)).abs() < 1e-15);
        assert_eq!(s.stats.gate_closed, 1);
    }

    #[test]
    fn stacked_role_utilities_accumulate_hierarchy() {
        let game = stack_variant().for_player(&kinds(true)).unwrap();
        let s = stacked(&game, &LearnerConfig::default());
        let t = ObjectiveTerms { fill_prev: 0.5, fill_next: 1.0, power: 0.25, demand: Some(0.8) };
        // hierarchy: next, prev, demand, power
        assert_eq!(s.role_utilities(0, &t), (1.0, 0.5 * 1.0 + 0.5 * 0.5));
        let (l, f) = s.role_utilities(1, &t);
        assert_eq!(l, 1.5);
        assert!((f - (0.65 * 1.5 + 0.35 * 0.8)).abs() < 1e-15);
        let (l, f) = s.role_utilities(2, &t);
        assert!((l - 2.3).abs() < 1e-15);
        assert!((f - (0.75 * 2.3 + 0.25 * 0.25)).abs() < 1e-12);
    }

    #[test]
    fn eval_mode_writes_nothing() {
        let game = stack_variant().for_player(&kinds(false)).unwrap();
        let mut learner = PlayerLearner::new(&game, 2, &policy(), &LearnerConfig::default(), 4).unwrap();
        let before = learner.maps();
        for i in 0..50 {
            let s = [i as f64 / 50.0, 0.5];
            let d = learner.decide(&s, Mode::Eval).unwrap();
            let t = ObjectiveTerms { fill_prev: 1.0, fill_next: 1.0, power: 0.9, demand: None };
            learner.observe(&d, &t, Mode::Eval).unwrap();
        }
        assert_eq!(learner.maps(), before);
    }
}
