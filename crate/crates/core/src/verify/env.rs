use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::game::{coalition_combine, ActionValue, CoalitionMode};
use crate::plant::{step, PlantConfig, PlantState};

/// Actions of one player's two roles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolePair {
    pub leader: f64,
    pub follower: f64,
}

impl RolePair {
    pub fn get(&self, role: RoleSel) -> f64 {
        match role {
            RoleSel::Leader => self.leader,
            RoleSel::Follower => self.follower,
        }
    }

    pub fn set(&mut self, role: RoleSel, v: f64) {
        match role {
            RoleSel::Leader => self.leader = v,
            RoleSel::Follower => self.follower = v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleSel {
    Leader,
    Follower,
}

/// Something whose per-player objective utilities can be probed at
/// arbitrary states and role actions.
pub trait UtilityEnv: Sync {
    fn players(&self) -> usize;
    /// Length of the state vector.
    fn state_len(&self) -> usize;
    fn sample_state(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;
    /// `u[i][k]`: objective `k` of player `i`.
    fn objectives(&self, state: &[f64], roles: &[RolePair]) -> Result<Vec<Vec<f64>>>;
    /// State entries observed by more than one player, with those players.
    fn shared_states(&self) -> Vec<(usize, Vec<usize>)> {
        Vec::new()
    }
}

/// The plant's utilities over a single simulation step from a given
/// reservoir state. State entries are normalized fills.
#[derive(Debug, Clone)]
pub struct PlantEnv {
    pub config: PlantConfig,
    pub coalition: CoalitionMode,
}

impl PlantEnv {
    pub fn new(config: PlantConfig, coalition: CoalitionMode) -> Self {
        Self { config, coalition }
    }
}

impl UtilityEnv for PlantEnv {
    fn players(&self) -> usize {
        self.config.players()
    }

    fn state_len(&self) -> usize {
        self.config.reservoirs.len()
    }

    fn sample_state(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.state_len()).map(|_| rng.random::<f64>()).collect()
    }

    fn objectives(&self, state: &[f64], roles: &[RolePair]) -> Result<Vec<Vec<f64>>> {
        let mut s = PlantState::initial(&self.config);
        for ((f, q), r) in s.fills.iter_mut().zip(state).zip(&self.config.reservoirs) {
            *f = q * r.capacity;
        }
        let actions: Vec<ActionValue> = roles
            .iter()
            .map(|r| {
                coalition_combine(ActionValue::clamped(r.leader), ActionValue::clamped(r.follower), self.coalition)
            })
            .collect();
        let (next, _) = step(&self.config, &s, &actions, self.config.dt)?;
        Ok((0..self.players())
            .map(|p| {
                let t = next.objective_terms(&self.config, p);
                let mut u = vec![t.fill_prev, t.fill_next, t.power];
                u.extend(t.demand);
                u
            })
            .collect())
    }

    fn shared_states(&self) -> Vec<(usize, Vec<usize>)> {
        self.config
            .shared_reservoirs()
            .into_iter()
            .map(|r| {
                let players = (0..self.players()).filter(|&p| self.config.state_reservoirs(p).contains(&r)).collect();
                (r, players)
            })
            .collect()
    }
}

/// Test fixture: adds a smooth dependence of `victim`'s first objective on
/// `source`'s coalition action, breaking separability.
pub struct PlantedCoupling<E> {
    pub inner: E,
    pub victim: usize,
    pub source: usize,
    pub strength: f64,
}

impl<E: UtilityEnv> UtilityEnv for PlantedCoupling<E> {
    fn players(&self) -> usize {
        self.inner.players()
    }

    fn state_len(&self) -> usize {
        self.inner.state_len()
    }

    fn sample_state(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.inner.sample_state(rng)
    }

    fn objectives(&self, state: &[f64], roles: &[RolePair]) -> Result<Vec<Vec<f64>>> {
        let mut u = self.inner.objectives(state, roles)?;
        let a = roles[self.source].leader + roles[self.source].follower;
        u[self.victim][0] += self.strength * (3.0 * a).sin();
        Ok(u)
    }

    fn shared_states(&self) -> Vec<(usize, Vec<usize>)> {
        self.inner.shared_states()
    }
}
