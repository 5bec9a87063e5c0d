use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::objective::{ObjectiveHierarchy, ObjectiveId, ObjectiveKind, ObjectiveSpec, VanillaWeights};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    Sbpg,
    Ds2,
    Stack,
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VariantKind::Sbpg => "sbpg",
            VariantKind::Ds2 => "ds2",
            VariantKind::Stack => "stack",
        })
    }
}

impl FromStr for VariantKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sbpg" | "vanilla" => Ok(VariantKind::Sbpg),
            "ds2" => Ok(VariantKind::Ds2),
            "stack" => Ok(VariantKind::Stack),
            other => Err(Error::Config(format!("unknown variant {other:?} (expected sbpg|ds2|stack)"))),
        }
    }
}

/// Experiment-level game structure. Objective lists name primitive kinds;
/// each player keeps only the kinds it actually has.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GameVariant {
    Sbpg {
        weights: VanillaWeights,
    },
    Ds2 {
        leader: Vec<ObjectiveKind>,
        follower: Vec<ObjectiveKind>,
        beta_l: f64,
        theta_l: Option<f64>,
    },
    Stack {
        hierarchy: Vec<ObjectiveKind>,
        beta_l: Vec<f64>,
        theta_l: Option<f64>,
    },
}

impl GameVariant {
    pub fn kind(&self) -> VariantKind {
        match self {
            GameVariant::Sbpg { .. } => VariantKind::Sbpg,
            GameVariant::Ds2 { .. } => VariantKind::Ds2,
            GameVariant::Stack { .. } => VariantKind::Stack,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_beta = |b: f64| {
            if (0.0..=1.0).contains(&b) {
                Ok(())
            } else {
                Err(Error::Config(format!("trade-off beta_l = {b} outside [0, 1]")))
            }
        };
        match self {
            GameVariant::Sbpg { weights } => weights.validate(),
            GameVariant::Ds2 { leader, follower, beta_l, .. } => {
                if leader.is_empty() || follower.is_empty() {
                    return Err(Error::Config("ds2 needs leader and follower objectives".into()));
                }
                check_beta(*beta_l)
            }
            GameVariant::Stack { hierarchy, beta_l, .. } => {
                if hierarchy.len() < 2 {
                    return Err(Error::Config("stack hierarchy needs at least two objectives".into()));
                }
                beta_l.iter().try_for_each(|b| check_beta(*b))
            }
        }
    }

    /// Resolve the variant for a player whose primitive objectives are `available`.
    pub fn for_player(&self, available: &[ObjectiveKind]) -> Result<PlayerGame> {
        self.validate()?;
        match self {
            GameVariant::Sbpg { weights } => Ok(PlayerGame::Vanilla { weights: *weights }),
            GameVariant::Ds2 { leader, follower, beta_l, theta_l } => {
                let levels = vec![
                    ObjectiveKind::Custom(leader.clone()),
                    ObjectiveKind::Custom(follower.clone()),
                ];
                PlayerGame::stacked(&levels, available, &[*beta_l], *theta_l)
            }
            GameVariant::Stack { hierarchy, beta_l, theta_l } => {
                PlayerGame::stacked(hierarchy, available, beta_l, *theta_l)
            }
        }
    }
}

/// Game structure of a single player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlayerGame {
    Vanilla {
        weights: VanillaWeights,
    },
    /// `k - 1` chained leader-follower games. The single leader-follower
    /// structure is the `k = 2` case.
    Stacked {
        objectives: Vec<ObjectiveSpec>,
        hierarchy: ObjectiveHierarchy,
        beta: Vec<f64>,
        theta: Vec<Option<f64>>,
    },
}

impl PlayerGame {
    fn stacked(
        levels: &[ObjectiveKind],
        available: &[ObjectiveKind],
        beta: &[f64],
        theta: Option<f64>,
    ) -> Result<Self> {
        let kinds: Vec<ObjectiveKind> = levels.iter().filter_map(|k| restrict(k, available)).collect();
        let objectives: Vec<ObjectiveSpec> = kinds
            .into_iter()
            .enumerate()
            .map(|(i, kind)| ObjectiveSpec { id: ObjectiveId(i as u32), kind })
            .collect();
        let order = objectives.iter().map(|o| o.id).collect();
        Self::with_hierarchy(objectives, order, beta, vec![theta; beta.len()])
    }

    /// Build a stacked game from explicit objective ids and order.
    pub fn with_hierarchy(
        objectives: Vec<ObjectiveSpec>,
        order: Vec<ObjectiveId>,
        beta: &[f64],
        theta: Vec<Option<f64>>,
    ) -> Result<Self> {
        let hierarchy = ObjectiveHierarchy::new(order, &objectives)?;
        if hierarchy.len() < 2 {
            return Err(Error::Hierarchy(format!(
                "leader-follower games need k >= 2 objectives, player has {}",
                hierarchy.len()
            )));
        }
        let games = hierarchy.games();
        if beta.len() < games {
            return Err(Error::Config(format!("need {games} beta_l values, got {}", beta.len())));
        }
        if let Some(b) = beta.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(Error::Config(format!("trade-off beta_l = {b} outside [0, 1]")));
        }
        let mut theta = theta;
        theta.resize(games, theta.last().copied().flatten());
        Ok(PlayerGame::Stacked {
            objectives,
            hierarchy,
            beta: beta[..games].to_vec(),
            theta: theta[..games].to_vec(),
        })
    }

    /// Number of leader-follower games; 0 for the weighted-sum game.
    pub fn games(&self) -> usize {
        match self {
            PlayerGame::Vanilla { .. } => 0,
            PlayerGame::Stacked { hierarchy, .. } => hierarchy.games(),
        }
    }
}

fn restrict(kind: &ObjectiveKind, available: &[ObjectiveKind]) -> Option<ObjectiveKind> {
    match kind {
        ObjectiveKind::Custom(parts) => {
            let kept: Vec<_> = parts.iter().filter_map(|p| restrict(p, available)).collect();
            (!kept.is_empty()).then_some(ObjectiveKind::Custom(kept))
        }
        k => available.contains(k).then(|| k.clone()),
    }
}
