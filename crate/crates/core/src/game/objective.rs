use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjectiveId(pub u32);

/// What an objective measures. `Custom` sums its parts, which is how
/// grouped objectives such as the two-sided fill-level utility are built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    BottleneckOverflowPrev,
    BottleneckOverflowNext,
    Power,
    Demand,
    Custom(Vec<ObjectiveKind>),
}

impl ObjectiveKind {
    /// Both fill-level terms together.
    pub fn bottleneck() -> Self {
        ObjectiveKind::Custom(vec![
            ObjectiveKind::BottleneckOverflowPrev,
            ObjectiveKind::BottleneckOverflowNext,
        ])
    }

    pub fn evaluate(&self, terms: &ObjectiveTerms) -> f64 {
        match self {
            ObjectiveKind::BottleneckOverflowPrev => terms.fill_prev,
            ObjectiveKind::BottleneckOverflowNext => terms.fill_next,
            ObjectiveKind::Power => terms.power,
            ObjectiveKind::Demand => terms.demand.unwrap_or(0.0),
            ObjectiveKind::Custom(parts) => parts.iter().map(|p| p.evaluate(terms)).sum(),
        }
    }

    pub fn needs_demand(&self) -> bool {
        match self {
            ObjectiveKind::Demand => true,
            ObjectiveKind::Custom(parts) => parts.iter().any(ObjectiveKind::needs_demand),
            _ => false,
        }
    }

    /// Primitive kinds this objective is built from.
    pub fn leaves(&self) -> Vec<ObjectiveKind> {
        match self {
            ObjectiveKind::Custom(parts) => parts.iter().flat_map(ObjectiveKind::leaves).collect(),
            k => vec![k.clone()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub id: ObjectiveId,
    pub kind: ObjectiveKind,
}

/// Per-window utility terms of one player, already in utility form
/// (`1/(1+V_p)`, `1/(1+V_s)`, `1/(1+P)`, `1/(1-V_D)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    pub fill_prev: f64,
    pub fill_next: f64,
    pub power: f64,
    pub demand: Option<f64>,
}

impl ObjectiveTerms {
    /// The combined fill-level utility `u_V`.
    pub fn fill(&self) -> f64 {
        self.fill_prev + self.fill_next
    }
}

/// Priority order of a player's objectives, most important first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveHierarchy {
    order: Vec<ObjectiveId>,
}

impl ObjectiveHierarchy {
    pub fn new(order: Vec<ObjectiveId>, objectives: &[ObjectiveSpec]) -> Result<Self> {
        let ids: BTreeSet<_> = objectives.iter().map(|o| o.id).collect();
        if ids.len() != objectives.len() {
            return Err(Error::Hierarchy("duplicate objective id".into()));
        }
        let seen: BTreeSet<_> = order.iter().copied().collect();
        if seen.len() != order.len() {
            return Err(Error::Hierarchy("repeated objective in order".into()));
        }
        if seen != ids {
            return Err(Error::Hierarchy(format!(
                "order {order:?} is not a permutation of the player's objectives"
            )));
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> &[ObjectiveId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Number of stacked leader-follower games, `k - 1`.
    pub fn games(&self) -> usize {
        self.order.len().saturating_sub(1)
    }

    /// Objectives in hierarchy order.
    pub fn resolve<'a>(&self, objectives: &'a [ObjectiveSpec]) -> Vec<&'a ObjectiveSpec> {
        self.order
            .iter()
            .map(|id| objectives.iter().find(|o| o.id == *id).expect("validated at construction"))
            .collect()
    }
}

/// Objective weights of the weighted-sum utility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VanillaWeights {
    pub fill: f64,
    pub power: f64,
    pub demand: f64,
}

impl Default for VanillaWeights {
    fn default() -> Self {
        Self { fill: 1.0, power: 0.03, demand: 1.0 }
    }
}

impl VanillaWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("fill", self.fill), ("power", self.power), ("demand", self.demand)] {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Config(format!("vanilla weight {name} = {w} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// Weighted sum; the demand term only counts for the player that carries it.
    pub fn utility(&self, terms: &ObjectiveTerms) -> f64 {
        let base = self.fill * terms.fill() + self.power * terms.power;
        match terms.demand {
            Some(d) => base + self.demand * d,
            None => base,
        }
    }
}
