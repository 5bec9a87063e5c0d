//! Experiment configuration document and flat `section.key=value` overrides.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameVariant, ObjectiveKind, VanillaWeights, VariantKind};
use crate::learn::{LearnerConfig, PolicyConfig};
use crate::plant::BglpParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub variant: VariantKind,
    pub seed: u64,
    /// Training episodes; the evaluation episode comes on top.
    pub episodes: usize,
    /// Simulated seconds per episode.
    pub horizon: f64,
    pub eval: bool,
    /// Let players decide on the rayon pool.
    pub parallel: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { variant: VariantKind::Ds2, seed: 0, episodes: 9, horizon: 10_000.0, eval: true, parallel: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ds2Section {
    pub leader: Vec<ObjectiveKind>,
    pub follower: Vec<ObjectiveKind>,
    pub beta_l: f64,
    pub theta_l: Option<f64>,
    /// Leader step size for this variant.
    pub alpha: f64,
}

impl Default for Ds2Section {
    fn default() -> Self {
        Self {
            leader: vec![ObjectiveKind::bottleneck(), ObjectiveKind::Demand],
            follower: vec![ObjectiveKind::Power],
            beta_l: 0.65,
            theta_l: Some(2.0),
            alpha: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StackSection {
    pub hierarchy: Vec<ObjectiveKind>,
    pub beta_l: Vec<f64>,
    pub theta_l: Option<f64>,
    pub alpha: f64,
}

impl Default for StackSection {
    fn default() -> Self {
        Self {
            hierarchy: vec![
                ObjectiveKind::BottleneckOverflowNext,
                ObjectiveKind::BottleneckOverflowPrev,
                ObjectiveKind::Demand,
                ObjectiveKind::Power,
            ],
            beta_l: vec![0.5, 0.65, 0.75],
            theta_l: None,
            alpha: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub samples: usize,
    pub fd_step: f64,
    pub cross_tolerance: f64,
    pub alignment_tolerance: f64,
    pub gradcheck_points: usize,
    pub gradcheck_tolerance: f64,
    pub oracle_models: usize,
    pub oracle_resolution: usize,
    /// Replace the plant utilities with the coupled test fixture.
    pub planted_violation: bool,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            samples: 1000,
            fd_step: 1e-4,
            cross_tolerance: 1e-6,
            alignment_tolerance: 1e-9,
            gradcheck_points: 1000,
            gradcheck_tolerance: 1e-6,
            oracle_models: 50,
            oracle_resolution: 100,
            planted_violation: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamRange {
    pub min: f64,
    pub max: f64,
    #[serde(default)]
    pub log: bool,
    #[serde(default)]
    pub integer: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub trials: usize,
    /// Reduced episode horizon for trials, seconds.
    pub horizon: f64,
    /// Override keys mapped to sampling ranges.
    pub space: BTreeMap<String, ParamRange>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { trials: 8, horizon: 2_000.0, space: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run: RunSection,
    pub plant: BglpParams,
    pub policy: PolicyConfig,
    pub learner: LearnerConfig,
    /// Weighted-sum game weights; also the scoring utility for every variant.
    pub sbpg: VanillaWeights,
    pub ds2: Ds2Section,
    pub stack: StackSection,
    pub verify: VerifySection,
    pub sweep: SweepSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: Self = doc.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        crate::plant::build_bglp(&self.plant)?;
        self.policy.validate()?;
        self.learner.validate()?;
        self.sbpg.validate()?;
        for kind in [VariantKind::Sbpg, VariantKind::Ds2, VariantKind::Stack] {
            self.variant(kind).validate()?;
        }
        if !(self.run.horizon.is_finite() && self.run.horizon >= self.plant.window) {
            return Err(Error::Config(format!(
                "horizon {} must cover at least one window of {} s",
                self.run.horizon, self.plant.window
            )));
        }
        Ok(())
    }

    pub fn variant(&self, kind: VariantKind) -> GameVariant {
        match kind {
            VariantKind::Sbpg => GameVariant::Sbpg { weights: self.sbpg },
            VariantKind::Ds2 => GameVariant::Ds2 {
                leader: self.ds2.leader.clone(),
                follower: self.ds2.follower.clone(),
                beta_l: self.ds2.beta_l,
                theta_l: self.ds2.theta_l,
            },
            VariantKind::Stack => GameVariant::Stack {
                hierarchy: self.stack.hierarchy.clone(),
                beta_l: self.stack.beta_l.clone(),
                theta_l: self.stack.theta_l,
            },
        }
    }

    /// Learner settings with the variant's own leader step size.
    pub fn learner_for(&self, kind: VariantKind) -> LearnerConfig {
        let mut l = self.learner.clone();
        match kind {
            VariantKind::Sbpg => {}
            VariantKind::Ds2 => l.alpha = self.ds2.alpha,
            VariantKind::Stack => l.alpha = self.stack.alpha,
        }
        l
    }
}

/// Parses `a.b.c=value` and writes it into `doc`. The value is read as a
/// TOML literal when possible and as a bare string otherwise.
pub fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {spec:?} is not key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key {key:?}")));
    }
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let (last, parents) = path.split_last().expect("non-empty");
    let mut table = doc;
    for p in parents {
        let entry = table.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override {key:?}: {p} is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        let c = ExperimentConfig::from_toml("", &[]).unwrap();
        assert_eq!(c, ExperimentConfig::default());
    }

    #[test]
    fn default_round_trips_through_toml() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml(), &[]).unwrap(), c);
    }

    #[test]
    fn overrides_layer_last_writer_wins() {
        let c = ExperimentConfig::from_toml(
            "[run]\nseed = 3\n",
            &["run.seed=5".into(), "plant.dt=0.5".into(), "run.seed=9".into(), "run.variant=stack".into()],
        )
        .unwrap();
        assert_eq!(c.run.seed, 9);
        assert_eq!(c.plant.dt, 0.5);
        assert_eq!(c.run.variant, VariantKind::Stack);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("", &["plant.hoper_capacity=3".into()]).is_err());
        assert!(ExperimentConfig::from_toml("[nope]\nx = 1\n", &[]).is_err());
        assert!(ExperimentConfig::from_toml("", &["novalue".into()]).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(ExperimentConfig::from_toml("", &["plant.silo_capacity=-2".into()]).is_err());
        assert!(ExperimentConfig::from_toml("", &["ds2.beta_l=1.5".into()]).is_err());
    }

    #[test]
    fn variant_step_sizes() {
        let c = ExperimentConfig::default();
        assert_eq!(c.learner_for(VariantKind::Ds2).alpha, 0.4);
        assert_eq!(c.learner_for(VariantKind::Stack).alpha, 0.5);
    }
}
