//! Players, objectives, game variants and coalition composition.
//!
//! Everything here is a plain value type. The plant, learners and
//! verification code all build on these definitions.

mod action;
mod graph;
mod objective;
mod variant;

pub use action::{coalition_combine, ActionValue, CoalitionMode, DeviceRange, DeviceUnit};
pub use graph::{Node, PlayerId, ProcessGraph, StateId};
pub use objective::{
    ObjectiveHierarchy, ObjectiveId, ObjectiveKind, ObjectiveSpec, ObjectiveTerms, VanillaWeights,
};
pub use variant::{GameVariant, PlayerGame, VariantKind};

use crate::error::{Error, Result};

/// Sum of per-player utilities.
///
/// Callers pass utilities scored with the vanilla weighting so that all
/// variants are reported on one scale.
pub fn potential_value(utilities: &[f64]) -> Result<f64> {
    if utilities.iter().any(|u| !u.is_finite()) {
        return Err(Error::NonFinite("player utility"));
    }
    Ok(utilities.iter().sum())
}
