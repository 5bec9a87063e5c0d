use super::grid::SupportGrid;
use super::map::PerformanceMap;
use crate::game::ActionValue;

/// Layer read for a given leader action: `floor(a_L * L)` clamped to `[0, L-1]`.
pub fn layer_index(leader: ActionValue, layers: usize) -> usize {
    debug_assert!(layers >= 1);
    let k = (leader.get() * layers as f64).floor() as usize;
    k.min(layers - 1)
}

/// Follower policy: one map per discretized leader action.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedMap {
    layers: Vec<PerformanceMap>,
}

impl StackedMap {
    pub fn new(grid: SupportGrid, layers: usize, init_action: ActionValue) -> Self {
        assert!(layers >= 1, "stacked map needs at least one layer");
        Self { layers: vec![PerformanceMap::new(grid, init_action); layers] }
    }

    pub(crate) fn from_layers(layers: Vec<PerformanceMap>) -> Self {
        assert!(!layers.is_empty());
        Self { layers }
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[PerformanceMap] {
        &self.layers
    }

    pub fn layer_for(&self, leader: ActionValue) -> usize {
        layer_index(leader, self.layers.len())
    }

    pub fn layer(&self, index: usize) -> &PerformanceMap {
        &self.layers[index]
    }

    pub fn layer_mut(&mut self, index: usize) -> &mut PerformanceMap {
        &mut self.layers[index]
    }

    pub fn grid(&self) -> &SupportGrid {
        self.layers[0].grid()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.layers.iter().map(PerformanceMap::to_json).collect())
    }
}
