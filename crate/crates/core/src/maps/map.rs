use serde::{Deserialize, Serialize};
use serde_json::json;

use super::grid::SupportGrid;
use crate::error::{Error, Result};
use crate::game::ActionValue;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub action: ActionValue,
    /// Best utility seen with `action`; `-inf` until the first visit.
    pub utility: f64,
    pub visits: u64,
}

impl Cell {
    fn fresh(action: ActionValue) -> Self {
        Self { action, utility: f64::NEG_INFINITY, visits: 0 }
    }

    pub fn visited(&self) -> bool {
        self.visits > 0
    }
}

/// Policy of one role over a discretized state space.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceMap {
    grid: SupportGrid,
    init_action: ActionValue,
    cells: Vec<Cell>,
}

impl PerformanceMap {
    pub fn new(grid: SupportGrid, init_action: ActionValue) -> Self {
        let cells = vec![Cell::fresh(init_action); grid.len()];
        Self { grid, init_action, cells }
    }

    pub(crate) fn from_parts(grid: SupportGrid, init_action: ActionValue, cells: Vec<Cell>) -> Self {
        debug_assert_eq!(cells.len(), grid.len());
        Self { grid, init_action, cells }
    }

    pub fn grid(&self) -> &SupportGrid {
        &self.grid
    }

    pub fn init_action(&self) -> ActionValue {
        self.init_action
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, index: usize) -> &Cell {
        &self.cells[index]
    }

    pub fn visited_count(&self) -> usize {
        self.cells.iter().filter(|c| c.visited()).count()
    }

    /// Normalized interpolation weights over visited cells.
    pub fn weights(&self, state: &[f64], gamma: f64) -> Result<Vec<(usize, f64)>> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidGamma(gamma));
        }
        let s = self.grid.clamp(state);
        let mut raw: Vec<(usize, f64)> = self
            .cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.visited())
            .map(|(i, _)| (i, 1.0 / (self.grid.squared_distance(i, &s) + gamma)))
            .collect();
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        for (_, w) in raw.iter_mut() {
            *w /= total;
        }
        Ok(raw)
    }

    /// Global interpolation of the stored actions at `state`. Falls back to
    /// the initialization action while no cell has been visited.
    pub fn interpolate(&self, state: &[f64], gamma: f64) -> Result<ActionValue> {
        let weights = self.weights(state, gamma)?;
        if weights.is_empty() {
            return Ok(self.init_action);
        }
        let a: f64 = weights.iter().map(|&(i, w)| w * self.cells[i].action.get()).sum();
        Ok(ActionValue::clamped(a))
    }

    /// Best-response rule: keep the pair with the strictly larger utility.
    /// Returns whether the stored pair was replaced.
    pub fn update_cell(&mut self, index: usize, action: ActionValue, utility: f64) -> Result<bool> {
        if !utility.is_finite() {
            return Err(Error::NonFinite("cell utility"));
        }
        let cell = &mut self.cells[index];
        cell.visits += 1;
        if utility > cell.utility {
            cell.action = action;
            cell.utility = utility;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Gradient rule: the cell action is a parameter and is overwritten.
    pub fn set_action(&mut self, index: usize, action: ActionValue) {
        let cell = &mut self.cells[index];
        cell.action = action;
        cell.visits += 1;
    }

    /// Inspection/plotting export. Unvisited utilities become `null`.
    pub fn to_json(&self) -> serde_json::Value {
        let cells: Vec<_> = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                json!({
                    "index": i,
                    "point": self.grid.point(i),
                    "action": c.action.get(),
                    "utility": c.utility.is_finite().then_some(c.utility),
                    "visits": c.visits,
                })
            })
            .collect();
        json!({
            "bounds": self.grid.bounds(),
            "points_per_dim": self.grid.points_per_dim(),
            "init_action": self.init_action.get(),
            "cells": cells,
        })
    }
}
