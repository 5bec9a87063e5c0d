use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equidistant support vectors over a box in state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportGrid {
    bounds: Vec<(f64, f64)>,
    points_per_dim: usize,
}

impl SupportGrid {
    pub fn new(bounds: Vec<(f64, f64)>, points_per_dim: usize) -> Result<Self> {
        if points_per_dim < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points per dimension, got {points_per_dim}")));
        }
        if bounds.is_empty() {
            return Err(Error::Config("grid needs at least one dimension".into()));
        }
        for &(lo, hi) in &bounds {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::Config(format!("invalid grid bounds ({lo}, {hi})")));
            }
        }
        let cells = points_per_dim
            .checked_pow(bounds.len() as u32)
            .ok_or_else(|| Error::Config("grid too large".into()))?;
        if cells > 50_000_000 {
            return Err(Error::Config(format!("grid of {cells} cells is too large")));
        }
        Ok(Self { bounds, points_per_dim })
    }

    /// Unit hypercube grid.
    pub fn unit(dims: usize, points_per_dim: usize) -> Result<Self> {
        Self::new(vec![(0.0, 1.0); dims], points_per_dim)
    }

    pub fn dims(&self) -> usize {
        self.bounds.len()
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn len(&self) -> usize {
        self.points_per_dim.pow(self.bounds.len() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, dim: usize) -> f64 {
        let (lo, hi) = self.bounds[dim];
        (hi - lo) / (self.points_per_dim - 1) as f64
    }

    /// Coordinate of support index `k` along `dim`.
    pub fn coord(&self, dim: usize, k: usize) -> f64 {
        let (lo, hi) = self.bounds[dim];
        if k + 1 == self.points_per_dim {
            hi
        } else {
            lo + k as f64 * self.spacing(dim)
        }
    }

    /// Per-axis indices of a flat cell index; the first axis varies slowest.
    pub fn unflatten(&self, mut cell: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims()];
        for slot in idx.iter_mut().rev() {
            *slot = cell % self.points_per_dim;
            cell /= self.points_per_dim;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &k| acc * self.points_per_dim + k)
    }

    pub fn point(&self, cell: usize) -> Vec<f64> {
        self.unflatten(cell)
            .into_iter()
            .enumerate()
            .map(|(d, k)| self.coord(d, k))
            .collect()
    }

    /// Nearest support vector in Euclidean distance. On a regular grid this
    /// is the per-axis nearest index; exact ties go to the lower index.
    pub fn nearest_cell(&self, state: &[f64]) -> usize {
        debug_assert_eq!(state.len(), self.dims());
        let last = self.points_per_dim - 1;
        let idx: Vec<usize> = state
            .iter()
            .enumerate()
            .map(|(d, &s)| {
                let (lo, _) = self.bounds[d];
                let t = (s - lo) / self.spacing(d);
                if !(t > 0.0) {
                    return 0;
                }
                let base = t.floor();
                let k = if t - base > 0.5 { base + 1.0 } else { base };
                (k as usize).min(last)
            })
            .collect();
        self.flatten(&idx)
    }

    /// Clamp a state into the grid box.
    pub fn clamp(&self, state: &[f64]) -> Vec<f64> {
        state
            .iter()
            .zip(&self.bounds)
            .map(|(&s, &(lo, hi))| if s.is_nan() { lo } else { s.clamp(lo, hi) })
            .collect()
    }

    pub fn squared_distance(&self, cell: usize, state: &[f64]) -> f64 {
        self.unflatten(cell)
            .into_iter()
            .enumerate()
            .map(|(d, k)| {
                let diff = state[d] - self.coord(d, k);
                diff * diff
            })
            .sum()
    }
}
