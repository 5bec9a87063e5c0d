use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::poly::Role;

/// One observed leader-follower outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub a_l: f64,
    pub a_f: f64,
    pub u_l: f64,
    pub u_f: f64,
}

impl Sample {
    pub fn target(&self, role: Role) -> f64 {
        match role {
            Role::Leader => self.u_l,
            Role::Follower => self.u_f,
        }
    }
}

/// Per-cell ring buffers of recent samples; oldest evicted first.
#[derive(Debug, Clone)]
pub struct SampleBuffer {
    capacity: usize,
    cells: Vec<VecDeque<Sample>>,
}

impl SampleBuffer {
    pub fn new(cells: usize, capacity: usize) -> Self {
        assert!(capacity > 0, "sample buffer capacity must be positive");
        Self { capacity, cells: vec![VecDeque::new(); cells] }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, cell: usize, sample: Sample) {
        let ring = &mut self.cells[cell];
        if ring.len() == self.capacity {
            ring.pop_front();
        }
        ring.push_back(sample);
    }

    pub fn samples(&mut self, cell: usize) -> &[Sample] {
        self.cells[cell].make_contiguous()
    }

    pub fn len(&self, cell: usize) -> usize {
        self.cells[cell].len()
    }
}
