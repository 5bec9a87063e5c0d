use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlayerId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateId(pub usize);

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A{}", self.0 + 1)
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0 + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Node {
    Actuator(PlayerId),
    State(StateId),
}

/// Production chain as an alternating graph of actuators and states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessGraph {
    actuators: Vec<PlayerId>,
    states: Vec<StateId>,
    edges: Vec<(Node, Node)>,
    global_states: BTreeSet<StateId>,
}

impl ProcessGraph {
    pub fn new(
        actuators: Vec<PlayerId>,
        states: Vec<StateId>,
        edges: Vec<(Node, Node)>,
        global_states: BTreeSet<StateId>,
    ) -> Result<Self> {
        let graph = Self { actuators, states, edges, global_states };
        graph.validate()?;
        Ok(graph)
    }

    fn validate(&self) -> Result<()> {
        let actuators: BTreeSet<_> = self.actuators.iter().copied().collect();
        let states: BTreeSet<_> = self.states.iter().copied().collect();
        if actuators.len() != self.actuators.len() || states.len() != self.states.len() {
            return Err(Error::InvalidGraph("duplicate node id".into()));
        }
        let known = |n: &Node| match n {
            Node::Actuator(p) => actuators.contains(p),
            Node::State(s) => states.contains(s),
        };
        for (from, to) in &self.edges {
            match (from, to) {
                (Node::Actuator(a), Node::Actuator(b)) => {
                    return Err(Error::InvalidGraph(format!("edge connects actuators {a} and {b}")))
                }
                (Node::State(a), Node::State(b)) => {
                    return Err(Error::InvalidGraph(format!("edge connects states {a} and {b}")))
                }
                _ => {}
            }
            if !known(from) || !known(to) {
                return Err(Error::InvalidGraph(format!("edge {from:?} -> {to:?} references unknown node")));
            }
        }
        if let Some(s) = self.global_states.iter().find(|s| !states.contains(s)) {
            return Err(Error::InvalidGraph(format!("global state {s} is not a state node")));
        }
        for &p in &self.actuators {
            let (prior, next) = self.neighbor_states(p)?;
            if prior.is_empty() && next.is_empty() {
                return Err(Error::InvalidGraph(format!("player {p} has no neighbour state")));
            }
        }
        Ok(())
    }

    pub fn actuators(&self) -> &[PlayerId] {
        &self.actuators
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn edges(&self) -> &[(Node, Node)] {
        &self.edges
    }

    pub fn global_states(&self) -> &BTreeSet<StateId> {
        &self.global_states
    }

    pub fn contains_player(&self, player: PlayerId) -> bool {
        self.actuators.contains(&player)
    }

    /// States feeding into and fed by `player`.
    pub fn neighbor_states(&self, player: PlayerId) -> Result<(BTreeSet<StateId>, BTreeSet<StateId>)> {
        if !self.contains_player(player) {
            return Err(Error::UnknownPlayer(player));
        }
        let mut prior = BTreeSet::new();
        let mut next = BTreeSet::new();
        for (from, to) in &self.edges {
            match (from, to) {
                (Node::State(s), Node::Actuator(p)) if *p == player => {
                    prior.insert(*s);
                }
                (Node::Actuator(p), Node::State(s)) if *p == player => {
                    next.insert(*s);
                }
                _ => {}
            }
        }
        Ok((prior, next))
    }

    /// Players that draw from `state`.
    pub fn consumers(&self, state: StateId) -> Vec<PlayerId> {
        self.edges
            .iter()
            .filter_map(|e| match e {
                (Node::State(s), Node::Actuator(p)) if *s == state => Some(*p),
                _ => None,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> ProcessGraph {
        ProcessGraph::new(
            vec![PlayerId(0)],
            vec![StateId(0), StateId(1)],
            vec![
                (Node::State(StateId(0)), Node::Actuator(PlayerId(0))),
                (Node::Actuator(PlayerId(0)), Node::State(StateId(1))),
            ],
            BTreeSet::new(),
        )
        .unwrap()
    }

    #[test]
    fn serial_chain_neighbours() {
        let (prior, next) = chain().neighbor_states(PlayerId(0)).unwrap();
        assert_eq!(prior.into_iter().collect::<Vec<_>>(), vec![StateId(0)]);
        assert_eq!(next.into_iter().collect::<Vec<_>>(), vec![StateId(1)]);
    }

    #[test]
    fn parallel_next_buffers() {
        let g = ProcessGraph::new(
            vec![PlayerId(0)],
            vec![StateId(0), StateId(1), StateId(2)],
            vec![
                (Node::State(StateId(0)), Node::Actuator(PlayerId(0))),
                (Node::Actuator(PlayerId(0)), Node::State(StateId(1))),
                (Node::Actuator(PlayerId(0)), Node::State(StateId(2))),
            ],
            BTreeSet::new(),
        )
        .unwrap();
        let (_, next) = g.neighbor_states(PlayerId(0)).unwrap();
        assert_eq!(next.into_iter().collect::<Vec<_>>(), vec![StateId(1), StateId(2)]);
    }

    #[test]
    fn unknown_player_is_an_error() {
        assert!(matches!(chain().neighbor_states(PlayerId(3)), Err(Error::UnknownPlayer(_))));
    }

    #[test]
    fn rejects_actuator_to_actuator_edge() {
        let r = ProcessGraph::new(
            vec![PlayerId(0), PlayerId(1)],
            vec![StateId(0)],
            vec![
                (Node::Actuator(PlayerId(0)), Node::Actuator(PlayerId(1))),
                (Node::Actuator(PlayerId(0)), Node::State(StateId(0))),
            ],
            BTreeSet::new(),
        );
        assert!(matches!(r, Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn rejects_state_to_state_edge_and_isolated_player() {
        let r = ProcessGraph::new(
            vec![PlayerId(0)],
            vec![StateId(0), StateId(1)],
            vec![(Node::State(StateId(0)), Node::State(StateId(1)))],
            BTreeSet::new(),
        );
        assert!(r.is_err());
        let r = ProcessGraph::new(vec![PlayerId(0)], vec![StateId(0)], vec![], BTreeSet::new());
        assert!(r.is_err());
    }

    #[test]
    fn rejects_unknown_global_state() {
        let r = ProcessGraph::new(
            vec![PlayerId(0)],
            vec![StateId(0)],
            vec![(Node::Actuator(PlayerId(0)), Node::State(StateId(0)))],
            [StateId(9)].into_iter().collect(),
        );
        assert!(r.is_err());
    }
}
