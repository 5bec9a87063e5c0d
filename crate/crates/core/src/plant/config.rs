use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Node, ObjectiveKind, PlayerId, ProcessGraph, StateId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirSpec {
    pub name: String,
    /// Liters.
    pub capacity: f64,
    /// Liters at t = 0.
    pub initial: f64,
    /// Normalized lower limit; time spent below it counts as a bottleneck.
    pub lower: f64,
    /// Normalized upper limit; time spent above it counts as overflow risk.
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActuatorKind {
    BeltRpm,
    VacuumPumpTimed,
    VibratoryBinary,
    RotaryFeederRpm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuatorSpec {
    pub name: String,
    pub kind: ActuatorKind,
    /// L/s at full action.
    pub max_flow: f64,
    /// W at full action.
    pub max_power: f64,
    /// `None` draws from an unlimited external supply.
    pub source: Option<usize>,
    pub sink: usize,
}

impl ActuatorSpec {
    /// Flow in L/s and power in W at a normalized action.
    pub fn curves(&self, action: f64) -> (f64, f64) {
        let a = action.clamp(0.0, 1.0);
        match self.kind {
            ActuatorKind::BeltRpm | ActuatorKind::RotaryFeederRpm => (self.max_flow * a, self.max_power * a * a),
            ActuatorKind::VacuumPumpTimed => (self.max_flow * a, self.max_power * a),
            ActuatorKind::VibratoryBinary => {
                if a >= 0.5 {
                    (self.max_flow, self.max_power)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantConfig {
    pub graph: ProcessGraph,
    pub reservoirs: Vec<ReservoirSpec>,
    pub actuators: Vec<ActuatorSpec>,
    /// Seconds per simulation step.
    pub dt: f64,
    /// Seconds per control window.
    pub window: f64,
    /// L/s drawn from the demand reservoir.
    pub demand_rate: f64,
    pub demand_reservoir: Option<usize>,
    /// Watts that count as unit power in the power utility.
    pub power_norm: f64,
}

impl PlantConfig {
    pub fn new(
        reservoirs: Vec<ReservoirSpec>,
        actuators: Vec<ActuatorSpec>,
        dt: f64,
        window: f64,
        demand_rate: f64,
        demand_reservoir: Option<usize>,
        power_norm: f64,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::Config(m));
        if !(dt.is_finite() && dt > 0.0) {
            return bad(format!("dt must be positive, got {dt}"));
        }
        if !(window.is_finite() && window >= dt) {
            return bad(format!("window {window} must be at least dt {dt}"));
        }
        let steps = window / dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return bad(format!("window {window} is not a multiple of dt {dt}"));
        }
        if !(demand_rate.is_finite() && demand_rate >= 0.0) {
            return bad(format!("demand rate must be non-negative, got {demand_rate}"));
        }
        for r in &reservoirs {
            if !(r.capacity.is_finite() && r.capacity > 0.0) {
                return bad(format!("{}: capacity must be positive, got {}", r.name, r.capacity));
            }
            if !(0.0..=r.capacity).contains(&r.initial) {
                return bad(format!("{}: initial fill {} outside [0, {}]", r.name, r.initial, r.capacity));
            }
            if !(0.0 <= r.lower && r.lower < r.upper && r.upper <= 1.0) {
                return bad(format!("{}: limits must satisfy 0 <= lower < upper <= 1", r.name));
            }
        }
        for a in &actuators {
            if !(a.max_flow.is_finite() && a.max_flow >= 0.0 && a.max_power.is_finite() && a.max_power > 0.0) {
                return bad(format!("{}: max_flow must be >= 0 and max_power > 0", a.name));
            }
            if a.sink >= reservoirs.len() || a.source.is_some_and(|s| s >= reservoirs.len() || s == a.sink) {
                return bad(format!("{}: bad source/sink", a.name));
            }
        }
        if !(power_norm.is_finite() && power_norm > 0.0) {
            return bad(format!("power_norm must be positive, got {power_norm}"));
        }
        if demand_reservoir.is_some_and(|d| d >= reservoirs.len()) {
            return bad("demand reservoir out of range".into());
        }
        let mut edges = Vec::new();
        for (i, a) in actuators.iter().enumerate() {
            if let Some(s) = a.source {
                edges.push((Node::State(StateId(s)), Node::Actuator(PlayerId(i))));
            }
            edges.push((Node::Actuator(PlayerId(i)), Node::State(StateId(a.sink))));
        }
        let graph = ProcessGraph::new(
            (0..actuators.len()).map(PlayerId).collect(),
            (0..reservoirs.len()).map(StateId).collect(),
            edges,
            BTreeSet::new(),
        )?;
        Ok(Self { graph, reservoirs, actuators, dt, window, demand_rate, demand_reservoir, power_norm })
    }

    pub fn players(&self) -> usize {
        self.actuators.len()
    }

    pub fn steps_per_window(&self) -> usize {
        (self.window / self.dt).round() as usize
    }

    /// Whether `player` feeds the demand reservoir.
    pub fn carries_demand(&self, player: usize) -> bool {
        self.demand_reservoir == Some(self.actuators[player].sink)
    }

    /// Objectives available to `player`.
    pub fn objectives(&self, player: usize) -> Vec<ObjectiveKind> {
        let mut out = Vec::with_capacity(4);
        if self.actuators[player].source.is_some() {
            out.push(ObjectiveKind::BottleneckOverflowPrev);
        }
        out.push(ObjectiveKind::BottleneckOverflowNext);
        out.push(ObjectiveKind::Power);
        if self.carries_demand(player) {
            out.push(ObjectiveKind::Demand);
        }
        out
    }

    /// Reservoirs read as the player's state, prior first.
    pub fn state_reservoirs(&self, player: usize) -> Vec<usize> {
        let a = &self.actuators[player];
        a.source.into_iter().chain(std::iter::once(a.sink)).collect()
    }

    /// Reservoirs observed by more than one player.
    pub fn shared_reservoirs(&self) -> Vec<usize> {
        (0..self.reservoirs.len())
            .filter(|r| (0..self.players()).filter(|&p| self.state_reservoirs(p).contains(r)).count() > 1)
            .collect()
    }

    /// Sum of all players' rated power, W.
    pub fn rated_power(&self) -> f64 {
        self.actuators.iter().map(|a| a.max_power).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorParams {
    pub max_flow: f64,
    pub max_power: f64,
}

/// Tunable physical parameters of the reference five-player line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BglpParams {
    pub dt: f64,
    pub window: f64,
    pub demand_rate: f64,
    pub hopper_capacity: f64,
    pub silo_capacity: f64,
    /// Normalized initial fill of every reservoir.
    pub initial_fill: f64,
    pub lower_limit: f64,
    pub upper_limit: f64,
    /// Watts that count as unit power in the power utility.
    pub power_norm: f64,
    pub belt: ActuatorParams,
    pub vacuum_pump_1: ActuatorParams,
    pub vibratory_conveyor: ActuatorParams,
    pub vacuum_pump_2: ActuatorParams,
    pub rotary_feeder: ActuatorParams,
}

impl Default for BglpParams {
    fn default() -> Self {
        Self {
            dt: 1.0,
            window: 10.0,
            demand_rate: 0.125,
            hopper_capacity: 10.0,
            silo_capacity: 20.0,
            initial_fill: 0.5,
            lower_limit: 0.2,
            upper_limit: 0.8,
            power_norm: 1000.0,
            belt: ActuatorParams { max_flow: 0.35, max_power: 180.0 },
            vacuum_pump_1: ActuatorParams { max_flow: 0.4, max_power: 120.0 },
            vibratory_conveyor: ActuatorParams { max_flow: 0.3, max_power: 60.0 },
            vacuum_pump_2: ActuatorParams { max_flow: 0.4, max_power: 120.0 },
            rotary_feeder: ActuatorParams { max_flow: 0.35, max_power: 180.0 },
        }
    }
}

/// The reference line: belt, hopper, vacuum pump, silo, vibratory conveyor,
/// hopper, vacuum pump, silo, rotary feeder, final hopper. Demand is drawn
/// from the final hopper.
pub fn build_bglp(p: &BglpParams) -> Result<PlantConfig> {
    if !(0.0..=1.0).contains(&p.initial_fill) {
        return Err(Error::Config(format!("initial_fill {} outside [0, 1]", p.initial_fill)));
    }
    let reservoir = |name: &str, capacity: f64| ReservoirSpec {
        name: name.into(),
        capacity,
        initial: p.initial_fill * capacity,
        lower: p.lower_limit,
        upper: p.upper_limit,
    };
    let reservoirs = vec![
        reservoir("hopper_1", p.hopper_capacity),
        reservoir("silo_1", p.silo_capacity),
        reservoir("hopper_2", p.hopper_capacity),
        reservoir("silo_2", p.silo_capacity),
        reservoir("hopper_3", p.hopper_capacity),
    ];
    let actuator = |name: &str, kind, q: &ActuatorParams, source, sink| ActuatorSpec {
        name: name.into(),
        kind,
        max_flow: q.max_flow,
        max_power: q.max_power,
        source,
        sink,
    };
    let actuators = vec![
        actuator("belt", ActuatorKind::BeltRpm, &p.belt, None, 0),
        actuator("vacuum_pump_1", ActuatorKind::VacuumPumpTimed, &p.vacuum_pump_1, Some(0), 1),
        actuator("vibratory_conveyor", ActuatorKind::VibratoryBinary, &p.vibratory_conveyor, Some(1), 2),
        actuator("vacuum_pump_2", ActuatorKind::VacuumPumpTimed, &p.vacuum_pump_2, Some(2), 3),
        actuator("rotary_feeder", ActuatorKind::RotaryFeederRpm, &p.rotary_feeder, Some(3), 4),
    ];
    PlantConfig::new(reservoirs, actuators, p.dt, p.window, p.demand_rate, Some(4), p.power_norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_line_has_five_players_and_final_demand() {
        let c = build_bglp(&BglpParams::default()).unwrap();
        assert_eq!(c.players(), 5);
        assert!(c.carries_demand(4));
        assert!((0..4).all(|p| !c.carries_demand(p)));
        assert_eq!(c.objectives(4).len(), 4);
        assert_eq!(c.objectives(0), vec![ObjectiveKind::BottleneckOverflowNext, ObjectiveKind::Power]);
        assert_eq!(c.shared_reservoirs(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn dt_override_changes_step_count() {
        let c = build_bglp(&BglpParams { dt: 0.5, ..Default::default() }).unwrap();
        assert_eq!(c.steps_per_window(), 20);
    }

    #[test]
    fn non_positive_capacity_rejected() {
        assert!(build_bglp(&BglpParams { silo_capacity: 0.0, ..Default::default() }).is_err());
        assert!(build_bglp(&BglpParams { hopper_capacity: -1.0, ..Default::default() }).is_err());
    }

    #[test]
    fn window_must_divide_into_steps() {
        assert!(build_bglp(&BglpParams { window: 2.5, ..Default::default() }).is_err());
    }

    #[test]
    fn unknown_override_key_rejected() {
        let r: std::result::Result<BglpParams, _> = toml::from_str("hoper_capacity = 3.0");
        assert!(r.is_err());
    }

    #[test]
    fn curves_are_zero_at_rest_and_monotone() {
        let c = build_bglp(&BglpParams::default()).unwrap();
        for a in &c.actuators {
            assert_eq!(a.curves(0.0), (0.0, 0.0));
            let mut prev = (0.0, 0.0);
            for k in 0..=100 {
                let cur = a.curves(k as f64 / 100.0);
                assert!(cur.0 >= prev.0 && cur.1 >= prev.1);
                prev = cur;
            }
        }
    }
}
