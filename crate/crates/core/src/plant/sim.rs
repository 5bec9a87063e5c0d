use serde::Serialize;

use super::config::PlantConfig;
use super::{utility_d, utility_p, utility_side};
use crate::error::{Error, Result};
use crate::game::{ActionValue, ObjectiveTerms};

/// Full simulator state. Window integrals (`outside_prev`, `outside_next`,
/// `demand_ledger`, `energy`) are cleared by [`PlantState::reset_window`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantState {
    pub time: f64,
    /// Liters per reservoir.
    pub fills: Vec<f64>,
    /// Cumulative spill per reservoir, liters.
    pub overflow: Vec<f64>,
    /// Instantaneous power per player, W.
    pub power: Vec<f64>,
    /// Unmet demand in the current window, liters, never positive.
    pub demand_ledger: f64,
    /// Seconds the prior reservoir spent outside its limits this window.
    pub outside_prev: Vec<f64>,
    /// Seconds the next reservoir spent outside its limits this window.
    pub outside_next: Vec<f64>,
    /// Energy per player this window, J.
    pub energy: Vec<f64>,
    pub window_time: f64,
    /// Cumulative external supply, liters.
    pub supplied: f64,
    /// Cumulative demand served, liters.
    pub delivered: f64,
    /// Cumulative demand requested, liters.
    pub requested: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepMeasurement {
    /// Liters moved by each actuator.
    pub moved: Vec<f64>,
    pub power: Vec<f64>,
    pub spilled: f64,
    pub delivered: f64,
    pub unmet: f64,
}

fn outside(fill: f64, spec: &super::ReservoirSpec) -> bool {
    let q = fill / spec.capacity;
    q < spec.lower || q > spec.upper
}

impl PlantState {
    pub fn initial(config: &PlantConfig) -> Self {
        let n = config.players();
        let r = config.reservoirs.len();
        Self {
            time: 0.0,
            fills: config.reservoirs.iter().map(|s| s.initial).collect(),
            overflow: vec![0.0; r],
            power: vec![0.0; n],
            demand_ledger: 0.0,
            outside_prev: vec![0.0; n],
            outside_next: vec![0.0; n],
            energy: vec![0.0; n],
            window_time: 0.0,
            supplied: 0.0,
            delivered: 0.0,
            requested: 0.0,
        }
    }

    pub fn reset_window(&mut self) {
        self.demand_ledger = 0.0;
        self.outside_prev.iter_mut().for_each(|v| *v = 0.0);
        self.outside_next.iter_mut().for_each(|v| *v = 0.0);
        self.energy.iter_mut().for_each(|v| *v = 0.0);
        self.window_time = 0.0;
    }

    /// Normalized fills of the player's state reservoirs, prior first.
    pub fn observation(&self, config: &PlantConfig, player: usize) -> Vec<f64> {
        config
            .state_reservoirs(player)
            .into_iter()
            .map(|r| self.fills[r] / config.reservoirs[r].capacity)
            .collect()
    }

    /// Mean power of `player` over the current window, W.
    pub fn mean_power(&self, player: usize) -> f64 {
        if self.window_time > 0.0 {
            self.energy[player] / self.window_time
        } else {
            0.0
        }
    }

    /// Utility terms of `player` over the current window. Players without a
    /// prior reservoir score that side as never violated.
    pub fn objective_terms(&self, config: &PlantConfig, player: usize) -> ObjectiveTerms {
        let a = &config.actuators[player];
        ObjectiveTerms {
            fill_prev: if a.source.is_some() { utility_side(self.outside_prev[player]) } else { 1.0 },
            fill_next: utility_side(self.outside_next[player]),
            power: utility_p(self.mean_power(player) / config.power_norm),
            demand: config.carries_demand(player).then(|| utility_d(self.demand_ledger)),
        }
    }

    pub fn total_overflow(&self) -> f64 {
        self.overflow.iter().sum()
    }

    /// `initial + supplied - (fills + overflow + delivered)`.
    pub fn mass_residual(&self, config: &PlantConfig) -> f64 {
        let initial: f64 = config.reservoirs.iter().map(|r| r.initial).sum();
        let held: f64 = self.fills.iter().sum();
        initial + self.supplied - (held + self.total_overflow() + self.delivered)
    }
}

/// Advances the plant by `dt` seconds under `actions`.
///
/// Limit indicators and energy use the pre-step state. Actuators pull from
/// the pre-step source fill, scaled down together when they ask for more
/// than is there; the demand draw takes what the actuators leave. Inflow
/// beyond capacity spills.
pub fn step(
    config: &PlantConfig,
    state: &PlantState,
    actions: &[ActionValue],
    dt: f64,
) -> Result<(PlantState, StepMeasurement)> {
    if actions.len() != config.players() {
        return Err(Error::Simulation {
            time: state.time,
            reason: format!("expected {} actions, got {}", config.players(), actions.len()),
        });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Simulation { time: state.time, reason: format!("bad dt {dt}") });
    }
    if let Some(r) = state.fills.iter().position(|f| !f.is_finite()) {
        return Err(Error::Simulation { time: state.time, reason: format!("non-finite fill in reservoir {r}") });
    }

    let mut next = state.clone();
    let n = config.players();

    for (p, a) in config.actuators.iter().enumerate() {
        if let Some(s) = a.source {
            if outside(state.fills[s], &config.reservoirs[s]) {
                next.outside_prev[p] += dt;
            }
        }
        if outside(state.fills[a.sink], &config.reservoirs[a.sink]) {
            next.outside_next[p] += dt;
        }
    }

    let mut requested = vec![0.0; n];
    let mut power = vec![0.0; n];
    for (p, (spec, action)) in config.actuators.iter().zip(actions).enumerate() {
        let (flow, watts) = spec.curves(action.get());
        requested[p] = flow * dt;
        power[p] = watts;
    }

    let mut outflow = vec![0.0; state.fills.len()];
    for (p, spec) in config.actuators.iter().enumerate() {
        if let Some(s) = spec.source {
            outflow[s] += requested[p];
        }
    }
    let scale: Vec<f64> = outflow
        .iter()
        .zip(&state.fills)
        .map(|(&want, &have)| if want > have { have / want } else { 1.0 })
        .collect();

    let mut moved = vec![0.0; n];
    let mut delta = vec![0.0; state.fills.len()];
    for (p, spec) in config.actuators.iter().enumerate() {
        moved[p] = match spec.source {
            Some(s) => requested[p] * scale[s],
            None => requested[p],
        };
        if let Some(s) = spec.source {
            delta[s] -= moved[p];
        } else {
            next.supplied += moved[p];
        }
        delta[spec.sink] += moved[p];
    }

    let mut delivered = 0.0;
    let mut unmet = 0.0;
    let want = config.demand_rate * dt;
    if let Some(d) = config.demand_reservoir {
        let left = (state.fills[d] + delta[d].min(0.0)).max(0.0);
        delivered = want.min(left);
        unmet = want - delivered;
        delta[d] -= delivered;
    }

    let mut spilled = 0.0;
    for (r, spec) in config.reservoirs.iter().enumerate() {
        let f = (state.fills[r] + delta[r]).max(0.0);
        if f > spec.capacity {
            spilled += f - spec.capacity;
            next.overflow[r] += f - spec.capacity;
            next.fills[r] = spec.capacity;
        } else {
            next.fills[r] = f;
        }
    }

    for p in 0..n {
        next.energy[p] += power[p] * dt;
    }
    next.power = power.clone();
    next.demand_ledger -= unmet;
    next.delivered += delivered;
    next.requested += want;
    next.time += dt;
    next.window_time += dt;

    Ok((next, StepMeasurement { moved, power, spilled, delivered, unmet }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::{build_bglp, ActuatorKind, ActuatorSpec, BglpParams, ReservoirSpec};

    fn two_tank(source_fill: f64, sink_fill: f64, sink_cap: f64) -> PlantConfig {
        let tank = |name: &str, capacity: f64, initial: f64| ReservoirSpec {
            name: name.into(),
            capacity,
            initial,
            lower: 0.2,
            upper: 0.8,
        };
        PlantConfig::new(
            vec![tank("a", 20.0, source_fill), tank("b", sink_cap, sink_fill)],
            vec![ActuatorSpec {
                name: "belt".into(),
                kind: ActuatorKind::VacuumPumpTimed,
                max_flow: 1.0,
                max_power: 10.0,
                source: Some(0),
                sink: 1,
            }],
            1.0,
            1.0,
            0.0,
            None,
            10.0,
        )
        .unwrap()
    }

    fn a(v: f64) -> ActionValue {
        ActionValue::new(v).unwrap()
    }

    #[test]
    fn null_action_keeps_fills_and_counts_low_levels() {
        let c = build_bglp(&BglpParams { demand_rate: 0.0, initial_fill: 0.1, ..Default::default() }).unwrap();
        let s0 = PlantState::initial(&c);
        let (s1, m) = step(&c, &s0, &[a(0.0); 5], 1.0).unwrap();
        assert_eq!(s1.fills, s0.fills);
        assert!(m.power.iter().all(|&p| p == 0.0));
        assert!(s1.outside_prev[1..].iter().all(|&v| v == 1.0));
    }

    #[test]
    fn single_transfer_conserves() {
        let c = two_tank(10.0, 0.0, 20.0);
        let (s1, _) = step(&c, &PlantState::initial(&c), &[a(1.0)], 1.0).unwrap();
        assert_eq!(s1.fills, vec![9.0, 1.0]);
        assert_eq!(s1.mass_residual(&c), 0.0);
    }

    #[test]
    fn full_sink_spills() {
        let c = two_tank(10.0, 5.0, 5.0);
        let (s1, m) = step(&c, &PlantState::initial(&c), &[a(1.0)], 1.0).unwrap();
        assert_eq!(s1.fills[1], 5.0);
        assert_eq!(s1.overflow[1], 1.0);
        assert_eq!(m.spilled, 1.0);
    }

    #[test]
    fn empty_source_limits_flow() {
        let c = two_tank(0.25, 0.0, 20.0);
        let (s1, m) = step(&c, &PlantState::initial(&c), &[a(1.0)], 1.0).unwrap();
        assert_eq!(m.moved[0], 0.25);
        assert_eq!(s1.fills, vec![0.0, 0.25]);
        assert_eq!(m.power[0], 10.0);
    }

    #[test]
    fn unmet_demand_lowers_ledger() {
        let c = build_bglp(&BglpParams { initial_fill: 0.0, ..Default::default() }).unwrap();
        let (s1, m) = step(&c, &PlantState::initial(&c), &[a(0.0); 5], 1.0).unwrap();
        assert_eq!(m.unmet, 0.125);
        assert_eq!(s1.demand_ledger, -0.125);
        let t = s1.objective_terms(&c, 4);
        assert_eq!(t.demand, Some(1.0 / 1.125));
    }

    #[test]
    fn nan_fill_is_an_error() {
        let c = two_tank(1.0, 1.0, 5.0);
        let mut s = PlantState::initial(&c);
        s.fills[0] = f64::NAN;
        assert!(matches!(step(&c, &s, &[a(0.5)], 1.0), Err(Error::Simulation { .. })));
    }

    #[test]
    fn window_reset_clears_integrals_only() {
        let c = build_bglp(&BglpParams::default()).unwrap();
        let (mut s, _) = step(&c, &PlantState::initial(&c), &[a(0.7); 5], 1.0).unwrap();
        let fills = s.fills.clone();
        s.reset_window();
        assert_eq!(s.fills, fills);
        assert_eq!(s.energy, vec![0.0; 5]);
        assert_eq!(s.window_time, 0.0);
    }
}
