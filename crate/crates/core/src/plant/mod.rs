//! Reservoir and actuator simulator of a bulk-goods transport line.

mod config;
mod sim;

pub use config::{build_bglp, ActuatorKind, ActuatorParams, ActuatorSpec, BglpParams, PlantConfig, ReservoirSpec};
pub use sim::{step, PlantState, StepMeasurement};

/// One side of the fill-level utility, `1/(1+V)` with `V` in seconds.
pub fn utility_side(seconds_outside: f64) -> f64 {
    1.0 / (1.0 + seconds_outside.max(0.0))
}

/// Fill-level utility over both neighbouring reservoirs.
pub fn utility_v(v_prev: f64, v_next: f64) -> f64 {
    utility_side(v_prev) + utility_side(v_next)
}

/// Power utility of a normalized mean power.
pub fn utility_p(power: f64) -> f64 {
    1.0 / (1.0 + power.max(0.0))
}

/// Demand utility of the (non-positive) unmet-demand ledger.
pub fn utility_d(ledger: f64) -> f64 {
    1.0 / (1.0 - ledger.min(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn utility_examples() {
        assert_eq!(utility_v(0.0, 0.0), 2.0);
        assert_eq!(utility_v(1.0, 0.0), 1.5);
        for v in [0.3, 2.0, 17.0] {
            assert_eq!(utility_v(v, v), 2.0 / (1.0 + v));
        }
        assert_eq!(utility_p(0.0), 1.0);
        assert_eq!(utility_p(1.0), 0.5);
        assert!(utility_p(1e12) < 1e-11);
        assert_eq!(utility_d(0.0), 1.0);
        assert_eq!(utility_d(-1.0), 0.5);
        assert_eq!(utility_d(0.3), 1.0);
        let mut prev = 1.0;
        for k in 1..50 {
            let u = utility_d(-(k as f64) * 0.1);
            assert!(u < prev);
            prev = u;
        }
    }
}
