use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A normalized actuator command in `[0, 1]`.
///
/// Learning only ever sees this scale; physical units exist at the plant
/// boundary through [`DeviceRange`].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ActionValue(f64);

impl ActionValue {
    pub const ZERO: ActionValue = ActionValue(0.0);
    pub const MID: ActionValue = ActionValue(0.5);
    pub const ONE: ActionValue = ActionValue(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::ActionOutOfRange(value))
        }
    }

    /// Clamp into `[0, 1]`. NaN maps to 0.
    pub fn clamped(value: f64) -> Self {
        if value.is_nan() {
            Self(0.0)
        } else {
            Self(value.clamp(0.0, 1.0))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// Binary actuators switch on at 0.5.
    #[inline]
    pub fn is_on(self) -> bool {
        self.0 >= 0.5
    }

    pub fn denormalize(self, range: &DeviceRange) -> f64 {
        match range.unit {
            DeviceUnit::Binary => {
                if self.is_on() {
                    range.max
                } else {
                    range.min
                }
            }
            _ => range.min + self.0 * (range.max - range.min),
        }
    }
}

impl TryFrom<f64> for ActionValue {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        ActionValue::new(value)
    }
}

impl From<ActionValue> for f64 {
    fn from(a: ActionValue) -> f64 {
        a.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceUnit {
    Rpm,
    SecondsOn,
    Binary,
}

/// Physical command range of one actuator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceRange {
    pub min: f64,
    pub max: f64,
    pub unit: DeviceUnit,
}

/// How a leader and follower action merge into the executed action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoalitionMode {
    #[default]
    Additive,
    Multiplicative,
}

pub fn coalition_combine(leader: ActionValue, follower: ActionValue, mode: CoalitionMode) -> ActionValue {
    match mode {
        CoalitionMode::Additive => ActionValue::clamped(leader.0 + follower.0),
        CoalitionMode::Multiplicative => ActionValue::clamped(leader.0 * follower.0),
    }
}
