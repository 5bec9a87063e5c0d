//! State-based potential games with embedded leader-follower learning,
//! a bulk-goods plant simulator, numerical checks and a trainer.

pub mod config;
pub mod error;
pub mod game;
pub mod learn;
pub mod maps;
pub mod plant;
pub mod trainer;
pub mod verify;

pub use error::{Error, Result};
