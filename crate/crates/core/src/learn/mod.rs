//! Learning dynamics: polynomial surrogates, leader-follower gradient
//! laws, exploration noise and the per-player learners.

mod agent;
mod buffer;
mod config;
mod gradient;
mod noise;
mod poly;
mod sampling;

pub use agent::{Decision, LearnerStats, Mode, PlayerLearner, RoleActions, StackLearner, VanillaLearner};
pub use buffer::{Sample, SampleBuffer};
pub use config::{LearnerConfig, PolicyConfig};
pub use gradient::{
    follower_gradient, follower_update, leader_gradient, leader_update, multi_step_follower, LeaderGradient,
    MomentumParams,
};
pub use noise::{OuNoise, OuParams};
pub use poly::{basis, basis_len, fit_poly, PolyModel, Role};
pub use sampling::{best_response_sample, ExplorationSchedule};

/// Independent seed for sub-stream `stream` of `base` (SplitMix64 finalizer).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
