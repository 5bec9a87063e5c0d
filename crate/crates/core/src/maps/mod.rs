//! Performance maps: per-support-vector policy storage read back by
//! inverse-squared-distance interpolation.

mod grid;
mod io;
mod map;
mod stacked;

pub use grid::SupportGrid;
pub use io::{decode, encode, load_map, save_map, StoredMap, MAP_FORMAT_VERSION};
pub use map::{Cell, PerformanceMap};
pub use stacked::{layer_index, StackedMap};

/// Default smoothing term of the interpolation weights.
pub const DEFAULT_GAMMA: f64 = 1e-6;
