//! Scenario data model and the communication/sensing observables.

mod audit;
mod observables;
mod types;

pub use audit::{evaluate, Evaluation, Violation, GAIN_TOL, POWER_TOL};
pub use observables::{
    beampattern, beampattern_grid, equivalent_channel, feed_response, free_space_gain, los_channel, per_feed_pattern, sidelobe_level,
    sinr_from_response, steering_vector, user_rate, user_sinr, Links,
};
pub use types::{BeamformingState, BeampatternGrid, Direction, MultipathChannel, PathComponent, Scenario, Thresholds, User};
