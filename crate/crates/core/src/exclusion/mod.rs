//! Totally asymmetric simple exclusion on a finite window: Harris-construction
//! runs from Poisson clocks, runs read off a passage-time grid, and the map
//! between the two that turns a second-class particle into the competition
//! interface.

mod clocks;
mod coupling;
mod harris;
mod lpp_driven;
mod staircase;
mod state;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use clocks::{ClockSet, Epoch};
pub use coupling::{
    coupled_run, coupling_map, recommended_half_width, verify_coupling, CoupledRun, CouplingMap,
    CouplingReport,
};
pub use harris::{harris_simulate, Trajectory};
pub use lpp_driven::{
    initial_hole, initial_particle, lpp_driven_simulate, pair_step_occupied, Interchange,
    LppDrivenRun,
};
pub use staircase::{staircase, staircase_boundary, Staircase};
pub use state::{
    initial_config, Event, EventKind, ExclusionState, InitialKind, Tracker, MIN_HALF_WIDTH,
};

/// A point where the coupled constructions disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: f64,
    pub what: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t = {}: {}", self.t, self.what)
    }
}
