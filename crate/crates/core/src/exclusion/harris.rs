use serde::{Deserialize, Serialize};

use super::clocks::ClockSet;
use super::state::{Event, ExclusionState};
use crate::error::{Error, Result};

/// The state changes of a Harris-construction run up to a horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub horizon: f64,
    pub events: Vec<Event>,
}

impl Trajectory {
    /// Tracked position at time `t`, right-continuous, given its initial value.
    pub fn tracked_at(&self, initial: i64, t: f64) -> i64 {
        let k = self.events.partition_point(|e| e.t <= t);
        self.events[..k]
            .iter()
            .rev()
            .find(|e| e.tracked_moved)
            .and_then(|e| e.tracked)
            .unwrap_or(initial)
    }

    /// Times at which the tracked object moved, with its position afterwards.
    pub fn tracked_moves(&self) -> Vec<(f64, i64)> {
        self.events
            .iter()
            .filter(|e| e.tracked_moved)
            .filter_map(|e| e.tracked.map(|x| (e.t, x)))
            .collect()
    }
}

/// Runs the state forward through every epoch of `clocks` up to `horizon`,
/// recording each state change. The state is left at time `horizon`.
pub fn harris_simulate(
    state: &mut ExclusionState,
    clocks: &ClockSet,
    horizon: f64,
) -> Result<Trajectory> {
    check_clocks(state, clocks, horizon)?;
    let mut events = Vec::new();
    for e in clocks.epochs() {
        if e.t > horizon {
            break;
        }
        if let Some(ev) = state.apply_epoch(e.t, e.site)? {
            events.push(ev);
        }
    }
    state.advance_to(horizon)?;
    Ok(Trajectory { horizon, events })
}

pub(crate) fn check_clocks(state: &ExclusionState, clocks: &ClockSet, horizon: f64) -> Result<()> {
    if !(horizon >= state.time()) {
        return Err(Error::Domain {
            name: "horizon",
            value: horizon,
        });
    }
    if horizon > clocks.horizon() {
        return Err(Error::OutOfHorizon {
            t: horizon,
            horizon: clocks.horizon(),
        });
    }
    let (l, r) = state.window();
    let (cl, cr) = clocks.window();
    if cl > l || cr < r {
        return Err(Error::InvalidArgument(format!(
            "clocks on [{cl}, {cr}] do not cover the window [{l}, {r}]"
        )));
    }
    Ok(())
}
