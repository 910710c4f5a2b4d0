use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::clocks::ClockSet;
use super::harris::check_clocks;
use super::lpp_driven::lpp_driven_simulate;
use super::state::{initial_config, ExclusionState, InitialKind};
use super::Violation;
use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::lpp::build_grid;
use crate::rng::{self, Domain};
use crate::weights::WeightTable;

/// How often (in clock epochs) the coupled run compares full configurations,
/// on top of the comparisons after every move of the second-class particle.
const FULL_CHECK_EVERY: usize = 64;

/// Keep at most this many violations per run.
const MAX_VIOLATIONS: usize = 16;

/// Half-width that keeps a run to time `horizon` away from the window edges
/// with overwhelming probability: disturbances travel at speed at most 1 in
/// each direction, plus Poisson overshoot.
pub fn recommended_half_width(horizon: f64) -> i64 {
    (2.0 * horizon).ceil() as i64 + 20
}

/// The second-class-particle process and the pair-step process run together.
///
/// The first process starts from the step configuration with a second-class
/// particle at 0 and uses the clocks as given. The second starts from the
/// pair-step configuration on a window one site wider, and sees the epoch at
/// `y` as an epoch at `y` when `y` is left of the second-class particle and at
/// `y + 1` otherwise; the auxiliary clock rings at the tagged hole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledRun {
    pub seed: u64,
    pub horizon: f64,
    /// Second-class particle position after each of its moves.
    pub x_moves: Vec<(f64, i64)>,
    /// Pair labels `(I, J)` after each move of the tagged pair.
    pub pair_moves: Vec<(f64, Site)>,
    /// Interchange times of hole `i` and particle `j` in the pair-step process.
    pub interchanges: Vec<(Site, f64)>,
    /// Times of every state change of the first process.
    pub change_times: Vec<f64>,
    pub full_checks: usize,
    pub violations: Vec<Violation>,
}

fn collapse_mismatch(one: &ExclusionState, zero_one: &ExclusionState) -> Option<String> {
    let x = one.second_class()?;
    let (left, right) = one.window();
    for y in left..=right + 1 {
        let expect = if y < x {
            one.occupied(y)
        } else if y == x {
            Some(false)
        } else if y == x + 1 {
            Some(true)
        } else {
            one.occupied(y - 1)
        };
        if zero_one.occupied(y) != expect {
            return Some(format!(
                "occupations disagree at site {y} with the second-class particle at {x}"
            ));
        }
    }
    None
}

pub fn coupled_run(clocks: &ClockSet, horizon: f64) -> Result<CoupledRun> {
    let (left, right) = clocks.window();
    let mut one = initial_config(InitialKind::Step, left, right)?.with_second_class(0)?;
    let mut zero_one = initial_config(InitialKind::PairStep, left, right + 1)?;
    check_clocks(&one, clocks, horizon)?;

    let mut run = CoupledRun {
        seed: clocks.seed(),
        horizon,
        x_moves: Vec::new(),
        pair_moves: Vec::new(),
        interchanges: Vec::new(),
        change_times: Vec::new(),
        full_checks: 0,
        violations: Vec::new(),
    };
    let flag = |run: &mut CoupledRun, t: f64, what: String| {
        if run.violations.len() < MAX_VIOLATIONS {
            run.violations.push(Violation { t, what });
        }
    };

    let aux = clocks.aux();
    let mut a = 0;
    for (k, e) in clocks.epochs().iter().enumerate() {
        if e.t > horizon {
            break;
        }
        while a < aux.len() && aux[a] < e.t {
            let x = one.second_class().expect("tracked");
            if zero_one.apply_epoch(aux[a], x)?.is_some() {
                flag(
                    &mut run,
                    aux[a],
                    "the tagged hole moved on its own clock".into(),
                );
            }
            a += 1;
        }
        let x = one.second_class().expect("tracked");
        let mapped = if e.site < x { e.site } else { e.site + 1 };
        let ev1 = one.apply_epoch(e.t, e.site)?;
        let ev01 = zero_one.apply_epoch(e.t, mapped)?;
        if ev1.is_some() {
            run.change_times.push(e.t);
        }
        if let Some(ev) = ev01 {
            if let (Some(i), Some(j)) = (ev.hole_label, ev.particle_label) {
                run.interchanges.push((Site::new(i, j), e.t));
            }
        }
        let x_moved = ev1.is_some_and(|ev| ev.tracked_moved);
        let pair_moved = ev01.is_some_and(|ev| ev.tracked_moved);
        let x_now = one.second_class().expect("tracked");
        let (hole, i, j) = zero_one.pair().expect("tracked");
        if x_moved {
            run.x_moves.push((e.t, x_now));
        }
        if pair_moved {
            run.pair_moves.push((e.t, Site::new(i, j)));
        }
        if x_now != hole || hole != i - j || x_moved != pair_moved {
            flag(
                &mut run,
                e.t,
                format!(
                    "second-class particle at {x_now}, tagged hole {i} at {hole}, particle {j}"
                ),
            );
        }
        if x_moved || k % FULL_CHECK_EVERY == 0 {
            run.full_checks += 1;
            if let Some(what) = collapse_mismatch(&one, &zero_one) {
                flag(&mut run, e.t, what);
            }
        }
    }
    while a < aux.len() && aux[a] <= horizon {
        let x = one.second_class().expect("tracked");
        if zero_one.apply_epoch(aux[a], x)?.is_some() {
            flag(
                &mut run,
                aux[a],
                "the tagged hole moved on its own clock".into(),
            );
        }
        a += 1;
    }
    one.advance_to(horizon)?;
    zero_one.advance_to(horizon)?;
    run.full_checks += 1;
    if let Some(what) = collapse_mismatch(&one, &zero_one) {
        flag(&mut run, horizon, what);
    }
    Ok(run)
}

/// Interchange times of the pair-step process, seen as last-passage times
/// `G'(i, j)` with `G'(1,1) = 0`, and the weights they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMap {
    seed: u64,
    horizon: f64,
    corner: f64,
    times: HashMap<Site, f64>,
    max_i: i64,
    max_j: i64,
}

impl CouplingMap {
    /// Builds the map from a run. The weight at `(1,1)` does not come from any
    /// clock; it is an independent draw from `seed`.
    pub fn from_run(run: &CoupledRun) -> Self {
        let times: HashMap<Site, f64> = run.interchanges.iter().copied().collect();
        let max_i = times.keys().map(|z| z.i).max().unwrap_or(1);
        let max_j = times.keys().map(|z| z.j).max().unwrap_or(1);
        CouplingMap {
            seed: run.seed,
            horizon: run.horizon,
            corner: rng::exp1(run.seed, Domain::CornerWeight, 1, 1),
            times,
            max_i,
            max_j,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Largest hole and particle labels that took part in an interchange.
    pub fn extent(&self) -> (i64, i64) {
        (self.max_i, self.max_j)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `G'(z)`: 0 at `(1,1)` and on the boundary, the interchange time when
    /// it happened before the horizon, `None` otherwise.
    pub fn passage(&self, z: Site) -> Option<f64> {
        if z.i <= 0 || z.j <= 0 || z == Site::ORIGIN {
            Some(0.0)
        } else {
            self.times.get(&z).copied()
        }
    }

    /// `w'(z) = G'(z) - max(G'(z - (1,0)), G'(z - (0,1)))`.
    pub fn weight(&self, z: Site) -> Option<f64> {
        if z == Site::ORIGIN {
            return Some(self.corner);
        }
        let g = self.passage(z)?;
        let a = self.passage(z.offset(-1, 0))?;
        let b = self.passage(z.offset(0, -1))?;
        Some(g - a.max(b))
    }

    /// The weights on `[1, rows] x [1, cols]`. Every site must have been
    /// reached by the horizon.
    pub fn weights(&self, rows: usize, cols: usize) -> Result<WeightTable> {
        let mut missing = None;
        let table = WeightTable::from_fn(rows, cols, |z| {
            self.weight(z).unwrap_or_else(|| {
                missing.get_or_insert(z);
                1.0
            })
        })?;
        match missing {
            Some(z) => Err(Error::IncompleteRectangle { missing: z }),
            None => Ok(table),
        }
    }

    /// The weights on `[1, rows] x [1, cols]`, with each site not reached by
    /// the horizon given weight `horizon + E`, `E` an independent Exp(1), so
    /// that its passage time exceeds the horizon. Passage times up to the
    /// horizon are those of the run.
    pub fn censored_weights(&self, rows: usize, cols: usize) -> Result<WeightTable> {
        WeightTable::from_fn(rows, cols, |z| {
            self.weight(z).unwrap_or_else(|| {
                self.horizon + rng::exp1(self.seed, Domain::CornerWeight, z.i, z.j)
            })
        })
    }
}

/// Runs the coupled processes and returns the induced weight map.
pub fn coupling_map(clocks: &ClockSet, horizon: f64) -> Result<CouplingMap> {
    Ok(CouplingMap::from_run(&coupled_run(clocks, horizon)?))
}

/// Outcome of [`verify_coupling`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub seed: u64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub events_checked: usize,
    pub violations: Vec<Violation>,
}

impl CouplingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// `Err(CouplingViolation)` carrying the first disagreement.
    pub fn ensure(&self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::CouplingViolation(Box::new(v.clone()))),
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(1.0)
}

/// Checks the coupling end to end for one seed: runs the second-class process
/// from Poisson clocks on `[-half_width, half_width]`, rebuilds the passage
/// grid from the induced weights, runs the grid-driven process, and compares
/// the second-class particle with the tagged hole at every event time of
/// either process up to `horizon`.
pub fn verify_coupling(seed: u64, horizon: f64, half_width: i64) -> Result<CouplingReport> {
    let need = recommended_half_width(horizon);
    if half_width < need {
        return Err(Error::WindowTooSmall {
            left: -half_width,
            right: half_width,
            reason: "half-width must be at least 2T + 20",
        });
    }
    let clocks = ClockSet::new(seed, -half_width, half_width, horizon)?;
    let run = coupled_run(&clocks, horizon)?;
    let map = CouplingMap::from_run(&run);
    let (mi, mj) = map.extent();
    let (rows, cols) = ((mi + 2) as usize, (mj + 2) as usize);
    let grid = build_grid(&map.censored_weights(rows, cols)?, rows, cols)?;
    let lpp = lpp_driven_simulate(&grid, horizon)?;

    let mut violations = run.violations.clone();
    let mut flag = |t: f64, what: String| {
        if violations.len() < MAX_VIOLATIONS {
            violations.push(Violation { t, what });
        }
    };

    // move-by-move: second-class jumps, grid interface steps, mapped-clock pair moves
    let trace = &lpp.pair_trace;
    let steps = trace.steps();
    if run.x_moves.len() != steps || run.pair_moves.len() != steps {
        let t = [run.x_moves.last().map(|m| m.0), trace.taus.last().copied()]
            .into_iter()
            .flatten()
            .fold(0.0, f64::max);
        flag(
            t,
            format!(
                "{} second-class moves, {} interface steps, {} pair moves",
                run.x_moves.len(),
                steps,
                run.pair_moves.len()
            ),
        );
    }
    for (k, (&(tx, x), &(tp, p))) in run.x_moves.iter().zip(&run.pair_moves).enumerate() {
        let Some((&phi, &tau)) = trace.phi.get(k + 1).zip(trace.taus.get(k + 1)) else {
            break;
        };
        if !close(tx, tau) || tx != tp {
            flag(
                tx,
                format!("move {k}: jump at {tx}, interface at {tau}, pair at {tp}"),
            );
            break;
        }
        if x != phi.i - phi.j || p != phi {
            flag(
                tx,
                format!("move {k}: particle at {x}, interface at {phi}, pair at {p}"),
            );
            break;
        }
    }

    // pointwise: at every event time of either process
    let mut times: Vec<f64> = run
        .change_times
        .iter()
        .copied()
        .chain(lpp.interchanges.iter().map(|c| c.t))
        .collect();
    times.sort_unstable_by(f64::total_cmp);
    times.dedup_by(|a, b| close(*a, *b));
    for &t in &times {
        let tol = 1e-9 * t.max(1.0);
        let kx = run.x_moves.partition_point(|m| m.0 <= t + tol);
        let x = if kx == 0 { 0 } else { run.x_moves[kx - 1].1 };
        let kp = trace.taus.partition_point(|&s| s <= t + tol);
        let phi = trace.phi[kp - 1];
        if x != phi.i - phi.j {
            flag(
                t,
                format!("second-class particle at {x}, interface at {phi}"),
            );
        }
    }

    Ok(CouplingReport {
        seed,
        horizon,
        events_checked: times.len(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_run_agrees() {
        let report = verify_coupling(1, 10.0, 40).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
        assert!(report.events_checked > 50);
    }

    #[test]
    fn weights_are_positive() {
        let clocks = ClockSet::new(3, -40, 40, 10.0).unwrap();
        let map = coupling_map(&clocks, 10.0).unwrap();
        assert!(!map.is_empty());
        let table = map.censored_weights(6, 6).unwrap();
        assert!(table.values().iter().all(|&w| w > 0.0));
        assert!(matches!(
            map.weights(200, 200),
            Err(Error::IncompleteRectangle { .. })
        ));
    }

    #[test]
    fn narrow_window_is_rejected() {
        assert!(matches!(
            verify_coupling(1, 100.0, 100),
            Err(Error::WindowTooSmall { .. })
        ));
    }
}
