use serde::{Deserialize, Serialize};

use crate::competition::InterfaceTrace;
use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::lpp::PassageGrid;

/// Particle `j` and hole `i` exchange places at time `t`; the particle moves
/// from `from` to `from + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interchange {
    pub t: f64,
    pub i: i64,
    pub j: i64,
    pub from: i64,
    /// Time since both the particle and the hole became ready to exchange.
    pub wait: f64,
}

/// Exclusion process read off a passage grid: interchange `(i, j)` happens at
/// `G(i, j) - w(1,1)`, starting from the pair-step configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LppDrivenRun {
    pub horizon: f64,
    pub interchanges: Vec<Interchange>,
    /// The tagged hole/particle pair labels `(I, J)` as a path with jump times.
    pub pair_trace: InterfaceTrace,
}

/// Initial pair-step position of particle `j`.
pub fn initial_particle(j: i64) -> i64 {
    if j == 1 {
        1
    } else {
        1 - j
    }
}

/// Initial pair-step position of hole `i`.
pub fn initial_hole(i: i64) -> i64 {
    if i == 1 {
        0
    } else {
        i
    }
}

/// Pair-step occupation at `x`.
pub fn pair_step_occupied(x: i64) -> bool {
    x <= -1 || x == 1
}

/// Runs the exclusion process encoded by `grid` up to time `horizon`.
///
/// The grid must start at `(1,1)` and be large enough that every site on its
/// far boundary is reached after `horizon`, or the run would miss interchanges.
pub fn lpp_driven_simulate(grid: &PassageGrid, horizon: f64) -> Result<LppDrivenRun> {
    if grid.origin() != Site::ORIGIN {
        return Err(Error::InvalidArgument(format!(
            "grid must start at (1, 1), not {}",
            grid.origin()
        )));
    }
    if !(horizon >= 0.0) {
        return Err(Error::Domain {
            name: "horizon",
            value: horizon,
        });
    }
    let w11 = grid.origin_weight();
    if grid.boundary_min() - w11 <= horizon {
        return Err(Error::Truncated("grid boundary reached before the horizon"));
    }
    let mut due: Vec<(f64, Site)> = grid
        .cells()
        .filter(|&(z, _, _)| z != Site::ORIGIN)
        .map(|(z, g, _)| (g - w11, z))
        .filter(|&(t, _)| t <= horizon)
        .collect();
    due.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if let Some(w) = due.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::TieDetected(w[1].1));
    }

    let rows = grid.rows() as i64;
    let cols = grid.cols() as i64;
    let mut particles: Vec<i64> = (1..=cols).map(initial_particle).collect();
    let mut holes: Vec<i64> = (1..=rows).map(initial_hole).collect();
    let mut p_moved = vec![0.0f64; cols as usize];
    let mut h_moved = vec![0.0f64; rows as usize];
    let (mut pi, mut pj) = (1i64, 1i64);
    let mut phi = vec![Site::ORIGIN];
    let mut taus = vec![0.0];
    let mut interchanges = Vec::with_capacity(due.len());

    for (t, z) in due {
        let (iu, ju) = ((z.i - 1) as usize, (z.j - 1) as usize);
        let p = particles[ju];
        let h = holes[iu];
        if h != p + 1 {
            return Err(Error::Invariant(format!(
                "particle {} at {p} and hole {} at {h} are not neighbours at {t}",
                z.j, z.i
            )));
        }
        let wait = t - p_moved[ju].max(h_moved[iu]);
        particles[ju] = h;
        holes[iu] = p;
        p_moved[ju] = t;
        h_moved[iu] = t;
        interchanges.push(Interchange {
            t,
            i: z.i,
            j: z.j,
            from: p,
            wait,
        });
        if (z.i, z.j) == (pi + 1, pj) || (z.i, z.j) == (pi, pj + 1) {
            pi = z.i;
            pj = z.j;
            phi.push(z);
            taus.push(t);
        }
    }
    Ok(LppDrivenRun {
        horizon,
        interchanges,
        pair_trace: InterfaceTrace { phi, taus },
    })
}

impl LppDrivenRun {
    /// Occupation on `[left, right]` at time `t` (right-continuous).
    pub fn occupation_at(&self, t: f64, left: i64, right: i64) -> Result<Vec<bool>> {
        if t > self.horizon {
            return Err(Error::OutOfHorizon {
                t,
                horizon: self.horizon,
            });
        }
        let mut occ: Vec<bool> = (left..=right).map(pair_step_occupied).collect();
        let mut set = |x: i64, v: bool| {
            if (left..=right).contains(&x) {
                occ[(x - left) as usize] = v;
            }
        };
        for c in self.interchanges.iter().take_while(|c| c.t <= t) {
            set(c.from, false);
            set(c.from + 1, true);
        }
        Ok(occ)
    }

    /// Labels `(I, J)` of the tagged pair at time `t`.
    pub fn pair_at(&self, t: f64) -> Site {
        let k = self.pair_trace.taus.partition_point(|&s| s <= t);
        self.pair_trace.phi[k - 1]
    }

    /// Position of the tagged hole at time `t`, which is `I - J`.
    pub fn tagged_hole_at(&self, t: f64) -> i64 {
        let z = self.pair_at(t);
        z.i - z.j
    }
}
