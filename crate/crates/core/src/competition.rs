//! Competition between the clusters infected through `(2,1)` and `(1,2)`.
//!
//! Every site other than the corner is reached by a unique geodesic from the
//! corner, which leaves through either `(2,1)` or `(1,2)`. The competition
//! interface `phi` walks between the two clusters by always stepping to the
//! neighbour with the smaller passage time.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Site, Step};
use crate::lpp::{shape_mu, Parent, PassageGrid};
use crate::weights::Weights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    /// The corner `(1,1)` belongs to neither cluster.
    Neutral,
    /// Geodesic from the corner passes through `(2,1)`.
    From21,
    /// Geodesic from the corner passes through `(1,2)`.
    From12,
}

#[derive(Debug, Clone)]
pub struct LabelGrid {
    origin: Site,
    rows: usize,
    cols: usize,
    labels: Vec<Label>,
}

impl LabelGrid {
    pub fn get(&self, z: Site) -> Option<Label> {
        let di = z.i - self.origin.i;
        let dj = z.j - self.origin.j;
        if di < 0 || dj < 0 || di as usize >= self.rows || dj as usize >= self.cols {
            return None;
        }
        Some(self.labels[di as usize * self.cols + dj as usize])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Propagates cluster labels along the argmax parents in one row-major pass.
pub fn label_clusters(grid: &PassageGrid) -> Result<LabelGrid> {
    let (rows, cols) = (grid.rows(), grid.cols());
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidArgument(format!(
            "competition needs at least a 2x2 grid, got {rows}x{cols}"
        )));
    }
    let mut labels = vec![Label::Neutral; rows * cols];
    for (k, (z, _, parent)) in grid.cells().enumerate() {
        labels[k] = match parent {
            Parent::Origin => Label::Neutral,
            Parent::Left if k == cols => Label::From21,
            Parent::Down if k == 1 => Label::From12,
            Parent::Left => labels[k - cols],
            Parent::Down => labels[k - 1],
        };
        debug_assert!(k == 0 || labels[k] != Label::Neutral, "unlabeled site {z}");
    }
    Ok(LabelGrid {
        origin: grid.origin(),
        rows,
        cols,
        labels,
    })
}

/// The competition interface `phi_0 .. phi_n` and its hitting times
/// `tau_k = G(phi_k) - w(1,1)` (`tau_0 = 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceTrace {
    pub phi: Vec<Site>,
    pub taus: Vec<f64>,
}

impl InterfaceTrace {
    /// Number of steps taken.
    pub fn steps(&self) -> usize {
        self.phi.len().saturating_sub(1)
    }

    pub fn step_sequence(&self) -> Vec<Step> {
        self.phi
            .windows(2)
            .map(|w| Step::between(w[0], w[1]).expect("interface is an up/right path"))
            .collect()
    }

    /// `tau_k`, the time the interface reaches `phi_k`.
    pub fn tau_interface(&self, k: usize) -> Option<f64> {
        self.taus.get(k).copied()
    }

    pub fn horizon(&self) -> f64 {
        self.taus.last().copied().unwrap_or(0.0)
    }

    /// `psi_t = phi_k` for `t` in `[tau_k, tau_{k+1})`.
    pub fn psi_at(&self, t: f64) -> Result<Site> {
        if !(t >= 0.0) {
            return Err(Error::Domain {
                name: "t",
                value: t,
            });
        }
        let horizon = self.horizon();
        if t >= horizon {
            return Err(Error::OutOfHorizon { t, horizon });
        }
        let k = self.taus.partition_point(|&tau| tau <= t) - 1;
        Ok(self.phi[k])
    }

    /// `theta_n = arctan(j_n / i_n)` for `phi_n = (i_n, j_n)`.
    pub fn angle_estimate(&self, n: usize) -> Result<f64> {
        let z = self.phi.get(n).ok_or_else(|| {
            Error::InvalidArgument(format!("step {n} beyond trace of {} steps", self.steps()))
        })?;
        Ok((z.j as f64).atan2(z.i as f64))
    }
}

fn argmin_step(a: f64, b: f64, at: Site) -> Result<Step> {
    if a < b {
        Ok(Step::Right)
    } else if b < a {
        Ok(Step::Up)
    } else {
        Err(Error::TieDetected(at))
    }
}

/// Follows `phi_{k+1} = argmin{G(phi_k + (1,0)), G(phi_k + (0,1))}` for
/// `n_steps` steps from the grid origin.
pub fn competition_interface(grid: &PassageGrid, n_steps: usize) -> Result<InterfaceTrace> {
    let w11 = grid.origin_weight();
    let mut phi = Vec::with_capacity(n_steps + 1);
    let mut taus = Vec::with_capacity(n_steps + 1);
    let mut at = grid.origin();
    phi.push(at);
    taus.push(0.0);
    for _ in 0..n_steps {
        let right = at.step(Step::Right);
        let up = at.step(Step::Up);
        let (Some(gr), Some(gu)) = (
            grid.contains(right).then(|| grid.passage(right)).flatten(),
            grid.contains(up).then(|| grid.passage(up)).flatten(),
        ) else {
            return Err(Error::Truncated("competition interface"));
        };
        let (step, g) = match argmin_step(gr, gu, at.offset(1, 1))? {
            Step::Right => (Step::Right, gr),
            Step::Up => (Step::Up, gu),
        };
        at = at.step(step);
        phi.push(at);
        taus.push(g - w11);
    }
    Ok(InterfaceTrace { phi, taus })
}

/// The interface from the cluster rule: step up when `phi_k + (1,1)` was
/// infected through `(2,1)`, right when through `(1,2)`.
pub fn interface_from_labels(labels: &LabelGrid, n_steps: usize) -> Result<Vec<Site>> {
    let mut at = labels.origin;
    let mut phi = vec![at];
    for _ in 0..n_steps {
        let step = match labels.get(at.offset(1, 1)) {
            Some(Label::From21) => Step::Up,
            Some(Label::From12) => Step::Right,
            Some(Label::Neutral) => {
                return Err(Error::Invariant(format!(
                    "neutral site at {}",
                    at.offset(1, 1)
                )))
            }
            None => return Err(Error::Truncated("competition interface")),
        };
        at = at.step(step);
        phi.push(at);
    }
    Ok(phi)
}

/// Same trace as [`competition_interface`] on the `(n+1) x (n+1)` grid, computed
/// with two rows of passage times. Rows are produced lazily as `phi` moves right.
pub fn competition_interface_rolling<W: Weights>(
    field: &W,
    n_steps: usize,
) -> Result<InterfaceTrace> {
    let cols = n_steps + 1;
    let fill_row = |i: i64, below: Option<&[f64]>, row: &mut Vec<f64>| -> Result<()> {
        row.clear();
        let mut down = 0.0f64;
        for dj in 0..cols {
            let j = dj as i64 + 1;
            let left = below.map_or(0.0, |b| b[dj]);
            if i > 1 && j > 1 && left == down {
                return Err(Error::TieDetected(Site::new(i, j)));
            }
            let g = field.weight(Site::new(i, j)) + left.max(down);
            row.push(g);
            down = g;
        }
        Ok(())
    };

    let w11 = field.weight(Site::ORIGIN);
    let mut lower = Vec::with_capacity(cols);
    let mut upper = Vec::with_capacity(cols);
    fill_row(1, None, &mut lower)?;
    if n_steps > 0 {
        fill_row(2, Some(&lower), &mut upper)?;
    }

    let mut phi = Vec::with_capacity(n_steps + 1);
    let mut taus = Vec::with_capacity(n_steps + 1);
    let mut at = Site::ORIGIN;
    phi.push(at);
    taus.push(0.0);
    for _ in 0..n_steps {
        // `lower` holds row at.i, `upper` holds row at.i + 1
        let b = at.j as usize - 1;
        let gr = upper[b];
        let gu = lower[b + 1];
        match argmin_step(gr, gu, at.offset(1, 1))? {
            Step::Right => {
                at = at.step(Step::Right);
                taus.push(gr - w11);
                std::mem::swap(&mut lower, &mut upper);
                if (at.i as usize) < cols {
                    fill_row(at.i + 1, Some(&lower), &mut upper)?;
                }
            }
            Step::Up => {
                at = at.step(Step::Up);
                taus.push(gu - w11);
            }
        }
        phi.push(at);
    }
    Ok(InterfaceTrace { phi, taus })
}

fn check_angle(name: &'static str, a: f64) -> Result<()> {
    if (0.0..=FRAC_PI_2).contains(&a) {
        Ok(())
    } else {
        Err(Error::Domain { name, value: a })
    }
}

/// `(sin a, cos a)` with `cos a` evaluated as `sin(pi/2 - a)`, so both ends of
/// `[0, pi/2]` give exact zeros.
fn sin_cos(a: f64) -> (f64, f64) {
    (a.sin(), (FRAC_PI_2 - a).sin())
}

/// `P(theta <= alpha) = sqrt(sin a) / (sqrt(sin a) + sqrt(cos a))`.
pub fn theta_cdf(alpha: f64) -> Result<f64> {
    check_angle("alpha", alpha)?;
    let (s, c) = sin_cos(alpha);
    let (s, c) = (s.sqrt(), c.sqrt());
    Ok(s / (s + c))
}

/// `f(theta) = (sqrt(cos) - sqrt(sin)) / (sqrt(cos) + sqrt(sin))`, the
/// asymptotic speed of `I(t) - J(t)`.
pub fn f_of_theta(theta: f64) -> Result<f64> {
    check_angle("theta", theta)?;
    let (s, c) = sin_cos(theta);
    let (s, c) = (s.sqrt(), c.sqrt());
    Ok((c - s) / (c + s))
}

/// Asymptotic velocity of `psi_t`: `(cos, sin) / mu(cos, sin)`.
pub fn speed_point(theta: f64) -> Result<(f64, f64)> {
    check_angle("theta", theta)?;
    let (s, c) = sin_cos(theta);
    let m = shape_mu(c, s)?;
    Ok((c / m, s / m))
}
