//! Passage times `G(z)` of exponential last-passage percolation.
//!
//! `G(z) = w(z) + max{G(z - (0,1)), G(z - (1,0))}` with `G = 0` on the virtual
//! row and column just below and left of the grid origin. The grid keeps the
//! argmax of every recurrence step so geodesics can be backtracked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{is_up_right_path, Site, Step};
use crate::weights::Weights;

/// Which predecessor realised the max in the recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Parent {
    /// The grid origin; no predecessor.
    Origin,
    /// `z - (1, 0)`
    Left,
    /// `z - (0, 1)`
    Down,
}

impl Parent {
    pub fn tag(self) -> char {
        match self {
            Parent::Origin => 'O',
            Parent::Left => 'L',
            Parent::Down => 'D',
        }
    }

    pub fn from_tag(c: char) -> Option<Parent> {
        match c {
            'O' => Some(Parent::Origin),
            'L' => Some(Parent::Left),
            'D' => Some(Parent::Down),
            _ => None,
        }
    }

    pub fn predecessor(self, z: Site) -> Option<Site> {
        match self {
            Parent::Origin => None,
            Parent::Left => Some(z.offset(-1, 0)),
            Parent::Down => Some(z.offset(0, -1)),
        }
    }
}

/// Passage times over `[origin, origin + (rows-1, cols-1)]`.
///
/// Rows index the first coordinate and columns the second, so a `1 x n` grid
/// is the single column `(1,1) .. (1,n)`.
#[derive(Debug, Clone)]
pub struct PassageGrid {
    origin: Site,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    parents: Vec<Parent>,
    weights: Vec<f64>,
}

/// `G` over the rectangle `[1,1] .. [rows, cols]`.
pub fn build_grid<W: Weights>(field: &W, rows: usize, cols: usize) -> Result<PassageGrid> {
    build_grid_at(field, Site::ORIGIN, rows, cols)
}

/// Point-to-point passage times `G(origin, z)` for every `z` in the rectangle.
pub fn build_grid_at<W: Weights>(
    field: &W,
    origin: Site,
    rows: usize,
    cols: usize,
) -> Result<PassageGrid> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument(format!(
            "grid extent must be positive, got {rows}x{cols}"
        )));
    }
    let n = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Budget(format!("{rows}x{cols} grid")))?;
    let mut values = vec![0.0f64; n];
    let mut parents = vec![Parent::Origin; n];
    let mut weights = vec![0.0f64; n];

    for di in 0..rows {
        let row = di * cols;
        for dj in 0..cols {
            let z = origin.offset(di as i64, dj as i64);
            let w = field.weight(z);
            let k = row + dj;
            weights[k] = w;
            let (g, p) = match (di, dj) {
                (0, 0) => (w, Parent::Origin),
                (0, _) => (w + values[k - 1], Parent::Down),
                (_, 0) => (w + values[k - cols], Parent::Left),
                _ => {
                    let left = values[k - cols];
                    let down = values[k - 1];
                    if left > down {
                        (w + left, Parent::Left)
                    } else if down > left {
                        (w + down, Parent::Down)
                    } else {
                        return Err(Error::TieDetected(z));
                    }
                }
            };
            values[k] = g;
            parents[k] = p;
        }
    }
    Ok(PassageGrid {
        origin,
        rows,
        cols,
        values,
        parents,
        weights,
    })
}

impl PassageGrid {
    pub fn origin(&self) -> Site {
        self.origin
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// The far corner `origin + (rows-1, cols-1)`.
    pub fn corner(&self) -> Site {
        self.origin
            .offset(self.rows as i64 - 1, self.cols as i64 - 1)
    }

    pub fn contains(&self, z: Site) -> bool {
        self.index(z).is_some()
    }

    #[inline]
    fn index(&self, z: Site) -> Option<usize> {
        let di = z.i - self.origin.i;
        let dj = z.j - self.origin.j;
        if di < 0 || dj < 0 || di as usize >= self.rows || dj as usize >= self.cols {
            None
        } else {
            Some(di as usize * self.cols + dj as usize)
        }
    }

    /// `G(origin, z)`. Returns `Some(0)` on the virtual boundary row/column
    /// and `None` for any other site outside the rectangle.
    pub fn passage(&self, z: Site) -> Option<f64> {
        if let Some(k) = self.index(z) {
            return Some(self.values[k]);
        }
        let on_left = z.i == self.origin.i - 1 && z.j >= self.origin.j - 1;
        let on_bottom = z.j == self.origin.j - 1 && z.i >= self.origin.i - 1;
        let in_range = z.i <= self.corner().i && z.j <= self.corner().j;
        if (on_left || on_bottom) && in_range {
            Some(0.0)
        } else {
            None
        }
    }

    /// `G^{01}(z) = G(z) - w(origin)`: the passage time with the origin weight
    /// removed, which is the clock of the particle-hole picture.
    pub fn passage_01(&self, z: Site) -> Option<f64> {
        self.index(z).map(|k| self.values[k] - self.weights[0])
    }

    pub fn weight(&self, z: Site) -> Option<f64> {
        self.index(z).map(|k| self.weights[k])
    }

    pub fn origin_weight(&self) -> f64 {
        self.weights[0]
    }

    pub fn parent(&self, z: Site) -> Option<Parent> {
        self.index(z).map(|k| self.parents[k])
    }

    /// Raw row-major passage times.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates `(site, G, parent)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (Site, f64, Parent)> + '_ {
        (0..self.rows * self.cols).map(move |k| {
            let z = self
                .origin
                .offset((k / self.cols) as i64, (k % self.cols) as i64);
            (z, self.values[k], self.parents[k])
        })
    }

    /// Sites of the last row and last column (the far boundary).
    pub fn far_boundary(&self) -> impl Iterator<Item = Site> + '_ {
        let c = self.corner();
        let top = (self.origin.i..=c.i).map(move |i| Site::new(i, c.j));
        let right = (self.origin.j..c.j).map(move |j| Site::new(c.i, j));
        top.chain(right)
    }

    /// Smallest passage time on the far boundary. Every site outside the
    /// rectangle (in the quadrant of the origin) has a larger passage time.
    pub fn boundary_min(&self) -> f64 {
        self.far_boundary()
            .map(|z| self.passage(z).unwrap_or(f64::INFINITY))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `G(rows, cols)` from `(1,1)` with one row of memory.
pub fn corner_passage<W: Weights>(field: &W, rows: usize, cols: usize) -> Result<f64> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument(
            "grid extent must be positive".into(),
        ));
    }
    let mut row = vec![0.0f64; cols];
    for i in 1..=rows as i64 {
        let mut down = 0.0f64;
        for (dj, slot) in row.iter_mut().enumerate() {
            let j = dj as i64 + 1;
            let left = *slot;
            if i > 1 && j > 1 && left == down {
                return Err(Error::TieDetected(Site::new(i, j)));
            }
            let g = field.weight(Site::new(i, j)) + left.max(down);
            *slot = g;
            down = g;
        }
    }
    Ok(row[cols - 1])
}

/// Upper bound on the number of cells enumerated by [`brute_force_passage`].
pub const BRUTE_FORCE_MAX_AREA: usize = 49;

/// `G(z, z2)` by enumerating every up/right path. Only for small rectangles.
pub fn brute_force_passage<W: Weights>(field: &W, z: Site, z2: Site) -> Result<f64> {
    if !z.precedes(z2) {
        return Err(Error::InvalidArgument(format!("{z} does not precede {z2}")));
    }
    let rows = (z2.i - z.i + 1) as usize;
    let cols = (z2.j - z.j + 1) as usize;
    let area = rows * cols;
    if area > BRUTE_FORCE_MAX_AREA {
        return Err(Error::RectangleTooLarge {
            area,
            limit: BRUTE_FORCE_MAX_AREA,
        });
    }
    fn walk<W: Weights>(field: &W, at: Site, end: Site, acc: f64, best: &mut f64) {
        let acc = acc + field.weight(at);
        if at == end {
            if acc > *best {
                *best = acc;
            }
            return;
        }
        if at.i < end.i {
            walk(field, at.step(Step::Right), end, acc, best);
        }
        if at.j < end.j {
            walk(field, at.step(Step::Up), end, acc, best);
        }
    }
    let mut best = f64::NEG_INFINITY;
    walk(field, z, z2, 0.0, &mut best);
    Ok(best)
}

/// A sequence of lattice sites. Used for up/right paths (the competition
/// interface, geodesics) and for the staircase of the growth interface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfacePath {
    pub sites: Vec<Site>,
}

impl InterfacePath {
    pub fn new(sites: Vec<Site>) -> Self {
        InterfacePath { sites }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn start(&self) -> Option<Site> {
        self.sites.first().copied()
    }

    pub fn is_up_right(&self) -> bool {
        is_up_right_path(&self.sites)
    }

    /// Steps between consecutive sites; `None` if the path is not up/right.
    pub fn steps(&self) -> Option<Vec<Step>> {
        self.sites
            .windows(2)
            .map(|w| Step::between(w[0], w[1]))
            .collect()
    }
}

/// The growth interface `{z : G(z) <= t < G(z + (1,1))}`, ordered by increasing
/// first coordinate and, within a column, by decreasing second coordinate.
pub fn growth_interface(grid: &PassageGrid, t: f64) -> Result<InterfacePath> {
    if !(t >= 0.0) {
        return Err(Error::Domain {
            name: "t",
            value: t,
        });
    }
    if grid.boundary_min() <= t {
        return Err(Error::Truncated("growth interface"));
    }
    let o = grid.origin();
    let c = grid.corner();
    let mut sites = Vec::new();
    for i in o.i..c.i {
        for j in (o.j..c.j).rev() {
            let z = Site::new(i, j);
            let g = grid.passage(z).expect("in grid");
            let g_ne = grid.passage(z.offset(1, 1)).expect("in grid");
            if g <= t && g_ne > t {
                sites.push(z);
            }
        }
    }
    Ok(InterfacePath { sites })
}

/// The shape function `mu(u, v) = (sqrt(u) + sqrt(v))^2`.
pub fn shape_mu(u: f64, v: f64) -> Result<f64> {
    if !(u >= 0.0) || !u.is_finite() {
        return Err(Error::Domain {
            name: "u",
            value: u,
        });
    }
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::Domain {
            name: "v",
            value: v,
        });
    }
    let s = u.sqrt() + v.sqrt();
    Ok(s * s)
}
