//! Geodesics: the a.s. unique maximizing up/right paths realising `G(z, z')`.
//!
//! Semi-infinite geodesics have no finite representation. Directional
//! questions are answered with point-to-point geodesics towards the lattice
//! square containing `r e^{i alpha}` for a ladder of radii `r`.

use std::collections::HashSet;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Site, Step};
use crate::lpp::{shape_mu, Parent, PassageGrid};
use crate::weights::Weights;

impl Weights for PassageGrid {
    /// Weights are only stored inside the rectangle.
    fn weight(&self, site: Site) -> f64 {
        PassageGrid::weight(self, site).unwrap_or_else(|| panic!("site {site} outside grid"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub sites: Vec<Site>,
    /// Sum of the weights along `sites`.
    pub weight_sum: f64,
    /// `G(start, end)` as computed by the recurrence.
    pub passage: f64,
}

impl GeodesicPath {
    pub fn start(&self) -> Site {
        self.sites[0]
    }

    pub fn end(&self) -> Site {
        *self.sites.last().expect("non-empty path")
    }
}

fn check_pair(grid: &PassageGrid, z: Site, z2: Site) -> Result<()> {
    if !grid.contains(z) {
        return Err(Error::OutOfGrid(z));
    }
    if !grid.contains(z2) {
        return Err(Error::OutOfGrid(z2));
    }
    if !z.precedes(z2) {
        return Err(Error::InvalidArgument(format!("{z} does not precede {z2}")));
    }
    Ok(())
}

/// Recurrence rooted at `from` over `[from, to]`, keeping only the argmax tags.
/// Returns `(G(from, to), parents)` with parents stored row-major.
fn local_parents<W: Weights>(w: &W, from: Site, to: Site) -> Result<(f64, Vec<Parent>)> {
    let rows = (to.i - from.i + 1) as usize;
    let cols = (to.j - from.j + 1) as usize;
    let mut parents = vec![Parent::Origin; rows * cols];
    let mut row = vec![0.0f64; cols];
    for di in 0..rows {
        let mut down = 0.0f64;
        for dj in 0..cols {
            let z = from.offset(di as i64, dj as i64);
            let left = row[dj];
            let (best, p) = match (di, dj) {
                (0, 0) => (0.0, Parent::Origin),
                (0, _) => (down, Parent::Down),
                (_, 0) => (left, Parent::Left),
                _ if left > down => (left, Parent::Left),
                _ if down > left => (down, Parent::Down),
                _ => return Err(Error::TieDetected(z)),
            };
            let g = w.weight(z) + best;
            row[dj] = g;
            down = g;
            parents[di * cols + dj] = p;
        }
    }
    Ok((row[cols - 1], parents))
}

/// `G(from, target)` for several targets sharing the root `from`, with one row
/// of memory. Targets must lie in the quadrant of `from`.
pub fn passages_from<W: Weights>(w: &W, from: Site, targets: &[Site]) -> Result<Vec<f64>> {
    if targets.is_empty() {
        return Ok(Vec::new());
    }
    for &t in targets {
        if !from.precedes(t) {
            return Err(Error::InvalidArgument(format!(
                "{from} does not precede {t}"
            )));
        }
    }
    let max_i = targets.iter().map(|t| t.i).max().unwrap();
    let max_j = targets.iter().map(|t| t.j).max().unwrap();
    let cols = (max_j - from.j + 1) as usize;
    let mut out = vec![f64::NAN; targets.len()];
    let mut row = vec![0.0f64; cols];
    for i in from.i..=max_i {
        let mut down = 0.0f64;
        for (dj, cell) in row.iter_mut().enumerate() {
            let z = Site::new(i, from.j + dj as i64);
            let left = *cell;
            if i > from.i && dj > 0 && left == down {
                return Err(Error::TieDetected(z));
            }
            let g = w.weight(z) + left.max(down);
            *cell = g;
            down = g;
        }
        for (slot, t) in out.iter_mut().zip(targets) {
            if t.i == i {
                *slot = row[(t.j - from.j) as usize];
            }
        }
    }
    Ok(out)
}

/// The geodesic `pi(z, z2)` inside the grid.
///
/// When `z` is the grid origin the stored argmax tags are backtracked
/// directly; otherwise the recurrence is rerun from `z` over `[z, z2]`.
pub fn geodesic(grid: &PassageGrid, z: Site, z2: Site) -> Result<GeodesicPath> {
    check_pair(grid, z, z2)?;
    let mut sites = Vec::with_capacity((z2.i - z.i + z2.j - z.j + 1) as usize);
    let passage;
    if z == grid.origin() {
        passage = grid.passage(z2).expect("in grid");
        let mut at = z2;
        sites.push(at);
        while let Some(prev) = grid.parent(at).and_then(|p| p.predecessor(at)) {
            at = prev;
            sites.push(at);
        }
    } else {
        let (g, parents) = local_parents(grid, z, z2)?;
        passage = g;
        let cols = (z2.j - z.j + 1) as usize;
        let mut at = z2;
        sites.push(at);
        loop {
            let k = (at.i - z.i) as usize * cols + (at.j - z.j) as usize;
            match parents[k].predecessor(at) {
                Some(prev) => {
                    at = prev;
                    sites.push(at);
                }
                None => break,
            }
        }
    }
    sites.reverse();
    debug_assert_eq!(sites[0], z);
    let weight_sum = sites.iter().map(|&s| grid.weight(s).unwrap()).sum();
    Ok(GeodesicPath {
        sites,
        weight_sum,
        passage,
    })
}

/// The tree of geodesics from the grid origin, as parent pointers.
#[derive(Debug, Clone, Copy)]
pub struct GeodesicTree<'a> {
    grid: &'a PassageGrid,
}

impl<'a> GeodesicTree<'a> {
    pub fn new(grid: &'a PassageGrid) -> Self {
        GeodesicTree { grid }
    }

    pub fn root(&self) -> Site {
        self.grid.origin()
    }

    pub fn parent(&self, z: Site) -> Option<Site> {
        self.grid.parent(z).and_then(|p| p.predecessor(z))
    }

    pub fn children(&self, z: Site) -> impl Iterator<Item = Site> + '_ {
        [Step::Right, Step::Up]
            .into_iter()
            .map(move |s| z.step(s))
            .filter(move |&c| self.parent(c) == Some(z))
    }

    /// Root-to-`z` branch obtained by chasing parent pointers.
    pub fn branch(&self, z: Site) -> Result<Vec<Site>> {
        if !self.grid.contains(z) {
            return Err(Error::OutOfGrid(z));
        }
        let mut out = vec![z];
        let mut at = z;
        let limit = self.grid.rows() + self.grid.cols();
        while let Some(p) = self.parent(at) {
            at = p;
            out.push(at);
            if out.len() > limit {
                return Err(Error::Invariant(format!("cycle through {z}")));
            }
        }
        if at != self.root() {
            return Err(Error::Invariant(format!("{z} does not reach the root")));
        }
        out.reverse();
        Ok(out)
    }

    /// Sites whose branch from the root passes through `zbar` (including it).
    pub fn subtree(&self, zbar: Site) -> Result<Vec<Site>> {
        if !self.grid.contains(zbar) {
            return Err(Error::OutOfGrid(zbar));
        }
        let mut out = Vec::new();
        let mut stack = vec![zbar];
        while let Some(z) = stack.pop() {
            out.push(z);
            stack.extend(self.children(z));
        }
        out.sort();
        Ok(out)
    }

    /// Tree edges `(parent, child)`.
    pub fn edges(&self) -> impl Iterator<Item = (Site, Site)> + '_ {
        self.grid
            .cells()
            .filter_map(move |(z, _, _)| self.parent(z).map(|p| (p, z)))
    }
}

/// The lattice site `z_u` whose unit square `(i-1, i] x (j-1, j]` contains `u`.
pub fn real_point_target(u: (f64, f64)) -> Result<Site> {
    for (name, v) in [("u1", u.0), ("u2", u.1)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain { name, value: v });
        }
    }
    Ok(Site::new(u.0.ceil() as i64, u.1.ceil() as i64))
}

/// The target site for direction `alpha` at radius `r`: the square containing
/// `r e^{i alpha}`, with coordinates clamped to the first row/column on the axes.
pub fn direction_target(alpha: f64, r: f64) -> Result<Site> {
    if !(0.0..=FRAC_PI_2).contains(&alpha) {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha,
        });
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain {
            name: "r",
            value: r,
        });
    }
    let x = r * (FRAC_PI_2 - alpha).sin();
    let y = r * alpha.sin();
    Ok(Site::new(
        (x.ceil() as i64).max(1),
        (y.ceil() as i64).max(1),
    ))
}

/// Finite-radius proxy for the `alpha`-geodesic from `z`: `pi(z, r e^{i alpha})`.
pub fn directional_geodesic(
    grid: &PassageGrid,
    z: Site,
    alpha: f64,
    r: f64,
) -> Result<GeodesicPath> {
    let target = direction_target(alpha, r)?;
    if !grid.contains(target) {
        return Err(Error::Truncated("directional geodesic target"));
    }
    geodesic(grid, z, target)
}

/// The first site (in path order from `z`) shared by `pi(z, target)` and
/// `pi(z2, target)`, or `None` when the paths are disjoint. When a shared site
/// exists, both suffixes from it are checked to coincide.
pub fn coalescence_point(
    grid: &PassageGrid,
    z: Site,
    z2: Site,
    target: Site,
) -> Result<Option<Site>> {
    let a = geodesic(grid, z, target)?;
    let b = geodesic(grid, z2, target)?;
    coalescence_of(&a, &b)
}

/// Coalescence of two already computed geodesics to a common endpoint.
pub fn coalescence_of(a: &GeodesicPath, b: &GeodesicPath) -> Result<Option<Site>> {
    let on_b: HashSet<Site> = b.sites.iter().copied().collect();
    let Some(pos_a) = a.sites.iter().position(|s| on_b.contains(s)) else {
        return Ok(None);
    };
    let c = a.sites[pos_a];
    let pos_b = b.sites.iter().position(|&s| s == c).expect("shared site");
    if a.sites[pos_a..] != b.sites[pos_b..] {
        return Err(Error::Invariant(format!(
            "geodesics share {c} but their suffixes differ"
        )));
    }
    Ok(Some(c))
}

fn distance_to_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let s = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.0 + s * dx, a.1 + s * dy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

/// Largest Euclidean distance from a path site to the segment joining the
/// path start to `z`.
pub fn transversal_deviation(path: &GeodesicPath, z: Site) -> f64 {
    let a = path.start();
    let a = (a.i as f64, a.j as f64);
    let b = (z.i as f64, z.j as f64);
    path.sites
        .iter()
        .map(|s| distance_to_segment((s.i as f64, s.j as f64), a, b))
        .fold(0.0, f64::max)
}

/// Signed `G(z) - mu(z)` for `z` inside a grid rooted at the corner.
pub fn shape_fluctuation(grid: &PassageGrid, z: Site) -> Result<f64> {
    if !grid.contains(z) {
        return Err(Error::OutOfGrid(z));
    }
    let g = grid.passage(z).expect("in grid");
    Ok(g - shape_mu(z.i as f64, z.j as f64)?)
}

/// `Delta(z, z') = mu(z) - mu(z - z') - mu(z')`, in its closed form
/// `2 (sqrt(z1 z2) - sqrt(z1' z2') - sqrt((z1 - z1')(z2 - z2')))`.
pub fn curvature_gap(z: (f64, f64), zp: (f64, f64)) -> Result<f64> {
    for (name, v, hi) in [("z'1", zp.0, z.0), ("z'2", zp.1, z.1)] {
        if !(v >= 0.0 && v <= hi) || !hi.is_finite() {
            return Err(Error::Domain { name, value: v });
        }
    }
    Ok(2.0 * ((z.0 * z.1).sqrt() - (zp.0 * zp.1).sqrt() - ((z.0 - zp.0) * (z.1 - zp.1)).sqrt()))
}
