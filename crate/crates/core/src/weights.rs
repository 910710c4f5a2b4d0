//! Site weights for last-passage percolation.
//!
//! [`WeightField`] is the random environment: an i.i.d. Exp(1) weight for every
//! site of `Z^2`, computed on demand from `(seed, site)`. [`WeightTable`] is an
//! explicit finite rectangle of weights, used for hand-built instances and for
//! weights reconstructed from particle systems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::rng::{self, Domain};

/// Anything that assigns a weight to lattice sites.
pub trait Weights {
    fn weight(&self, site: Site) -> f64;
}

impl<W: Weights + ?Sized> Weights for &W {
    fn weight(&self, site: Site) -> f64 {
        (**self).weight(site)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CachePolicy {
    #[default]
    None,
    /// Precompute `[1, rows] x [1, cols]`; sites outside are hashed on demand.
    FullRectangle { rows: usize, cols: usize },
}

/// The seed-addressed Exp(1) field.
#[derive(Debug, Clone)]
pub struct WeightField {
    seed: u64,
    policy: CachePolicy,
    cache: Option<Box<[f64]>>,
}

impl WeightField {
    pub fn new(seed: u64) -> Self {
        WeightField {
            seed,
            policy: CachePolicy::None,
            cache: None,
        }
    }

    pub fn with_cache(seed: u64, policy: CachePolicy) -> Self {
        let cache = match policy {
            CachePolicy::None => None,
            CachePolicy::FullRectangle { rows, cols } => {
                let mut values = Vec::with_capacity(rows * cols);
                for i in 1..=rows as i64 {
                    for j in 1..=cols as i64 {
                        values.push(hashed_weight(seed, Site::new(i, j)));
                    }
                }
                Some(values.into_boxed_slice())
            }
        };
        WeightField {
            seed,
            policy,
            cache,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn policy(&self) -> CachePolicy {
        self.policy
    }
}

#[inline]
fn hashed_weight(seed: u64, z: Site) -> f64 {
    rng::exp1(seed, Domain::Weight, z.i, z.j)
}

/// `w(seed, z)`: a pure function of the seed and the site.
#[inline]
pub fn weight_at(field: &WeightField, z: Site) -> f64 {
    if let (Some(cache), CachePolicy::FullRectangle { rows, cols }) = (&field.cache, field.policy) {
        if z.i >= 1 && z.j >= 1 && (z.i as usize) <= rows && (z.j as usize) <= cols {
            return cache[(z.i as usize - 1) * cols + (z.j as usize - 1)];
        }
    }
    hashed_weight(field.seed, z)
}

impl Weights for WeightField {
    #[inline]
    fn weight(&self, site: Site) -> f64 {
        weight_at(self, site)
    }
}

/// An explicit rectangle of weights `[origin, origin + (rows-1, cols-1)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    origin: Site,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl WeightTable {
    /// Rows index the first coordinate, columns the second, row-major.
    pub fn new(origin: Site, rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("empty weight table".into()));
        }
        if values.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "expected {} weights, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(&bad) = values.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Domain {
                name: "weight",
                value: bad,
            });
        }
        Ok(WeightTable {
            origin,
            rows,
            cols,
            values,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(Site) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 1..=rows as i64 {
            for j in 1..=cols as i64 {
                values.push(f(Site::new(i, j)));
            }
        }
        Self::new(Site::ORIGIN, rows, cols, values)
    }

    pub fn from_weights<W: Weights>(w: &W, rows: usize, cols: usize) -> Result<Self> {
        Self::from_fn(rows, cols, |z| w.weight(z))
    }

    pub fn origin(&self) -> Site {
        self.origin
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn index(&self, z: Site) -> Option<usize> {
        let di = z.i - self.origin.i;
        let dj = z.j - self.origin.j;
        if di < 0 || dj < 0 || di as usize >= self.rows || dj as usize >= self.cols {
            return None;
        }
        Some(di as usize * self.cols + dj as usize)
    }

    pub fn get(&self, z: Site) -> Option<f64> {
        self.index(z).map(|k| self.values[k])
    }

    pub fn set(&mut self, z: Site, w: f64) -> Result<()> {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Domain {
                name: "weight",
                value: w,
            });
        }
        let k = self.index(z).ok_or(Error::OutOfGrid(z))?;
        self.values[k] = w;
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl Weights for WeightTable {
    /// Sites outside the table have no weight; asking for one is a logic error.
    fn weight(&self, site: Site) -> f64 {
        match self.get(site) {
            Some(w) => w,
            None => panic!("site {site} outside weight table"),
        }
    }
}

/// Wraps a weight source and replaces the weight of a single site.
#[derive(Debug, Clone)]
pub struct Override<W> {
    pub inner: W,
    pub site: Site,
    pub value: f64,
}

impl<W: Weights> Weights for Override<W> {
    #[inline]
    fn weight(&self, site: Site) -> f64 {
        if site == self.site {
            self.value
        } else {
            self.inner.weight(site)
        }
    }
}
