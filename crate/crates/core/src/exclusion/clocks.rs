use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// One Poisson epoch of the clock attached to `site`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epoch {
    pub t: f64,
    pub site: i64,
}

/// Rate-1 Poisson clocks on `[left, right]` over `[0, horizon]`, plus one
/// auxiliary clock that belongs to no site.
///
/// Epoch times are a pure function of `(seed, site, index)`, so a window can be
/// regenerated or widened without changing the epochs of the shared sites.
#[derive(Debug, Clone)]
pub struct ClockSet {
    seed: u64,
    left: i64,
    right: i64,
    horizon: f64,
    epochs: Vec<Epoch>,
    aux: Vec<f64>,
}

fn stream(seed: u64, domain: Domain, key: i64, horizon: f64, mut push: impl FnMut(f64)) {
    let mut t = 0.0;
    let mut k = 0i64;
    loop {
        t += rng::exp1(seed, domain, key, k);
        if t > horizon {
            break;
        }
        push(t);
        k += 1;
    }
}

impl ClockSet {
    pub fn new(seed: u64, left: i64, right: i64, horizon: f64) -> Result<Self> {
        if left > right {
            return Err(Error::InvalidArgument(format!(
                "empty window [{left}, {right}]"
            )));
        }
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::Domain {
                name: "horizon",
                value: horizon,
            });
        }
        let sites = (right - left + 1) as usize;
        let expected = sites as f64 * horizon;
        // bucket by time, then sort the (small) buckets
        let n_buckets = ((expected / 512.0).ceil() as usize).max(1);
        let width = if horizon > 0.0 {
            horizon / n_buckets as f64
        } else {
            1.0
        };
        let mut buckets: Vec<Vec<Epoch>> = vec![Vec::new(); n_buckets];
        for site in left..=right {
            stream(seed, Domain::Clock, site, horizon, |t| {
                let b = ((t / width) as usize).min(n_buckets - 1);
                buckets[b].push(Epoch { t, site });
            });
        }
        let mut epochs = Vec::with_capacity(buckets.iter().map(Vec::len).sum());
        for mut b in buckets {
            b.sort_unstable_by(|x, y| x.t.total_cmp(&y.t));
            epochs.extend(b);
        }
        if let Some(w) = epochs.windows(2).find(|w| w[0].t == w[1].t) {
            return Err(Error::ClockCollision(w[0].t));
        }
        let mut aux = Vec::new();
        stream(seed, Domain::AuxClock, 0, horizon, |t| aux.push(t));
        Ok(ClockSet {
            seed,
            left,
            right,
            horizon,
            epochs,
            aux,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn window(&self) -> (i64, i64) {
        (self.left, self.right)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// All site epochs in increasing time order.
    pub fn epochs(&self) -> &[Epoch] {
        &self.epochs
    }

    /// Epochs of the auxiliary clock.
    pub fn aux(&self) -> &[f64] {
        &self.aux
    }

    /// The epochs of one site, regenerated from the seed.
    pub fn site_epochs(&self, site: i64) -> Vec<f64> {
        let mut out = Vec::new();
        stream(self.seed, Domain::Clock, site, self.horizon, |t| {
            out.push(t)
        });
        out
    }
}
