use serde::{Deserialize, Serialize};

use super::state::ExclusionState;
use crate::error::{Error, Result};
use crate::lattice::Site;

/// The down/right lattice curve `gamma_n` encoding a configuration: a hole at
/// `n` is a step right, a particle a step down. Anchored at `gamma_0 = (1,1)`,
/// `gamma_1 = (1,0)` and `gamma_{-1} = (0,1)` whatever the occupations at 0 and 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Staircase {
    pub first: i64,
    pub sites: Vec<Site>,
}

impl Staircase {
    pub fn get(&self, n: i64) -> Option<Site> {
        usize::try_from(n - self.first)
            .ok()
            .and_then(|k| self.sites.get(k).copied())
    }

    pub fn last(&self) -> i64 {
        self.first + self.sites.len() as i64 - 1
    }
}

fn increment(occupied: bool) -> (i64, i64) {
    if occupied {
        (0, -1)
    } else {
        (1, 0)
    }
}

/// Staircase of an occupation vector on `[left, left + occ.len() - 1]`.
pub fn staircase(left: i64, occ: &[bool]) -> Result<Staircase> {
    let right = left + occ.len() as i64 - 1;
    if left > -1 || right < 1 {
        return Err(Error::WindowTooSmall {
            left,
            right,
            reason: "staircase needs sites -1, 0 and 1",
        });
    }
    let at = |n: i64| occ[(n - left) as usize];
    let mut sites = vec![Site::ORIGIN; occ.len()];
    let idx = |n: i64| (n - left) as usize;
    sites[idx(-1)] = Site::new(0, 1);
    sites[idx(1)] = Site::new(1, 0);
    for n in 2..=right {
        let (di, dj) = increment(at(n));
        sites[idx(n)] = sites[idx(n - 1)].offset(di, dj);
    }
    for n in (left..=-2).rev() {
        let (di, dj) = increment(at(n + 1));
        sites[idx(n)] = sites[idx(n + 1)].offset(-di, -dj);
    }
    Ok(Staircase { first: left, sites })
}

pub fn staircase_boundary(config: &ExclusionState) -> Result<Staircase> {
    staircase(config.window().0, config.occupation())
}
