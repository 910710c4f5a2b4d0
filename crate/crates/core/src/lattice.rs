use std::fmt;

use serde::{Deserialize, Serialize};

/// A site of the square lattice `Z^2`. The first coordinate `i` grows to the
/// right, the second coordinate `j` grows upward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub i: i64,
    pub j: i64,
}

impl Site {
    pub const ORIGIN: Site = Site { i: 1, j: 1 };

    pub const fn new(i: i64, j: i64) -> Self {
        Site { i, j }
    }

    pub fn step(self, step: Step) -> Self {
        match step {
            Step::Right => Site::new(self.i + 1, self.j),
            Step::Up => Site::new(self.i, self.j + 1),
        }
    }

    pub fn offset(self, di: i64, dj: i64) -> Self {
        Site::new(self.i + di, self.j + dj)
    }

    /// Coordinate-wise `self <= other`.
    pub fn precedes(self, other: Site) -> bool {
        self.i <= other.i && self.j <= other.j
    }

    pub fn norm(self) -> f64 {
        ((self.i * self.i + self.j * self.j) as f64).sqrt()
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

impl From<(i64, i64)> for Site {
    fn from((i, j): (i64, i64)) -> Self {
        Site::new(i, j)
    }
}

/// A unit step of an up/right path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step {
    /// `(1, 0)`
    Right,
    /// `(0, 1)`
    Up,
}

impl Step {
    /// The step taking `from` to `to`, if they differ by a unit up/right step.
    pub fn between(from: Site, to: Site) -> Option<Step> {
        match (to.i - from.i, to.j - from.j) {
            (1, 0) => Some(Step::Right),
            (0, 1) => Some(Step::Up),
            _ => None,
        }
    }
}

/// True if consecutive sites differ by exactly one up/right unit step.
pub fn is_up_right_path(sites: &[Site]) -> bool {
    sites
        .windows(2)
        .all(|w| Step::between(w[0], w[1]).is_some())
}
