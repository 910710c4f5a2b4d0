use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Initial configurations on a finite window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialKind {
    /// Particles on `x <= 0`, holes on `x >= 1`. Particles and holes are labelled.
    Step,
    /// Particles on `x <= -1` and at `x = 1`, holes at `0` and on `x >= 2`, with
    /// the hole at 0 and the particle at 1 tracked as a pair.
    PairStep,
    /// Independent Bernoulli(`lambda`) on `x <= 0` and Bernoulli(`rho`) on `x >= 1`.
    Product { lambda: f64, rho: f64, seed: u64 },
}

/// What the state follows besides the occupation variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Tracker {
    None,
    /// A second-class particle at `x`: it jumps right onto holes and is
    /// overtaken (pushed left) by first-class particles jumping onto it.
    SecondClass {
        x: i64,
    },
    /// The tagged hole at `hole`, carrying label `i`, and the tagged particle at
    /// `hole + 1`, carrying label `j`.
    Pair {
        hole: i64,
        i: i64,
        j: i64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    /// A particle moved from `x` to `x + 1`.
    Jump,
    /// The first-class particle at `x` exchanged places with the second-class
    /// particle at `x + 1`. The occupation variables are unchanged.
    Swap,
}

/// A state change caused by one clock epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub x: i64,
    /// Label of the hole involved, if labelled.
    pub hole_label: Option<i64>,
    /// Label of the particle involved, if labelled.
    pub particle_label: Option<i64>,
    /// Position of the tracked object after the event.
    pub tracked: Option<i64>,
    /// Whether the tracked object moved.
    pub tracked_moved: bool,
}

const NO_LABEL: i64 = i64::MIN;

/// Label bookkeeping: the particle/hole label currently at each site, and
/// the site of each label.
#[derive(Debug, Clone, PartialEq)]
struct Labels {
    at_site: Vec<i64>,
    particles: Vec<i64>,
    holes: Vec<i64>,
}

impl Labels {
    /// Particle labels `1, 2, ...` at `1, -1, -2, ...`; hole labels `1, 2, ...`
    /// at `0, 2, 3, ...`. For the plain step, pass `pair = false`:
    /// particles at `0, -1, ...` and holes at `1, 2, ...`.
    fn new(left: i64, right: i64, pair: bool) -> Self {
        let width = (right - left + 1) as usize;
        let mut at_site = vec![NO_LABEL; width];
        let mut particles = Vec::new();
        let mut holes = Vec::new();
        let (p1, h1) = if pair { (1, 0) } else { (0, 1) };
        let mut j = 1;
        let mut x = p1;
        while x >= left {
            particles.push(x);
            at_site[(x - left) as usize] = j;
            j += 1;
            x = if pair { -(j - 1) } else { x - 1 };
        }
        let mut i = 1;
        let mut x = h1;
        while x <= right {
            holes.push(x);
            at_site[(x - left) as usize] = i;
            i += 1;
            x = if pair { i } else { x + 1 };
        }
        Labels {
            at_site,
            particles,
            holes,
        }
    }
}

/// An exclusion configuration on `[left, right]` with optional labels and a
/// tracked second-class particle or hole/particle pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionState {
    left: i64,
    right: i64,
    occ: Vec<bool>,
    labels: Option<Labels>,
    tracker: Tracker,
    time: f64,
}

/// Smallest window accepted by [`initial_config`].
pub const MIN_HALF_WIDTH: i64 = 3;

/// Builds an initial configuration on `[left, right]`.
pub fn initial_config(kind: InitialKind, left: i64, right: i64) -> Result<ExclusionState> {
    if left > -MIN_HALF_WIDTH || right < MIN_HALF_WIDTH {
        return Err(Error::WindowTooSmall {
            left,
            right,
            reason: "window must contain [-3, 3]",
        });
    }
    let width = (right - left + 1) as usize;
    let mut occ = vec![false; width];
    let mut labels = None;
    let mut tracker = Tracker::None;
    match kind {
        InitialKind::Step => {
            for x in left..=0 {
                occ[(x - left) as usize] = true;
            }
            labels = Some(Labels::new(left, right, false));
        }
        InitialKind::PairStep => {
            for x in (left..=-1).chain([1]) {
                occ[(x - left) as usize] = true;
            }
            labels = Some(Labels::new(left, right, true));
            tracker = Tracker::Pair {
                hole: 0,
                i: 1,
                j: 1,
            };
        }
        InitialKind::Product { lambda, rho, seed } => {
            for (name, p) in [("lambda", lambda), ("rho", rho)] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Domain { name, value: p });
                }
            }
            for x in left..=right {
                let p = if x <= 0 { lambda } else { rho };
                // u < 1 always, so p = 1 fills and p = 0 empties deterministically
                occ[(x - left) as usize] = rng::uniform_open(seed, Domain::Occupation, x, 0) < p;
            }
        }
    }
    Ok(ExclusionState {
        left,
        right,
        occ,
        labels,
        tracker,
        time: 0.0,
    })
}

impl ExclusionState {
    /// Builds an unlabelled state from an explicit occupation vector on
    /// `[left, left + occ.len() - 1]`.
    pub fn from_occupation(left: i64, occ: Vec<bool>) -> Result<Self> {
        if occ.is_empty() {
            return Err(Error::InvalidArgument("empty occupation vector".into()));
        }
        let right = left + occ.len() as i64 - 1;
        Ok(ExclusionState {
            left,
            right,
            occ,
            labels: None,
            tracker: Tracker::None,
            time: 0.0,
        })
    }

    /// Marks the particle at `x` as the second-class particle.
    pub fn with_second_class(mut self, x: i64) -> Result<Self> {
        if !matches!(self.tracker, Tracker::None) {
            return Err(Error::InvalidArgument(
                "state already tracks an object".into(),
            ));
        }
        if self.occupied(x) != Some(true) || x <= self.left || x >= self.right {
            return Err(Error::InvalidArgument(format!(
                "no particle at interior site {x}"
            )));
        }
        self.tracker = Tracker::SecondClass { x };
        Ok(self)
    }

    pub fn window(&self) -> (i64, i64) {
        (self.left, self.right)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn tracker(&self) -> Tracker {
        self.tracker
    }

    /// Occupation at `x`, `None` outside the window.
    pub fn occupied(&self, x: i64) -> Option<bool> {
        (self.left..=self.right)
            .contains(&x)
            .then(|| self.occ[(x - self.left) as usize])
    }

    pub fn occupation(&self) -> &[bool] {
        &self.occ
    }

    pub fn particle_count(&self) -> usize {
        self.occ.iter().filter(|&&b| b).count()
    }

    pub fn is_labelled(&self) -> bool {
        self.labels.is_some()
    }

    /// Position of particle `j` (labels start at 1).
    pub fn particle_position(&self, j: i64) -> Option<i64> {
        let l = self.labels.as_ref()?;
        usize::try_from(j - 1)
            .ok()
            .and_then(|k| l.particles.get(k).copied())
    }

    /// Position of hole `i` (labels start at 1).
    pub fn hole_position(&self, i: i64) -> Option<i64> {
        let l = self.labels.as_ref()?;
        usize::try_from(i - 1)
            .ok()
            .and_then(|k| l.holes.get(k).copied())
    }

    /// Label carried by whatever sits at `x`.
    pub fn label_at(&self, x: i64) -> Option<i64> {
        let l = self.labels.as_ref()?;
        let k = usize::try_from(x - self.left).ok()?;
        l.at_site.get(k).copied().filter(|&v| v != NO_LABEL)
    }

    pub fn second_class(&self) -> Option<i64> {
        match self.tracker {
            Tracker::SecondClass { x } => Some(x),
            _ => None,
        }
    }

    /// `(hole position, hole label, particle label)` of the tracked pair.
    pub fn pair(&self) -> Option<(i64, i64, i64)> {
        match self.tracker {
            Tracker::Pair { hole, i, j } => Some((hole, i, j)),
            _ => None,
        }
    }

    /// Position of the tracked object.
    pub fn tracked_position(&self) -> Option<i64> {
        match self.tracker {
            Tracker::None => None,
            Tracker::SecondClass { x } => Some(x),
            Tracker::Pair { hole, .. } => Some(hole),
        }
    }

    /// Moves the clock forward without any epoch.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        if !(t >= self.time) {
            return Err(Error::InvalidArgument(format!(
                "cannot go back from {} to {t}",
                self.time
            )));
        }
        self.time = t;
        Ok(())
    }

    fn breach(&self, t: f64, site: i64) -> Error {
        Error::WindowBreach { t, site }
    }

    /// Applies a clock epoch at site `x` and time `t`. Returns the resulting
    /// state change, if any.
    ///
    /// Fails with `WindowBreach` when the change would involve an edge site,
    /// since the state beyond the window is unknown.
    pub fn apply_epoch(&mut self, t: f64, x: i64) -> Result<Option<Event>> {
        if !(t >= self.time) {
            return Err(Error::InvalidArgument(format!(
                "epoch at {t} precedes current time {}",
                self.time
            )));
        }
        if x < self.left || x > self.right {
            return Ok(None);
        }
        self.time = t;
        let k = (x - self.left) as usize;
        if x == self.right {
            if self.occ[k] {
                return Err(self.breach(t, x));
            }
            return Ok(None);
        }
        if let Tracker::SecondClass { x: sc } = self.tracker {
            if x == sc - 1 && self.occ[k] {
                if x == self.left {
                    return Err(self.breach(t, x));
                }
                self.tracker = Tracker::SecondClass { x };
                return Ok(Some(Event {
                    t,
                    kind: EventKind::Swap,
                    x,
                    hole_label: None,
                    particle_label: self.label_at(x),
                    tracked: Some(x),
                    tracked_moved: true,
                }));
            }
        }
        if !self.occ[k] || self.occ[k + 1] {
            return Ok(None);
        }
        if x == self.left || x + 1 == self.right {
            return Err(self.breach(t, x));
        }
        self.occ[k] = false;
        self.occ[k + 1] = true;
        let (mut hole_label, mut particle_label) = (None, None);
        if let Some(l) = self.labels.as_mut() {
            let p = l.at_site[k];
            let h = l.at_site[k + 1];
            l.at_site.swap(k, k + 1);
            if p != NO_LABEL {
                l.particles[(p - 1) as usize] = x + 1;
                particle_label = Some(p);
            }
            if h != NO_LABEL {
                l.holes[(h - 1) as usize] = x;
                hole_label = Some(h);
            }
        }
        let mut tracked_moved = false;
        match self.tracker {
            Tracker::SecondClass { x: sc } if sc == x => {
                self.tracker = Tracker::SecondClass { x: x + 1 };
                tracked_moved = true;
            }
            Tracker::Pair { hole, i, j } if x == hole + 1 => {
                // the tagged particle jumps over the next hole
                let i2 = hole_label.ok_or_else(|| {
                    Error::Invariant(format!("unlabelled hole passed by the pair at {t}"))
                })?;
                if i2 != i + 1 {
                    return Err(Error::Invariant(format!(
                        "pair hole {i} followed by hole {i2}"
                    )));
                }
                self.tracker = Tracker::Pair { hole: x, i: i2, j };
                tracked_moved = true;
            }
            Tracker::Pair { hole, i, j } if x + 1 == hole => {
                // the next particle jumps into the tagged hole
                let j2 = particle_label.ok_or_else(|| {
                    Error::Invariant(format!("unlabelled particle entered the pair at {t}"))
                })?;
                if j2 != j + 1 {
                    return Err(Error::Invariant(format!(
                        "pair particle {j} followed by particle {j2}"
                    )));
                }
                self.tracker = Tracker::Pair { hole: x, i, j: j2 };
                tracked_moved = true;
            }
            _ => {}
        }
        if tracked_moved && self.tracked_position() == Some(self.left) {
            return Err(self.breach(t, self.left));
        }
        Ok(Some(Event {
            t,
            kind: EventKind::Jump,
            x,
            hole_label,
            particle_label,
            tracked: self.tracked_position(),
            tracked_moved,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_labels() {
        let s = initial_config(InitialKind::Step, -5, 5).unwrap();
        assert_eq!(s.particle_position(1), Some(0));
        assert_eq!(s.particle_position(3), Some(-2));
        assert_eq!(s.hole_position(1), Some(1));
        assert_eq!(s.hole_position(5), Some(5));
        assert_eq!(s.hole_position(6), None);
        assert_eq!(s.particle_count(), 6);
    }

    #[test]
    fn pair_step_labels() {
        let s = initial_config(InitialKind::PairStep, -5, 5).unwrap();
        assert_eq!(s.particle_position(1), Some(1));
        assert_eq!(s.particle_position(2), Some(-1));
        assert_eq!(s.particle_position(5), Some(-4));
        assert_eq!(s.hole_position(1), Some(0));
        assert_eq!(s.hole_position(2), Some(2));
        assert_eq!(s.occupied(0), Some(false));
        assert_eq!(s.occupied(1), Some(true));
        assert_eq!(s.occupied(-1), Some(true));
        assert_eq!(s.pair(), Some((0, 1, 1)));
    }

    #[test]
    fn product_extremes_match_step() {
        let a = initial_config(
            InitialKind::Product {
                lambda: 1.0,
                rho: 0.0,
                seed: 4,
            },
            -6,
            6,
        )
        .unwrap();
        let b = initial_config(InitialKind::Step, -6, 6).unwrap();
        assert_eq!(a.occupation(), b.occupation());
        assert!(initial_config(InitialKind::Step, -2, 6).is_err());
        assert!(initial_config(
            InitialKind::Product {
                lambda: 1.5,
                rho: 0.0,
                seed: 0
            },
            -6,
            6
        )
        .is_err());
    }

    #[test]
    fn second_class_moves() {
        let mut s = initial_config(InitialKind::Step, -6, 6)
            .unwrap()
            .with_second_class(0)
            .unwrap();
        // particle at -1 jumps onto the second-class particle: swap
        let e = s.apply_epoch(0.5, -1).unwrap().unwrap();
        assert_eq!(e.kind, EventKind::Swap);
        assert_eq!(s.second_class(), Some(-1));
        assert_eq!(s.occupied(0), Some(true));
        assert_eq!(s.particle_position(2), Some(-1));
        // second-class particle jumps right back
        let e = s.apply_epoch(0.6, -1);
        assert_eq!(e.unwrap(), None);
        let e = s.apply_epoch(0.7, 0).unwrap().unwrap();
        assert_eq!(e.kind, EventKind::Jump);
        assert_eq!(s.second_class(), Some(-1));
        assert_eq!(s.particle_position(1), Some(1));
    }

    #[test]
    fn pair_moves() {
        let mut s = initial_config(InitialKind::PairStep, -6, 6).unwrap();
        // tagged particle jumps over hole 2
        s.apply_epoch(1.0, 1).unwrap().unwrap();
        assert_eq!(s.pair(), Some((1, 2, 1)));
        assert_eq!(s.particle_position(1), Some(2));
        // particle 2 jumps into the tagged hole
        s.apply_epoch(2.0, -1).unwrap().unwrap();
        assert_eq!(s.pair(), Some((1, 2, 1)));
        assert_eq!(
            s.apply_epoch(2.5, 0).unwrap().unwrap().particle_label,
            Some(2)
        );
        assert_eq!(s.pair(), Some((0, 2, 2)));
    }

    #[test]
    fn edge_changes_are_breaches() {
        let mut s = initial_config(InitialKind::Step, -4, 4).unwrap();
        assert!(matches!(
            s.apply_epoch(0.1, -4),
            Ok(None) // site -3 is occupied
        ));
        let mut occ = vec![true, false, false, false];
        occ[0] = true;
        let mut u = ExclusionState::from_occupation(0, occ).unwrap();
        assert!(matches!(
            u.apply_epoch(0.1, 0),
            Err(Error::WindowBreach { .. })
        ));
        assert!(
            s.apply_epoch(0.05, 0).is_err(),
            "epochs must not go back in time"
        );
    }
}
