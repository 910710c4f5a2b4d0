//! Replicated experiments over seeds, Kolmogorov-Smirnov distances and the
//! reports the CLI and the acceptance suite consume.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::competition::{competition_interface_rolling, f_of_theta, theta_cdf};
use crate::error::{Error, Result};
use crate::exclusion::{
    harris_simulate, initial_config, recommended_half_width, verify_coupling, ClockSet,
    CouplingReport, InitialKind,
};
use crate::geodesics::{
    coalescence_of, direction_target, geodesic, passages_from, shape_fluctuation,
    transversal_deviation,
};
use crate::io::{AngleRecord, CoalescenceRecord, DeviationRecord};
use crate::lattice::Site;
use crate::lpp::{build_grid, corner_passage, shape_mu, PassageGrid};
use crate::weights::WeightField;

/// Largest grid, in cells, an experiment may allocate in full.
pub const MAX_GRID_CELLS: usize = 64_000_000;

/// Reference distributions for goodness-of-fit checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum ReferenceLaw {
    Exp1,
    Uniform {
        a: f64,
        b: f64,
    },
    /// The limiting law of the competition-interface angle on `[0, pi/2]`.
    Theta,
}

impl ReferenceLaw {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ReferenceLaw::Exp1 => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x).exp_m1()
                }
            }
            ReferenceLaw::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            ReferenceLaw::Theta => {
                if x <= 0.0 {
                    0.0
                } else if x >= std::f64::consts::FRAC_PI_2 {
                    1.0
                } else {
                    theta_cdf(x).expect("in range")
                }
            }
        }
    }
}

impl fmt::Display for ReferenceLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceLaw::Exp1 => write!(f, "Exp(1)"),
            ReferenceLaw::Uniform { a, b } => write!(f, "Uniform[{a}, {b}]"),
            ReferenceLaw::Theta => write!(f, "angle law"),
        }
    }
}

/// One-sample Kolmogorov-Smirnov distance `sup |F_m - F|`.
pub fn ks_statistic(samples: &[f64], law: &ReferenceLaw) -> Result<f64> {
    ks_statistic_with(samples, |x| law.cdf(x))
}

/// [`ks_statistic`] against an arbitrary continuous CDF.
pub fn ks_statistic_with(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidArgument("NaN sample".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    let m = xs.len() as f64;
    let mut d = 0.0f64;
    for (k, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - k as f64 / m).max((k + 1) as f64 / m - f);
    }
    Ok(d)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

/// Worker count: `CGL_THREADS` if set to a positive integer, otherwise the
/// number of available cores.
pub fn threads() -> usize {
    std::env::var("CGL_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `f` once per seed on a pool of [`threads`] workers. Results come back
/// in seed order whatever the scheduling.
pub fn replicate<T, F>(seeds: impl IntoIterator<Item = u64>, f: F) -> Vec<(u64, Result<T>)>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let seeds: Vec<u64> = seeds.into_iter().collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads())
        .build()
        .expect("thread pool");
    pool.install(|| seeds.par_iter().map(|&s| (s, f(s))).collect())
}

/// A replication that ended in an error. Listed in the report, never dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorOutcome {
    pub seed: u64,
    pub error: String,
}

/// Splits replication results into successes and listed error outcomes.
pub fn partition<T>(results: Vec<(u64, Result<T>)>) -> (Vec<(u64, T)>, Vec<ErrorOutcome>) {
    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for (seed, r) in results {
        match r {
            Ok(v) => ok.push((seed, v)),
            Err(e) => errors.push(ErrorOutcome {
                seed,
                error: e.to_string(),
            }),
        }
    }
    (ok, errors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    AngleLaw,
    X2tLaw,
    ShapeCheck,
    DeviationScan,
    CoupleVerify,
    CoalescenceScan,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::AngleLaw,
        Experiment::X2tLaw,
        Experiment::ShapeCheck,
        Experiment::DeviationScan,
        Experiment::CoupleVerify,
        Experiment::CoalescenceScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::AngleLaw => "angle-law",
            Experiment::X2tLaw => "x2t-law",
            Experiment::ShapeCheck => "shape-check",
            Experiment::DeviationScan => "deviation-scan",
            Experiment::CoupleVerify => "couple-verify",
            Experiment::CoalescenceScan => "coalescence-scan",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

/// Parameters of one experiment. Unused fields are ignored by experiments
/// that do not need them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub seed_base: u64,
    pub reps: usize,
    /// Interface steps, or the side of the square grid.
    pub n: usize,
    /// Time horizon for exclusion runs.
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Half-width of the exclusion window; 0 picks the recommended value.
    pub window: i64,
    /// Sizes (steps, diagonal sides or radii) for ladder experiments; empty
    /// picks `n/4, n/2, n`.
    pub ladder: Vec<f64>,
    /// Direction in degrees for directional experiments.
    pub alpha_deg: f64,
    /// Overrides the default KS tolerance of every sample set.
    pub tolerance: Option<f64>,
}

impl ExperimentSpec {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentSpec {
            experiment,
            seed_base: 0,
            reps: 100,
            n: 1000,
            horizon: 100.0,
            window: 0,
            ladder: Vec::new(),
            alpha_deg: 45.0,
            tolerance: None,
        }
    }

    pub fn seeds(&self) -> std::ops::Range<u64> {
        self.seed_base..self.seed_base + self.reps as u64
    }

    fn half_width(&self) -> i64 {
        if self.window > 0 {
            self.window
        } else {
            recommended_half_width(self.horizon)
        }
    }

    /// Integer ladder, defaulting to `n/4, n/2, n`, sorted and deduplicated.
    pub fn int_ladder(&self) -> Vec<usize> {
        let mut v: Vec<usize> = if self.ladder.is_empty() {
            vec![self.n / 4, self.n / 2, self.n]
        } else {
            self.ladder.iter().map(|&r| r.round() as usize).collect()
        };
        v.retain(|&k| k > 0);
        v.sort_unstable();
        v.dedup();
        v
    }

    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidArgument("reps must be positive".into()));
        }
        if self.ladder.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidArgument(
                "ladder entries must be positive".into(),
            ));
        }
        if !(0.0..=90.0).contains(&self.alpha_deg) {
            return Err(Error::Domain {
                name: "alpha",
                value: self.alpha_deg,
            });
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0) {
                return Err(Error::Domain {
                    name: "tolerance",
                    value: t,
                });
            }
        }
        Ok(())
    }

    fn needs_grid(&self, side: usize) -> Result<()> {
        let cells = side.saturating_mul(side);
        if cells > MAX_GRID_CELLS {
            return Err(Error::Budget(format!(
                "{side} x {side} grid exceeds {MAX_GRID_CELLS} cells"
            )));
        }
        Ok(())
    }
}

/// A sample vector with its summary and, when a reference law applies, its
/// KS distance and tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub name: String,
    /// Ladder size the samples were taken at.
    pub level: f64,
    pub seeds: Vec<u64>,
    pub values: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub reference: Option<ReferenceLaw>,
    pub ks: Option<f64>,
    pub tolerance: Option<f64>,
}

impl SampleSet {
    fn new(name: &str, level: f64, pairs: Vec<(u64, f64)>) -> Self {
        let (seeds, values): (Vec<u64>, Vec<f64>) = pairs.into_iter().unzip();
        let (m, v) = if values.len() >= 2 {
            (mean(&values), variance(&values))
        } else {
            (values.first().copied().unwrap_or(f64::NAN), f64::NAN)
        };
        SampleSet {
            name: name.to_string(),
            level,
            seeds,
            values,
            mean: m,
            variance: v,
            reference: None,
            ks: None,
            tolerance: None,
        }
    }

    fn against(mut self, law: ReferenceLaw, tolerance: f64) -> Self {
        self.ks = ks_statistic(&self.values, &law).ok();
        self.reference = Some(law);
        self.tolerance = Some(tolerance);
        self
    }

    pub fn passed(&self) -> bool {
        match (self.ks, self.tolerance) {
            (Some(d), Some(tol)) => d < tol,
            (None, Some(_)) => false,
            _ => true,
        }
    }
}

/// A named pass/fail comparison of a statistic against a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            passed: value <= threshold,
        }
    }

    fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            passed: value < threshold,
        }
    }

    fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            passed: value >= threshold,
        }
    }
}

/// Raw per-replication rows, written as CSV or JSON by the CLI.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Records {
    #[default]
    None,
    Angles(Vec<AngleRecord>),
    Deviations(Vec<DeviationRecord>),
    Coalescence(Vec<CoalescenceRecord>),
    Coupling(Vec<CouplingReport>),
}

/// Outcome of [`run_experiment`]. Serializes deterministically: the wall-clock
/// time is kept out of the serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub spec: ExperimentSpec,
    pub requested: usize,
    pub completed: usize,
    pub errors: Vec<ErrorOutcome>,
    pub sets: Vec<SampleSet>,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip)]
    pub records: Records,
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl ExperimentReport {
    pub fn set(&self, name: &str, level: f64) -> Option<&SampleSet> {
        self.sets
            .iter()
            .find(|s| s.name == name && s.level == level)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Largest tolerated fraction of replications ending in an error.
pub const MAX_ERROR_FRACTION: f64 = 0.01;

fn finish(
    spec: &ExperimentSpec,
    started: Instant,
    completed: usize,
    errors: Vec<ErrorOutcome>,
    sets: Vec<SampleSet>,
    mut checks: Vec<Check>,
    records: Records,
) -> ExperimentReport {
    let requested = spec.reps;
    checks.push(Check::below(
        "error fraction",
        errors.len() as f64 / requested as f64,
        MAX_ERROR_FRACTION,
    ));
    let passed =
        completed > 0 && sets.iter().all(SampleSet::passed) && checks.iter().all(|c| c.passed);
    ExperimentReport {
        experiment: spec.experiment,
        spec: spec.clone(),
        requested,
        completed,
        errors,
        sets,
        checks,
        passed,
        records,
        wall_clock: started.elapsed(),
    }
}

/// `theta_k` for each `k` in `ladder` (ascending) along one interface.
pub fn angle_sample(seed: u64, ladder: &[usize]) -> Result<Vec<f64>> {
    let n = *ladder
        .last()
        .ok_or_else(|| Error::InvalidArgument("empty ladder".into()))?;
    let trace = competition_interface_rolling(&WeightField::new(seed), n)?;
    ladder.iter().map(|&k| trace.angle_estimate(k)).collect()
}

/// `X(T)/T` for the second-class particle started at 0 from the step.
pub fn x2t_sample(seed: u64, horizon: f64, half_width: i64) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(Error::Domain {
            name: "T",
            value: horizon,
        });
    }
    let clocks = ClockSet::new(seed, -half_width, half_width, horizon)?;
    let mut state =
        initial_config(InitialKind::Step, -half_width, half_width)?.with_second_class(0)?;
    harris_simulate(&mut state, &clocks, horizon)?;
    Ok(state.second_class().expect("tracked") as f64 / horizon)
}

/// Transversal deviation and `G - mu` of the geodesic to `(m, m)` for each `m`
/// in `ladder`, in a grid rooted at `(1,1)`.
pub fn deviation_sample(
    grid: &PassageGrid,
    seed: u64,
    ladder: &[usize],
) -> Result<Vec<DeviationRecord>> {
    ladder
        .iter()
        .map(|&m| {
            let z = Site::new(m as i64, m as i64);
            let path = geodesic(grid, Site::ORIGIN, z)?;
            Ok(DeviationRecord {
                seed,
                n: m,
                deviation: transversal_deviation(&path, z),
                g_minus_mu: shape_fluctuation(grid, z)?,
            })
        })
        .collect()
}

/// Geodesics from `(1,1)` and `(10,1)` to `target`: whether they share a site,
/// the first shared site, and whether the suffixes from it agree.
pub fn coalescence_sample(
    grid: &PassageGrid,
    seed: u64,
    alpha_deg: f64,
    r: f64,
    target: Site,
) -> Result<(CoalescenceRecord, bool)> {
    let a = geodesic(grid, Site::ORIGIN, target)?;
    let b = geodesic(grid, Site::new(10, 1), target)?;
    let (c, suffix_ok) = match coalescence_of(&a, &b) {
        Ok(c) => (c, true),
        Err(Error::Invariant(_)) => (None, false),
        Err(e) => return Err(e),
    };
    Ok((
        CoalescenceRecord {
            seed,
            alpha: alpha_deg,
            r,
            coalesced: c.is_some(),
            c_i: c.map(|c| c.i),
            c_j: c.map(|c| c.j),
        },
        suffix_ok,
    ))
}

/// `G((2,1), t) - G((1,2), t)` for each target.
pub fn busemann_differences(grid: &PassageGrid, targets: &[Site]) -> Result<Vec<f64>> {
    let a = passages_from(grid, Site::new(2, 1), targets)?;
    let b = passages_from(grid, Site::new(1, 2), targets)?;
    Ok(a.iter().zip(&b).map(|(x, y)| x - y).collect())
}

/// Absolute tolerance for calling a difference ladder constant: differences
/// of equal path sums only disagree by rounding.
pub const CONSTANT_TOLERANCE: f64 = 1e-6;

/// Whether a ladder of differences is constant, and if so whether nonzero.
pub fn stabilized(diffs: &[f64]) -> (bool, bool) {
    let lo = diffs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = diffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let constant = hi - lo <= CONSTANT_TOLERANCE;
    (constant, constant && lo.abs() > CONSTANT_TOLERANCE)
}

/// Runs a registered experiment over seeds `seed_base .. seed_base + reps`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let started = Instant::now();
    match spec.experiment {
        Experiment::AngleLaw => angle_law(spec, started),
        Experiment::X2tLaw => x2t_law(spec, started),
        Experiment::ShapeCheck => shape_check(spec, started),
        Experiment::DeviationScan => deviation_scan(spec, started),
        Experiment::CoupleVerify => couple_verify(spec, started),
        Experiment::CoalescenceScan => coalescence_scan(spec, started),
    }
}

fn angle_law(spec: &ExperimentSpec, started: Instant) -> Result<ExperimentReport> {
    let ladder = spec.int_ladder();
    if ladder.is_empty() {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let (ok, errors) = partition(replicate(spec.seeds(), |s| angle_sample(s, &ladder)));
    let tol = spec.tolerance.unwrap_or(0.05);
    let mut sets = Vec::new();
    let mut records = Vec::new();
    for (k, &n) in ladder.iter().enumerate() {
        let pairs: Vec<(u64, f64)> = ok.iter().map(|(s, v)| (*s, v[k])).collect();
        records.extend(
            pairs
                .iter()
                .map(|&(seed, theta)| AngleRecord { seed, n, theta }),
        );
        sets.push(SampleSet::new("theta", n as f64, pairs).against(ReferenceLaw::Theta, tol));
    }
    // only the largest size carries the tolerance; smaller sizes are for the ladder
    let last = sets.len() - 1;
    for s in &mut sets[..last] {
        s.tolerance = None;
    }
    let mut checks = Vec::new();
    if sets.len() > 1 {
        let rise = sets
            .windows(2)
            .map(|w| w[1].ks.unwrap_or(f64::NAN) - w[0].ks.unwrap_or(f64::NAN))
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::at_most("ks non-increasing along ladder", rise, 0.0));
    }
    Ok(finish(
        spec,
        started,
        ok.len(),
        errors,
        sets,
        checks,
        Records::Angles(records),
    ))
}

fn x2t_law(spec: &ExperimentSpec, started: Instant) -> Result<ExperimentReport> {
    let uniform = ReferenceLaw::Uniform { a: -1.0, b: 1.0 };
    let use_angles = spec.n > 0;
    let use_harris = spec.horizon > 0.0;
    if !use_angles && !use_harris {
        return Err(Error::InvalidArgument("need n > 0 or T > 0".into()));
    }
    let hw = spec.half_width();
    let (ok, errors) = partition(replicate(spec.seeds(), |s| {
        let f = if use_angles {
            Some(f_of_theta(angle_sample(s, &[spec.n])?[0])?)
        } else {
            None
        };
        let x = if use_harris {
            Some(x2t_sample(s, spec.horizon, hw)?)
        } else {
            None
        };
        Ok((f, x))
    }));
    let mut sets = Vec::new();
    if use_angles {
        let pairs = ok
            .iter()
            .filter_map(|(s, (f, _))| f.map(|f| (*s, f)))
            .collect();
        sets.push(
            SampleSet::new("f(theta_n)", spec.n as f64, pairs)
                .against(uniform, spec.tolerance.unwrap_or(0.05)),
        );
    }
    if use_harris {
        let pairs = ok
            .iter()
            .filter_map(|(s, (_, x))| x.map(|x| (*s, x)))
            .collect();
        sets.push(
            SampleSet::new("X(T)/T", spec.horizon, pairs)
                .against(uniform, spec.tolerance.unwrap_or(0.06)),
        );
    }
    Ok(finish(
        spec,
        started,
        ok.len(),
        errors,
        sets,
        Vec::new(),
        Records::None,
    ))
}

fn shape_check(spec: &ExperimentSpec, started: Instant) -> Result<ExperimentReport> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let (ok, errors) = partition(replicate(spec.seeds(), |s| {
        Ok(corner_passage(&WeightField::new(s), n, n)? / n as f64)
    }));
    let set = SampleSet::new("G(n,n)/n", n as f64, ok);
    let mu = shape_mu(1.0, 1.0)?;
    let m = set.mean;
    let checks = vec![
        Check::at_least("mean G(n,n)/n lower bound", m, mu - 0.20),
        Check::at_most("mean G(n,n)/n upper bound", m, mu + 0.01),
    ];
    let completed = set.values.len();
    Ok(finish(
        spec,
        started,
        completed,
        errors,
        vec![set],
        checks,
        Records::None,
    ))
}

fn deviation_scan(spec: &ExperimentSpec, started: Instant) -> Result<ExperimentReport> {
    let ladder = spec.int_ladder();
    let side = *ladder
        .last()
        .ok_or_else(|| Error::InvalidArgument("n must be positive".into()))?;
    spec.needs_grid(side)?;
    let (ok, errors) = partition(replicate(spec.seeds(), |s| {
        let grid = build_grid(&WeightField::new(s), side, side)?;
        deviation_sample(&grid, s, &ladder)
    }));
    let mut sets = Vec::new();
    let mut medians = Vec::new();
    for (k, &m) in ladder.iter().enumerate() {
        let dev: Vec<(u64, f64)> = ok.iter().map(|(s, r)| (*s, r[k].deviation)).collect();
        let fl: Vec<(u64, f64)> = ok.iter().map(|(s, r)| (*s, r[k].g_minus_mu)).collect();
        let set = SampleSet::new("deviation", m as f64, dev);
        medians.push(median(&set.values) / m as f64);
        sets.push(set);
        sets.push(SampleSet::new("G - mu", m as f64, fl));
    }
    let top = sets
        .iter()
        .rev()
        .find(|s| s.name == "deviation")
        .expect("nonempty ladder");
    let bound = (side as f64).powf(0.8);
    let within =
        top.values.iter().filter(|&&d| d < bound).count() as f64 / top.values.len().max(1) as f64;
    let mut checks = vec![Check::at_least("fraction deviation < n^0.8", within, 0.99)];
    if medians.len() > 1 {
        let rise = medians
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::below("median deviation/n decreasing", rise, 0.0));
    }
    let completed = ok.len();
    let records = ok.into_iter().flat_map(|(_, r)| r).collect();
    Ok(finish(
        spec,
        started,
        completed,
        errors,
        sets,
        checks,
        Records::Deviations(records),
    ))
}

fn couple_verify(spec: &ExperimentSpec, started: Instant) -> Result<ExperimentReport> {
    let hw = spec.half_width();
    let need = recommended_half_width(spec.horizon);
    if hw < need {
        return Err(Error::WindowTooSmall {
            left: -hw,
            right: hw,
            reason: "half-width must be at least 2T + 20",
        });
    }
    let (ok, errors) = partition(replicate(spec.seeds(), |s| {
        verify_coupling(s, spec.horizon, hw)
    }));
    let counts: Vec<(u64, f64)> = ok
        .iter()
        .map(|(s, r)| (*s, r.violations.len() as f64))
        .collect();
    let total: f64 = counts.iter().map(|c| c.1).sum();
    let events: f64 = ok.iter().map(|(_, r)| r.events_checked as f64).sum();
    let checks = vec![
        Check::at_most("total violations", total, 0.0),
        Check::at_least("events checked", events, 1.0),
    ];
    let set = SampleSet::new("violations", spec.horizon, counts);
    let reports = ok.into_iter().map(|(_, r)| r).collect();
    Ok(finish(
        spec,
        started,
        set.values.len(),
        errors,
        vec![set],
        checks,
        Records::Coupling(reports),
    ))
}

fn coalescence_scan(spec: &ExperimentSpec, started: Instant) -> Result<ExperimentReport> {
    let alpha = spec.alpha_deg.to_radians();
    let radii: Vec<f64> = if spec.ladder.is_empty() {
        [0.25, 0.5, 1.0].iter().map(|f| f * spec.n as f64).collect()
    } else {
        spec.ladder.clone()
    };
    let mut targets = radii
        .iter()
        .map(|&r| direction_target(alpha, r).map(|t| (r, t)))
        .collect::<Result<Vec<_>>>()?;
    targets.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ladder_targets: Vec<Site> = targets.iter().map(|t| t.1).collect();
    // the coalescence target: the diagonal site (n, n) when n is set
    let (final_r, final_target) = if spec.n > 0 {
        let n = spec.n as i64;
        (spec.n as f64 * 2f64.sqrt(), Site::new(n, n))
    } else {
        *targets
            .last()
            .ok_or_else(|| Error::InvalidArgument("empty ladder".into()))?
    };
    let final_alpha = if spec.n > 0 { 45.0 } else { spec.alpha_deg };
    let side_i = ladder_targets
        .iter()
        .map(|t| t.i)
        .chain([final_target.i, 10])
        .max()
        .unwrap();
    let side_j = ladder_targets
        .iter()
        .map(|t| t.j)
        .chain([final_target.j, 2])
        .max()
        .unwrap();
    spec.needs_grid(side_i.max(side_j) as usize)?;
    let (ok, errors) = partition(replicate(spec.seeds(), |s| {
        let grid = build_grid(&WeightField::new(s), side_i as usize, side_j as usize)?;
        let mut rows = Vec::new();
        let mut suffix_ok = true;
        for &(r, t) in &targets {
            let (rec, ok) = coalescence_sample(&grid, s, spec.alpha_deg, r, t)?;
            rows.push(rec);
            suffix_ok &= ok;
        }
        let (last, ok) = coalescence_sample(&grid, s, final_alpha, final_r, final_target)?;
        suffix_ok &= ok;
        let diffs = busemann_differences(&grid, &ladder_targets)?;
        Ok((rows, last, suffix_ok, stabilized(&diffs), diffs))
    }));
    let m = ok.len().max(1) as f64;
    let coalesced = ok.iter().filter(|r| r.1 .1.coalesced).count() as f64 / m;
    let suffix = ok.iter().filter(|r| r.1 .2).count() as f64 / m;
    let constant = ok.iter().filter(|r| r.1 .3 .0).count();
    let nonzero = ok.iter().filter(|r| r.1 .3 .1).count();
    let checks = vec![
        Check::at_least("coalesced fraction", coalesced, 0.95),
        Check::at_least("identical suffix fraction", suffix, 1.0),
        Check::at_least("stabilized fraction", constant as f64 / m, 0.90),
        Check::at_least(
            "nonzero when stabilized",
            if constant == 0 {
                1.0
            } else {
                nonzero as f64 / constant as f64
            },
            1.0,
        ),
    ];
    let mut sets = Vec::new();
    for (k, &(r, _)) in targets.iter().enumerate() {
        let pairs = ok.iter().map(|(s, v)| (*s, v.4[k])).collect();
        sets.push(SampleSet::new("G((2,1),t) - G((1,2),t)", r, pairs));
    }
    let completed = ok.len();
    let mut records: Vec<CoalescenceRecord> = Vec::new();
    for (_, (rows, last, ..)) in ok {
        records.extend(rows);
        records.push(last);
    }
    Ok(finish(
        spec,
        started,
        completed,
        errors,
        sets,
        checks,
        Records::Coalescence(records),
    ))
}
