//! Acceptance criteria at full size. Prints one line per criterion and exits
//! nonzero if any fails.
//!
//! Run a subset with `cargo test --test acceptance -- 1 3 9`.

use std::f64::consts::FRAC_PI_4;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use cgl_core::competition::f_of_theta;
use cgl_core::exclusion::{
    coupling_map, harris_simulate, initial_config, lpp_driven_simulate, recommended_half_width,
    verify_coupling, ClockSet, InitialKind,
};
use cgl_core::geodesics::{direction_target, passages_from};
use cgl_core::lpp::{brute_force_passage, build_grid};
use cgl_core::stats::{
    busemann_differences, coalescence_sample, deviation_sample, ks_statistic, median, partition,
    replicate, run_experiment, stabilized, Experiment, ExperimentSpec, ReferenceLaw,
};
use cgl_core::weights::WeightField;
use cgl_core::Site;

type Outcome = (bool, String);

fn exact_coupling() -> Outcome {
    let (ok, errors) = partition(replicate(0..100, |s| verify_coupling(s, 100.0, 300)));
    let violations: usize = ok.iter().map(|(_, r)| r.violations.len()).sum();
    let events: usize = ok.iter().map(|(_, r)| r.events_checked).sum();
    let first = ok
        .iter()
        .find_map(|(s, r)| {
            r.violations
                .first()
                .map(|v| format!(", first at seed {s}: {v}"))
        })
        .unwrap_or_default();
    (
        errors.is_empty() && violations == 0 && ok.len() == 100,
        format!(
            "{} seeds, {violations} violations over {events} event times, {} errors{first}",
            ok.len(),
            errors.len()
        ),
    )
}

fn dp_vs_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut compared = 0usize;
    for seed in 0..100u64 {
        let field = WeightField::new(seed);
        let grid = build_grid(&field, 6, 6).expect("grid");
        let sites: Vec<Site> = grid.cells().map(|c| c.0).collect();
        for &z in &sites {
            for &z2 in sites.iter().filter(|&&z2| z.precedes(z2)) {
                let exact = brute_force_passage(&field, z, z2).expect("oracle");
                let dp = if z == Site::ORIGIN {
                    let rect = build_grid(&field, z2.i as usize, z2.j as usize).expect("grid");
                    assert_eq!(rect.passage(z2), grid.passage(z2));
                    rect.passage(z2).expect("corner")
                } else {
                    passages_from(&field, z, &[z2]).expect("dp")[0]
                };
                worst = worst.max((dp - exact).abs() / exact);
                compared += 1;
            }
        }
    }
    (
        worst <= 1e-9,
        format!("{compared} rectangles, worst relative error {worst:.2e}"),
    )
}

struct AngleRun {
    ks: Vec<(f64, f64)>,
    f_ks: f64,
    errors: usize,
}

fn angle_run() -> AngleRun {
    let mut spec = ExperimentSpec::new(Experiment::AngleLaw);
    spec.reps = 2000;
    spec.n = 1000;
    spec.ladder = vec![250.0, 500.0, 1000.0];
    let report = run_experiment(&spec).expect("angle-law");
    let ks = report
        .sets
        .iter()
        .map(|s| (s.level, s.ks.expect("ks")))
        .collect();
    let thetas = &report.set("theta", 1000.0).expect("n = 1000").values;
    let f: Vec<f64> = thetas
        .iter()
        .map(|&t| f_of_theta(t).expect("angle"))
        .collect();
    let f_ks = ks_statistic(&f, &ReferenceLaw::Uniform { a: -1.0, b: 1.0 }).expect("ks");
    AngleRun {
        ks,
        f_ks,
        errors: report.errors.len(),
    }
}

fn angle_law(run: &AngleRun) -> Outcome {
    let last = run.ks.last().expect("ladder").1;
    let monotone = run.ks.windows(2).all(|w| w[1].1 <= w[0].1);
    let ladder: Vec<String> = run
        .ks
        .iter()
        .map(|(n, d)| format!("n={n}: {d:.4}"))
        .collect();
    (
        last < 0.05 && monotone && run.errors == 0,
        format!(
            "KS {} (need < 0.05 at n=1000, non-increasing), {} errors",
            ladder.join(", "),
            run.errors
        ),
    )
}

fn second_class_speed(run: &AngleRun) -> Outcome {
    let mut spec = ExperimentSpec::new(Experiment::X2tLaw);
    spec.reps = 1000;
    spec.n = 0;
    spec.horizon = 500.0;
    spec.window = 1200;
    let report = run_experiment(&spec).expect("x2t-law");
    let direct = report
        .set("X(T)/T", 500.0)
        .and_then(|s| s.ks)
        .unwrap_or(f64::NAN);
    let err_frac = report.errors.len() as f64 / 1000.0;
    (
        run.f_ks < 0.05 && direct < 0.06 && err_frac < 0.01,
        format!(
            "KS f(theta_1000) {:.4} (< 0.05), KS X(500)/500 {direct:.4} (< 0.06), {} errors",
            run.f_ks,
            report.errors.len()
        ),
    )
}

fn shape() -> Outcome {
    let mut spec = ExperimentSpec::new(Experiment::ShapeCheck);
    spec.reps = 50;
    spec.n = 1000;
    let report = run_experiment(&spec).expect("shape-check");
    let m = report.sets[0].mean;
    (
        (3.80..=4.01).contains(&m) && report.errors.is_empty(),
        format!("mean G(n,n)/n = {m:.4} in [3.80, 4.01]"),
    )
}

struct GeodesicRun {
    deviations: Vec<[f64; 3]>,
    coalesced: usize,
    suffix_ok: usize,
    constant: usize,
    nonzero: usize,
    seeds: usize,
    errors: usize,
}

fn geodesic_run() -> GeodesicRun {
    let ladder = [500usize, 1000, 2000];
    let targets: Vec<Site> = [500.0, 1000.0, 2000.0]
        .iter()
        .map(|&r| direction_target(FRAC_PI_4, r).expect("target"))
        .collect();
    let (ok, errors) = partition(replicate(0..200, |s| {
        let grid = build_grid(&WeightField::new(s), 2000, 2000)?;
        let dev = deviation_sample(&grid, s, &ladder)?;
        let (rec, suffix) =
            coalescence_sample(&grid, s, 45.0, 2000.0 * 2f64.sqrt(), Site::new(2000, 2000))?;
        let diffs = busemann_differences(&grid, &targets)?;
        Ok((
            [dev[0].deviation, dev[1].deviation, dev[2].deviation],
            rec.coalesced,
            suffix,
            stabilized(&diffs),
        ))
    }));
    GeodesicRun {
        deviations: ok.iter().map(|(_, r)| r.0).collect(),
        coalesced: ok.iter().filter(|(_, r)| r.1).count(),
        suffix_ok: ok.iter().filter(|(_, r)| r.2).count(),
        constant: ok.iter().filter(|(_, r)| r.3 .0).count(),
        nonzero: ok.iter().filter(|(_, r)| r.3 .1).count(),
        seeds: ok.len(),
        errors: errors.len(),
    }
}

fn deviation(run: &GeodesicRun) -> Outcome {
    let bound = 2000f64.powf(0.8);
    let within = run.deviations.iter().filter(|d| d[2] < bound).count() as f64 / run.seeds as f64;
    let med: Vec<f64> = (0..3)
        .map(|k| {
            let col: Vec<f64> = run.deviations.iter().map(|d| d[k]).collect();
            median(&col) / [500.0, 1000.0, 2000.0][k]
        })
        .collect();
    let decreasing = med.windows(2).all(|w| w[1] < w[0]);
    (
        within >= 0.99 && decreasing && run.errors == 0,
        format!(
            "{:.1}% below n^0.8 = {bound:.0}; median deviation/n {:.4}, {:.4}, {:.4}",
            100.0 * within,
            med[0],
            med[1],
            med[2]
        ),
    )
}

fn coalescence(run: &GeodesicRun) -> Outcome {
    let frac = run.coalesced as f64 / run.seeds as f64;
    (
        frac >= 0.95 && run.suffix_ok == run.seeds && run.errors == 0,
        format!(
            "{}/{} pairs share a site, {}/{} identical suffixes",
            run.coalesced, run.seeds, run.suffix_ok, run.seeds
        ),
    )
}

fn stabilization(run: &GeodesicRun) -> Outcome {
    let frac = run.constant as f64 / run.seeds as f64;
    (
        frac >= 0.90 && run.nonzero == run.constant && run.errors == 0,
        format!(
            "constant over r = 500, 1000, 2000 in {}/{} seeds, nonzero in {}/{} of those",
            run.constant, run.seeds, run.nonzero, run.constant
        ),
    )
}

fn coupling_weights() -> Outcome {
    let horizon = 150.0;
    let hw = recommended_half_width(horizon);
    let (ok, errors) = partition(replicate(0..260, |s| {
        let clocks = ClockSet::new(s, -hw, hw, horizon)?;
        let table = coupling_map(&clocks, horizon)?.weights(20, 20)?;
        Ok(table
            .values()
            .iter()
            .copied()
            .skip(1) // (1,1) is an independent draw
            .collect::<Vec<f64>>())
    }));
    let samples: Vec<f64> = ok.into_iter().flat_map(|(_, v)| v).collect();
    let d = ks_statistic(&samples, &ReferenceLaw::Exp1).expect("ks");
    let err_frac = errors.len() as f64 / 260.0;
    (
        samples.len() >= 100_000 && d < 0.01 && err_frac < 0.01,
        format!(
            "{} weights from a 20x20 rectangle over {} seeds, KS vs Exp(1) = {d:.4}, {} errors",
            samples.len(),
            260 - errors.len(),
            errors.len()
        ),
    )
}

fn construction_equivalence() -> Outcome {
    let t = 20.0;
    let (left, right) = (-20i64, 19i64);
    let hw = recommended_half_width(t);
    let reps = 2000u64;
    let (harris, e1) = partition(replicate(0..reps, |s| {
        let clocks = ClockSet::new(s, -hw, hw, t)?;
        let mut state = initial_config(InitialKind::PairStep, -hw, hw)?;
        harris_simulate(&mut state, &clocks, t)?;
        Ok((left..=right)
            .map(|x| state.occupied(x).expect("in window"))
            .collect::<Vec<bool>>())
    }));
    let (lpp, e2) = partition(replicate(reps..2 * reps, |s| {
        let grid = build_grid(&WeightField::new(s), 80, 80)?;
        lpp_driven_simulate(&grid, t)?.occupation_at(t, left, right)
    }));
    let freq = |runs: &[(u64, Vec<bool>)], k: usize| {
        runs.iter().filter(|(_, o)| o[k]).count() as f64 / runs.len() as f64
    };
    let (m1, m2) = (harris.len() as f64, lpp.len() as f64);
    let mut agree = 0;
    for k in 0..(right - left + 1) as usize {
        let (p, q) = (freq(&harris, k), freq(&lpp, k));
        let se = (p * (1.0 - p) / m1 + q * (1.0 - q) / m2).sqrt();
        if (p - q).abs() <= 3.0 * se {
            agree += 1;
        }
    }
    (
        agree >= 38 && e1.is_empty() && e2.is_empty(),
        format!(
            "{agree}/40 sites within 3 standard errors, {} + {} errors",
            e1.len(),
            e2.len()
        ),
    )
}

fn main() -> ExitCode {
    let wanted: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let selected = |k: usize| wanted.is_empty() || wanted.contains(&k);
    let mut angle: Option<AngleRun> = None;
    let mut geo: Option<GeodesicRun> = None;
    let mut failed = 0;
    let names = [
        "exact coupling",
        "passage times vs path enumeration",
        "angle law",
        "second-class particle speed",
        "shape function",
        "geodesic transversal deviation",
        "geodesic coalescence",
        "difference stabilization",
        "coupling-map weight law",
        "construction equivalence",
    ];
    for (k, name) in names.iter().enumerate().map(|(k, n)| (k + 1, n)) {
        if !selected(k) {
            continue;
        }
        let started = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(|| match k {
            1 => exact_coupling(),
            2 => dp_vs_oracle(),
            3 => angle_law(angle.get_or_insert_with(angle_run)),
            4 => second_class_speed(angle.get_or_insert_with(angle_run)),
            5 => shape(),
            6 => deviation(geo.get_or_insert_with(geodesic_run)),
            7 => coalescence(geo.get_or_insert_with(geodesic_run)),
            8 => stabilization(geo.get_or_insert_with(geodesic_run)),
            9 => coupling_weights(),
            10 => construction_equivalence(),
            _ => unreachable!(),
        }));
        let (pass, detail) = result.unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {k:>2} {:<36} {}  {detail} [{:.1?}]",
            name,
            if pass { "PASS" } else { "FAIL" },
            started.elapsed()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
