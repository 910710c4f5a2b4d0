use cgl_core::exclusion::recommended_half_width;
use cgl_core::stats::{
    ks_statistic, replicate, run_experiment, Experiment, ExperimentSpec, ReferenceLaw,
};
use rand::{Rng, SeedableRng};

/// Exact CDF of the one-sample KS statistic, `P(D_n < d)`, by the
/// Marsaglia-Tsang-Wang matrix-power method.
fn ks_cdf_exact(n: usize, d: f64) -> f64 {
    let nd = n as f64 * d;
    let k = nd as usize + 1;
    let m = 2 * k - 1;
    let h = k as f64 - nd;
    let mut hm = vec![0.0f64; m * m];
    for i in 0..m {
        for j in 0..m {
            if i + 1 >= j {
                hm[i * m + j] = 1.0;
            }
        }
    }
    for i in 0..m {
        hm[i * m] -= h.powi(i as i32 + 1);
        hm[(m - 1) * m + i] -= h.powi((m - i) as i32);
    }
    if 2.0 * h - 1.0 > 0.0 {
        hm[(m - 1) * m] += (2.0 * h - 1.0).powi(m as i32);
    }
    for i in 0..m {
        for j in 0..m {
            if i + 1 > j {
                for g in 1..=(i + 1 - j) {
                    hm[i * m + j] /= g as f64;
                }
            }
        }
    }
    let mul = |a: &[f64], b: &[f64]| {
        let mut c = vec![0.0; m * m];
        for i in 0..m {
            for l in 0..m {
                let x = a[i * m + l];
                if x != 0.0 {
                    for j in 0..m {
                        c[i * m + j] += x * b[l * m + j];
                    }
                }
            }
        }
        c
    };
    // H^n with a decimal exponent kept alongside to avoid overflow
    fn rescale(v: &mut [f64], e: &mut i32, mid: usize) {
        if v[mid] > 1e140 {
            v.iter_mut().for_each(|x| *x *= 1e-140);
            *e += 140;
        }
    }
    let mid = (k - 1) * m + (k - 1);
    let (mut result, mut er) = (None::<Vec<f64>>, 0i32);
    let (mut base, mut eb) = (hm, 0i32);
    let mut p = n;
    while p > 0 {
        if p & 1 == 1 {
            result = Some(match result {
                None => {
                    er = eb;
                    base.clone()
                }
                Some(r) => {
                    er += eb;
                    mul(&r, &base)
                }
            });
            let r = result.as_mut().unwrap();
            rescale(r, &mut er, mid);
        }
        p >>= 1;
        if p > 0 {
            base = mul(&base, &base);
            eb *= 2;
            rescale(&mut base, &mut eb, mid);
        }
    }
    let mut s = result.unwrap()[mid];
    let mut e = er;
    for i in 1..=n {
        s *= i as f64 / n as f64;
        if s < 1e-140 {
            s *= 1e140;
            e -= 140;
        }
    }
    s * 10f64.powi(e)
}

#[test]
fn exact_ks_law_sanity() {
    // n = 1: P(D < d) = 2d - 1 on [1/2, 1]
    assert!((ks_cdf_exact(1, 0.75) - 0.5).abs() < 1e-12);
    // against the asymptotic Kolmogorov law at large n
    let kolmogorov = |x: f64| {
        1.0 - 2.0
            * (1..100)
                .map(|k| (-1f64).powi(k - 1) * (-2.0 * (k * k) as f64 * x * x).exp())
                .sum::<f64>()
    };
    let n = 2000;
    let d = 1.36 / (n as f64).sqrt();
    assert!((ks_cdf_exact(n, d) - kolmogorov(1.36)).abs() < 0.01);
}

#[test]
fn quantile_samples_fit_closely() {
    let m = 500;
    let law = ReferenceLaw::Uniform { a: -1.0, b: 1.0 };
    let xs: Vec<f64> = (1..=m)
        .map(|k| -1.0 + 2.0 * k as f64 / (m + 1) as f64)
        .collect();
    assert!(ks_statistic(&xs, &law).unwrap() <= 1.0 / (m + 1) as f64 + 1e-12);
}

#[test]
fn point_mass_is_far() {
    let xs = vec![0.3; 100];
    assert!(ks_statistic(&xs, &ReferenceLaw::Exp1).unwrap() >= 0.5);
    assert!(ks_statistic(&[], &ReferenceLaw::Exp1).is_err());
    assert!(ks_statistic(&[1.0], &ReferenceLaw::Exp1).is_err());
}

#[test]
fn critical_value_has_the_stated_level() {
    let m = 2000;
    let crit = 1.63 / (m as f64).sqrt();
    let p_exceed = 1.0 - ks_cdf_exact(m, crit);
    assert!(p_exceed <= 0.01, "exceedance {p_exceed}");
    // Monte Carlo meta-run with an independent generator
    let runs = 1000;
    let law = ReferenceLaw::Uniform { a: -1.0, b: 1.0 };
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let exceed = (0..runs)
        .filter(|_| {
            let xs: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            ks_statistic(&xs, &law).unwrap() >= crit
        })
        .count() as f64;
    let sd = (runs as f64 * p_exceed * (1.0 - p_exceed)).sqrt();
    assert!(
        (exceed - runs as f64 * p_exceed).abs() <= 4.0 * sd + 1.0,
        "{exceed} exceedances, expected {}",
        runs as f64 * p_exceed
    );
}

#[test]
fn replication_order_is_by_seed() {
    let out = replicate(10..40, |s| Ok(s * 2));
    let seeds: Vec<u64> = out.iter().map(|r| r.0).collect();
    assert_eq!(seeds, (10..40).collect::<Vec<_>>());
}

#[test]
fn reports_are_reproducible() {
    let mut spec = ExperimentSpec::new(Experiment::AngleLaw);
    spec.n = 200;
    spec.reps = 30;
    spec.seed_base = 5;
    let a = serde_json::to_string(&run_experiment(&spec).unwrap()).unwrap();
    let b = serde_json::to_string(&run_experiment(&spec).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn breaches_are_listed_not_dropped() {
    let mut spec = ExperimentSpec::new(Experiment::X2tLaw);
    spec.n = 0;
    spec.horizon = 30.0;
    spec.window = 8;
    spec.reps = 20;
    let report = run_experiment(&spec).unwrap();
    assert_eq!(report.completed + report.errors.len(), 20);
    assert!(!report.errors.is_empty());
    assert!(!report.passed);
    assert!(report
        .errors
        .iter()
        .all(|e| e.error.contains("window edge")));
}

#[test]
fn small_experiments_run() {
    let mut spec = ExperimentSpec::new(Experiment::CoupleVerify);
    spec.horizon = 20.0;
    spec.reps = 5;
    let r = run_experiment(&spec).unwrap();
    assert!(r.passed, "{:?}", r.checks);
    assert!(recommended_half_width(20.0) >= 60);

    let mut spec = ExperimentSpec::new(Experiment::DeviationScan);
    spec.n = 80;
    spec.reps = 4;
    let r = run_experiment(&spec).unwrap();
    assert_eq!(r.sets.len(), 6);

    let mut spec = ExperimentSpec::new(Experiment::CoalescenceScan);
    spec.n = 60;
    spec.reps = 4;
    spec.ladder = vec![20.0, 40.0];
    let r = run_experiment(&spec).unwrap();
    assert_eq!(r.completed, 4);

    let mut spec = ExperimentSpec::new(Experiment::ShapeCheck);
    spec.n = 50;
    spec.reps = 4;
    assert_eq!(run_experiment(&spec).unwrap().sets[0].values.len(), 4);

    assert!("nope".parse::<Experiment>().is_err());
    assert_eq!("x2t-law".parse::<Experiment>().unwrap(), Experiment::X2tLaw);
}
