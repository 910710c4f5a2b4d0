use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use cgl_core::competition::{competition_interface_rolling, f_of_theta};
use cgl_core::config::{load_run_config, parse_alpha_degrees, parse_r_ladder, Format, RunConfig};
use cgl_core::exclusion::{harris_simulate, initial_config, ClockSet, InitialKind};
use cgl_core::io;
use cgl_core::lpp::build_grid;
use cgl_core::stats::{run_experiment, Experiment, ExperimentReport, ExperimentSpec, Records};
use cgl_core::weights::WeightField;
use cgl_core::Site;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "cgl",
    version,
    about = "Last-passage percolation, competition interfaces and TASEP experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Passage times on an n x n grid, dumped as `i,j,G,parent`.
    Grow,
    /// The competition interface for n steps, dumped as JSON lines.
    Interface,
    /// Angle of the competition interface against its limiting law.
    AngleLaw,
    /// Second-class particle speed against Uniform[-1, 1].
    X2tLaw,
    /// Pathwise check of the second-class particle / interface coupling.
    CoupleVerify,
    /// Transversal deviation and shape fluctuation of diagonal geodesics.
    GeodesicStats,
    /// Mean of G(n,n)/n against the shape function.
    ShapeCheck,
    /// Geodesic coalescence and difference stabilization along a ray.
    CoalescenceScan,
}

#[derive(Args)]
struct Flags {
    /// Seed, or first seed of a replicated run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Time horizon.
    #[arg(long = "T", global = true)]
    horizon: Option<f64>,
    /// Half-width of the exclusion window.
    #[arg(long, global = true)]
    window: Option<i64>,
    /// Number of replications.
    #[arg(long, visible_alias = "seeds", global = true)]
    reps: Option<usize>,
    /// Comma-separated sizes, e.g. 500,1000,2000.
    #[arg(long, value_parser = ladder, global = true)]
    r_ladder: Option<Ladder>,
    /// Direction in degrees.
    #[arg(long, value_parser = alpha, global = true)]
    alpha: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"], global = true)]
    format: Option<String>,
    /// JSON file with default settings; flags win over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

// A bare Vec would make clap expect one f64 per occurrence.
#[derive(Clone)]
struct Ladder(Vec<f64>);

fn ladder(s: &str) -> std::result::Result<Ladder, String> {
    parse_r_ladder(s).map(Ladder).map_err(|e| e.to_string())
}

fn alpha(s: &str) -> std::result::Result<f64, String> {
    parse_alpha_degrees(s).map_err(|e| e.to_string())
}

impl Flags {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            experiment: None,
            seed: self.seed,
            n: self.n,
            horizon: self.horizon,
            window: self.window,
            reps: self.reps,
            r_ladder: self.r_ladder.as_ref().map(|l| l.0.clone()),
            alpha: self.alpha,
            out: self.out.clone(),
            format: self
                .format
                .as_deref()
                .map(|f| f.parse().expect("checked by clap")),
        }
    }
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Grow => "grow",
            Command::Interface => "interface",
            Command::AngleLaw => "angle-law",
            Command::X2tLaw => "x2t-law",
            Command::CoupleVerify => "couple-verify",
            Command::GeodesicStats => "geodesic-stats",
            Command::ShapeCheck => "shape-check",
            Command::CoalescenceScan => "coalescence-scan",
        }
    }

    fn experiment(self) -> Option<Experiment> {
        match self {
            Command::Grow | Command::Interface => None,
            Command::AngleLaw => Some(Experiment::AngleLaw),
            Command::X2tLaw => Some(Experiment::X2tLaw),
            Command::CoupleVerify => Some(Experiment::CoupleVerify),
            Command::GeodesicStats => Some(Experiment::DeviationScan),
            Command::ShapeCheck => Some(Experiment::ShapeCheck),
            Command::CoalescenceScan => Some(Experiment::CoalescenceScan),
        }
    }

    fn defaults(self) -> ExperimentSpec {
        let e = self.experiment().unwrap_or(Experiment::AngleLaw);
        let mut d = ExperimentSpec::new(e);
        match self {
            Command::Grow => d.n = 100,
            Command::Interface => d.n = 1000,
            Command::AngleLaw => {}
            Command::X2tLaw => {
                d.n = 250;
                d.horizon = 100.0;
            }
            Command::CoupleVerify => d.horizon = 100.0,
            Command::GeodesicStats => {
                d.n = 500;
                d.reps = 50;
            }
            Command::ShapeCheck => d.reps = 50,
            Command::CoalescenceScan => {
                d.n = 500;
                d.reps = 50;
            }
        }
        d
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_rows<T: serde::Serialize>(
    dir: &Path,
    stem: &str,
    format: Format,
    rows: &[T],
    csv: impl FnOnce(BufWriter<File>, &[T]) -> cgl_core::Result<()>,
) -> Result<()> {
    match format {
        Format::Csv => csv(create(dir, &format!("{stem}.csv"))?, rows)?,
        Format::Json => io::write_json(create(dir, &format!("{stem}.json"))?, &rows)?,
    }
    Ok(())
}

fn grow(cfg: &RunConfig, spec: &ExperimentSpec, dir: &Path, format: Format) -> Result<bool> {
    let grid = build_grid(&WeightField::new(spec.seed_base), spec.n, spec.n)?;
    match format {
        Format::Csv => io::write_grid_csv(create(dir, "grid.csv")?, &grid)?,
        Format::Json => {
            let rows: Vec<io::GridRecord> = grid
                .cells()
                .map(|(z, g, p)| io::GridRecord {
                    i: z.i,
                    j: z.j,
                    g,
                    parent: p.tag(),
                })
                .collect();
            io::write_json(create(dir, "grid.json")?, &rows)?;
        }
    }
    let n = spec.n as i64;
    let g = grid.passage(Site::new(n, n)).expect("corner");
    println!("G({n}, {n}) = {g} (G/n = {})", g / spec.n as f64);
    write_config(cfg, dir)?;
    Ok(true)
}

fn interface(cfg: &RunConfig, spec: &ExperimentSpec, dir: &Path) -> Result<bool> {
    let trace = competition_interface_rolling(&WeightField::new(spec.seed_base), spec.n)?;
    io::write_trace_jsonl(create(dir, "trace.jsonl")?, &trace)?;
    let theta = trace.angle_estimate(spec.n)?;
    println!(
        "theta_{} = {theta} rad ({} deg), f(theta) = {}",
        spec.n,
        theta.to_degrees(),
        f_of_theta(theta)?
    );
    write_config(cfg, dir)?;
    Ok(true)
}

fn write_config(cfg: &RunConfig, dir: &Path) -> Result<()> {
    io::write_json(create(dir, "config.json")?, cfg)?;
    Ok(())
}

fn experiment(cfg: &RunConfig, spec: &ExperimentSpec, dir: &Path, format: Format) -> Result<bool> {
    let report = run_experiment(spec)?;
    write_records(&report, spec, dir, format)?;
    io::write_json(
        create(dir, "report.json")?,
        &json!({ "config": cfg, "report": &report }),
    )?;
    summarize(&report);
    Ok(report.passed)
}

fn write_records(
    report: &ExperimentReport,
    spec: &ExperimentSpec,
    dir: &Path,
    format: Format,
) -> Result<()> {
    match &report.records {
        Records::None => match format {
            Format::Csv => {
                let mut w = create(dir, "samples.csv")?;
                writeln!(w, "seed,set,value")?;
                for s in &report.sets {
                    for (seed, v) in s.seeds.iter().zip(&s.values) {
                        writeln!(w, "{seed},{},{v}", s.name)?;
                    }
                }
                w.flush()?;
            }
            Format::Json => {
                let rows: Vec<_> = report
                    .sets
                    .iter()
                    .flat_map(|s| {
                        s.seeds.iter().zip(&s.values).map(move |(&seed, &value)| {
                            json!({"seed": seed, "set": s.name, "value": value})
                        })
                    })
                    .collect();
                io::write_json(create(dir, "samples.json")?, &rows)?;
            }
        },
        Records::Angles(rows) => write_rows(dir, "angles", format, rows, io::write_angle_csv)?,
        Records::Deviations(rows) => {
            write_rows(dir, "deviations", format, rows, io::write_deviation_csv)?
        }
        Records::Coalescence(rows) => {
            write_rows(dir, "coalescence", format, rows, io::write_coalescence_csv)?
        }
        Records::Coupling(reports) => {
            io::write_json(create(dir, "coupling.json")?, reports)?;
            // one trajectory of the second-class particle, for inspection
            let hw = if spec.window > 0 {
                spec.window
            } else {
                cgl_core::exclusion::recommended_half_width(spec.horizon)
            };
            let clocks = ClockSet::new(spec.seed_base, -hw, hw, spec.horizon)?;
            let mut state = initial_config(InitialKind::Step, -hw, hw)?.with_second_class(0)?;
            let trajectory = harris_simulate(&mut state, &clocks, spec.horizon)?;
            io::write_trajectory_jsonl(create(dir, "trajectory.jsonl")?, &trajectory)?;
        }
    }
    Ok(())
}

fn summarize(report: &ExperimentReport) {
    eprintln!(
        "{}: {} of {} replications completed in {:.2?}",
        report.experiment, report.completed, report.requested, report.wall_clock
    );
    for s in &report.sets {
        match (s.ks, s.tolerance) {
            (Some(d), Some(tol)) => eprintln!(
                "  {} @ {}: KS = {d:.4} vs {} (tolerance {tol})",
                s.name,
                s.level,
                s.reference.map(|r| r.to_string()).unwrap_or_default()
            ),
            (Some(d), None) => eprintln!("  {} @ {}: KS = {d:.4}", s.name, s.level),
            _ => eprintln!(
                "  {} @ {}: mean {:.4}, variance {:.4}",
                s.name, s.level, s.mean, s.variance
            ),
        }
    }
    for c in &report.checks {
        eprintln!(
            "  [{}] {}: {} (threshold {})",
            if c.passed { "pass" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    for e in &report.errors {
        eprintln!("  seed {}: {}", e.seed, e.error);
    }
    println!("{}", if report.passed { "PASS" } else { "FAIL" });
}

fn run(cli: Cli) -> Result<bool> {
    let file = match &cli.flags.config {
        Some(p) => load_run_config(p)?,
        None => RunConfig::default(),
    };
    let mut cfg = file.overlay(cli.flags.to_config());
    cfg.experiment = Some(cli.command.name().to_string());
    cfg.validate()?;
    let spec = cfg.to_spec(
        cli.command.experiment().unwrap_or(Experiment::AngleLaw),
        &cli.command.defaults(),
    );
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let format = cfg.format.unwrap_or_default();
    match cli.command {
        Command::Grow => grow(&cfg, &spec, &dir, format),
        Command::Interface => interface(&cfg, &spec, &dir),
        _ => experiment(&cfg, &spec, &dir, format),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<cgl_core::Error>().is_some_and(|e| {
                matches!(
                    e,
                    cgl_core::Error::Domain { .. }
                        | cgl_core::Error::InvalidArgument(_)
                        | cgl_core::Error::Parse(_)
                        | cgl_core::Error::UnknownExperiment(_)
                )
            });
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
