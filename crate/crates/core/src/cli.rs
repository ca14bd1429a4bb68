//! `dss` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | usage or configuration error |
//! | 3 | domain error (invalid constants or scenario) |
//! | 4 | derivation failure (no sign change, non-monotone axis, no convergence) |
//! | 5 | simulator disagrees with DSS |

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bva::{classify_with_threshold, derive_suite, Axis, Criticality, RngInfo};
use crate::config::{Config, Scenario};
use crate::error::{Error, Result};
use crate::kinematics::{dss_relative, to_absolute, DssBreakdown, EnvConstants, RelativeScenario};
use crate::reaction::RNG_ALGORITHM;
use crate::relevance::{
    classify_accel, classify_speed, coverage_report, CoverageReport, DEFAULT_ZERO_TOL,
};
use crate::sim::{
    maneuver_states, random_scenarios, simulate_traced, verify_batch, write_trajectory_csv,
    SimOutcome, VerifySummary,
};
use crate::sweep::{get_axis, sweep_grid, GridAxis};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_DERIVATION: i32 = 4;
pub const EXIT_DISAGREEMENT: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "dss",
    version,
    about = "Difference Space Stopping evaluation and boundary test derivation"
)]
pub struct Cli {
    /// Scenario configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Overrides `reaction_time.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Artifact output file.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate DSS for the configured scenario.
    Eval,
    /// Classify a DSS value, or the configured scenario.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        dss: Option<f64>,
    },
    /// Derive the boundary value test suite.
    Derive {
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
    },
    /// Simulate the emergency-braking maneuver.
    Simulate {
        /// Trajectory CSV output.
        #[arg(long, value_name = "PATH")]
        traj: Option<PathBuf>,
    },
    /// Check DSS against the simulator on random scenarios.
    Verify {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        dead_band: Option<f64>,
    },
    /// Evaluate DSS over a two-parameter grid.
    Sweep {
        /// Two axes, e.g. `d_V,delta_v`.
        #[arg(long)]
        axis: String,
        /// Grid size `NxM`.
        #[arg(long, default_value = "3x3")]
        grid: String,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        e if e.is_derivation_failure() => EXIT_DERIVATION,
        _ => EXIT_DOMAIN,
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Config(format!("I/O error: {e}"))
}

fn load(cli: &Cli) -> Result<Config> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("--config PATH is required".into()))?;
    let mut c = Config::load(path)?;
    if let Some(seed) = cli.seed {
        c.seed = seed;
    }
    Ok(c)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    writeln!(out, "{text}").map_err(io_err)
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Eval => cmd_eval(cli, stdout),
        Command::Classify { dss } => cmd_classify(cli, *dss, stdout),
        Command::Derive { format } => cmd_derive(cli, *format, stdout, stderr),
        Command::Simulate { traj } => cmd_simulate(cli, traj.as_deref(), stdout),
        Command::Verify { samples, dead_band } => cmd_verify(cli, *samples, *dead_band, stdout),
        Command::Sweep { axis, grid } => cmd_sweep(cli, axis, grid, stdout, stderr),
    }
    .map(|()| EXIT_OK)
    .or_else(|e| match e {
        CmdError::Failed(e) => Err(e),
        CmdError::Exit(code) => Ok(code),
    })
}

enum CmdError {
    Failed(Error),
    Exit(i32),
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Failed(e)
    }
}

type CmdResult = std::result::Result<(), CmdError>;

#[derive(Debug, Serialize)]
pub struct EvalReport {
    pub scenario: RelativeScenario,
    pub follower_speed: f64,
    pub env: EnvConstants,
    pub max_braking_decel: f64,
    pub breakdown: DssBreakdown,
    pub threshold: f64,
    pub criticality: Criticality,
}

fn evaluate(config: &Config) -> Result<EvalReport> {
    let scenario = config.relative();
    let breakdown = dss_relative(&scenario, &config.env)?;
    Ok(EvalReport {
        scenario,
        follower_speed: scenario.follower_speed(),
        env: config.env,
        max_braking_decel: config.env.max_braking_decel()?,
        breakdown,
        threshold: config.threshold,
        criticality: classify_with_threshold(breakdown.dss, config.threshold)?,
    })
}

fn cmd_eval(cli: &Cli, out: &mut dyn Write) -> CmdResult {
    let config = load(cli)?;
    let r = evaluate(&config)?;
    if cli.json {
        print_json(out, &r)?;
        return Ok(());
    }
    let s = &r.scenario;
    let b = &r.breakdown;
    let lines = [
        format!(
            "d_V = {:.4} m, delta_v = {:.4} m/s, t_BR = {:.4} s, v_L = {:.4} m/s, v_F = {:.4} m/s",
            s.effective_distance,
            s.speed_difference,
            s.reaction_time,
            s.leader_speed,
            r.follower_speed
        ),
        format!("a_B,max = {:.4} m/s^2", r.max_braking_decel),
        format!("x_B,L = {:.4} m", b.leader_braking),
        format!("x_R,F = {:.4} m", b.follower_reaction),
        format!("x_B,F = {:.4} m", b.follower_braking),
        format!("a     = {:.4} m", b.space_distance),
        format!("b     = {:.4} m", b.stop_distance),
        format!("DSS   = {:.4} m", b.dss),
        format!("criticality: {}", r.criticality),
    ];
    for l in lines {
        writeln!(out, "{l}").map_err(io_err)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct ClassifyReport {
    pub dss: f64,
    pub criticality: Criticality,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speed_relevant: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accel_relevant: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maneuver_coverage: Option<CoverageReport>,
}

fn cmd_classify(cli: &Cli, dss: Option<f64>, out: &mut dyn Write) -> CmdResult {
    let report = match dss {
        Some(dss) => {
            let threshold = match &cli.config {
                Some(_) => load(cli)?.threshold,
                None => 0.0,
            };
            ClassifyReport {
                dss,
                criticality: classify_with_threshold(dss, threshold)?,
                speed_relevant: None,
                accel_relevant: None,
                maneuver_coverage: None,
            }
        }
        None => {
            let config = load(cli)?;
            let r = evaluate(&config)?;
            let s = r.scenario;
            let abs = to_absolute(&s, &config.env, 0.0)?;
            // leader brakes first while the follower is still reacting
            let a_leader = if s.leader_speed > 0.0 {
                -r.max_braking_decel
            } else {
                0.0
            };
            ClassifyReport {
                dss: r.breakdown.dss,
                criticality: r.criticality,
                speed_relevant: Some(classify_speed(
                    s.leader_speed,
                    r.follower_speed,
                    DEFAULT_ZERO_TOL,
                )),
                accel_relevant: Some(classify_accel(a_leader, 0.0, DEFAULT_ZERO_TOL)),
                maneuver_coverage: Some(coverage_report(
                    &maneuver_states(&abs, &config.env)?,
                    DEFAULT_ZERO_TOL,
                )),
            }
        }
    };
    if cli.json {
        print_json(out, &report)?;
    } else {
        writeln!(out, "DSS = {:.4} m -> {}", report.dss, report.criticality).map_err(io_err)?;
        if let (Some(v), Some(a)) = (report.speed_relevant, report.accel_relevant) {
            writeln!(out, "speed matrix cell: {v}, acceleration matrix cell: {a}")
                .map_err(io_err)?;
        }
        if let Some(c) = &report.maneuver_coverage {
            writeln!(
                out,
                "maneuver covers {}/{} relevant combinations",
                c.covered, c.total
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}

fn cmd_derive(
    cli: &Cli,
    format: OutputFormat,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CmdResult {
    let config = load(cli)?;
    let mut suite = derive_suite(&config.derivation())?;
    suite.provenance.rng = Some(RngInfo {
        algorithm: RNG_ALGORITHM.into(),
        seed: config.seed,
    });

    let mut file;
    let sink: &mut dyn Write = match &cli.out {
        Some(path) => {
            file = create(path)?;
            &mut file
        }
        None => stdout,
    };
    let format = if cli.json { OutputFormat::Json } else { format };
    match format {
        OutputFormat::Json => print_json(sink, &suite)?,
        OutputFormat::Csv => suite.write_table_csv(&mut *sink)?,
    }
    sink.flush().map_err(io_err)?;
    for s in &suite.skipped {
        writeln!(stderr, "skipped {}: {}", s.axis, s.reason).map_err(io_err)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub scenario: RelativeScenario,
    pub dss: f64,
    pub outcome: SimOutcome,
}

fn cmd_simulate(cli: &Cli, traj: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let config = load(cli)?;
    let abs = match config.scenario {
        Scenario::Absolute(a) => a,
        Scenario::Relative(r) => to_absolute(&r, &config.env, 0.0)?,
    };
    let mut outcome = simulate_traced(&abs, &config.sim)?;
    let trajectory = outcome.trajectory.take().unwrap_or_default();
    if let Some(path) = traj {
        let mut f = create(path)?;
        write_trajectory_csv(&trajectory, &mut f)?;
    }
    let report = SimulateReport {
        scenario: config.relative(),
        dss: dss_relative(&config.relative(), &config.env)?.dss,
        outcome,
    };
    if cli.json {
        print_json(out, &report)?;
        return Ok(());
    }
    let o = &report.outcome;
    writeln!(out, "collided: {}", o.collided).map_err(io_err)?;
    if let Some(t) = o.collision_time {
        writeln!(out, "collision_time: {t:.4} s").map_err(io_err)?;
    }
    writeln!(
        out,
        "min_gap: {:.4} m at t = {:.4} s",
        o.min_gap, o.min_gap_time
    )
    .map_err(io_err)?;
    writeln!(out, "stop_time: {:.4} s", o.stop_time).map_err(io_err)?;
    writeln!(
        out,
        "final_gap: {:.4} m (DSS {:.4} m)",
        o.final_gap, report.dss
    )
    .map_err(io_err)?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub rng: String,
    pub dead_band: f64,
    pub summary: VerifySummary,
    pub passed: bool,
}

fn cmd_verify(
    cli: &Cli,
    samples: Option<usize>,
    dead_band: Option<f64>,
    out: &mut dyn Write,
) -> CmdResult {
    let config = load(cli)?;
    let n = samples.unwrap_or(config.samples);
    let dead_band = dead_band.unwrap_or(config.dead_band);
    let scenarios = random_scenarios(config.seed, n, &config.reaction, &config.ranges)?;
    let summary = verify_batch(&scenarios, &config.sim, dead_band)?;
    let report = VerifyReport {
        seed: config.seed,
        rng: RNG_ALGORITHM.into(),
        dead_band,
        passed: summary.passed(),
        summary,
    };
    if cli.json {
        print_json(out, &report)?;
    } else {
        let s = &report.summary;
        writeln!(
            out,
            "seed {}: {}/{} agree ({:.2}%), {} inside dead band {} m",
            report.seed,
            s.agreed,
            s.checked,
            100.0 * s.fraction,
            s.excluded,
            dead_band
        )
        .map_err(io_err)?;
        writeln!(
            out,
            "final gap vs DSS: {} checked, max error {:.3e} m, {} failures",
            s.gap_checked, s.max_gap_error, s.gap_failures
        )
        .map_err(io_err)?;
        if let Some(c) = &s.counterexample {
            let json = serde_json::to_string(c).map_err(|e| Error::Config(e.to_string()))?;
            writeln!(out, "counterexample: {json}").map_err(io_err)?;
        }
    }
    verify_status(&report.summary)
}

fn verify_status(s: &VerifySummary) -> CmdResult {
    if s.passed() {
        Ok(())
    } else {
        Err(CmdError::Exit(EXIT_DISAGREEMENT))
    }
}

fn parse_grid(spec: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("grid must look like NxM, got '{spec}'"));
    let (n, m) = spec.split_once(['x', 'X']).ok_or_else(bad)?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    let m: usize = m.trim().parse().map_err(|_| bad())?;
    if n == 0 || m == 0 {
        return Err(bad());
    }
    Ok((n, m))
}

fn parse_axes(spec: &str) -> Result<(Axis, Axis)> {
    let (a, b) = spec.split_once(',').ok_or_else(|| {
        Error::Config(format!(
            "--axis needs two names separated by ',', got '{spec}'"
        ))
    })?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn grid_axis(config: &Config, axis: Axis, points: usize) -> Result<GridAxis> {
    let [lo, hi] = match config.sweep_ranges.get(&axis) {
        Some(r) => *r,
        None => {
            let v = get_axis(&config.relative(), axis)?;
            let half = if v == 0.0 { 1.0 } else { 0.1 * v.abs() };
            [v - half, v + half]
        }
    };
    Ok(GridAxis {
        axis,
        lo,
        hi,
        points,
    })
}

fn cmd_sweep(
    cli: &Cli,
    axes: &str,
    grid: &str,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CmdResult {
    let config = load(cli)?;
    let (ax, ay) = parse_axes(axes)?;
    let (n, m) = parse_grid(grid)?;
    let result = sweep_grid(
        &config.relative(),
        &config.env,
        grid_axis(&config, ax, n)?,
        grid_axis(&config, ay, m)?,
        config.threshold,
    )?;

    if let Some(path) = &cli.out {
        let mut f = create(path)?;
        result.write_csv(&mut f)?;
        f.flush().map_err(io_err)?;
    }
    if cli.json {
        print_json(stdout, &result)?;
        return Ok(());
    }
    let summary: &mut dyn Write = if cli.out.is_some() {
        stdout
    } else {
        result.write_csv(&mut *stdout)?;
        stderr
    };
    let c = &result.coverage;
    writeln!(
        summary,
        "coverage: {}/{} relevant combinations",
        c.covered, c.total
    )
    .map_err(io_err)?;
    for combo in &c.combinations {
        writeln!(summary, "  {}: {}", combo.label, combo.hits).map_err(io_err)?;
    }
    Ok(())
}
