//! Batch front-end. Seven subcommands cover single runs, pulse-length and
//! frequency sweeps, the beta optimum search, the entangling-gate sweep,
//! and the sphere sampler. Values resolve as flags over config file over
//! defaults; config files are flat JSON objects whose keys mirror the flag
//! names, and unknown keys are rejected.
//!
//! Exit codes: 0 success, 2 usage or config error, 3 I/O error or empty
//! result, 4 numerical failure. `HOLONOMY_WORKERS` sets the default worker
//! count when no `--workers` flag or config key is present.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{
    self, find_beta_opt, frequency_grid, frequency_ratio_sweep, linear_grid, log_grid, sweep_beta,
    with_workers, FrequencyGridResult, GateRun, SweepKind, SweepResult,
};
use crate::gates::{catalog, GateParams, GateSpec};
use crate::model::DEFAULT_HALF_WIDTH;
use crate::sampling::fibonacci_nodes;
use crate::solver::IntegratorSettings;

#[derive(Parser)]
#[command(
    name = "holonomy",
    about = "Holonomic gate simulation on a dissipative four-level system",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one gate configuration and report its fidelity statistics.
    Simulate(SimulateArgs),
    /// Mean infidelity versus beta/f, with an RWA reference column.
    SweepBeta(SweepBetaArgs),
    /// Grid-search the beta/f minimizing mean infidelity.
    OptBeta(OptBetaArgs),
    /// Mean infidelity on an (f0e, f1e) grid, plus the per-column ridge.
    FreqGrid(FreqGridArgs),
    /// Mean infidelity versus the frequency ratio f1e/f0e.
    FreqRatio(FreqRatioArgs),
    /// Entangling-gate infidelity versus beta/f.
    CzSweep(CzSweepArgs),
    /// Emit the Fibonacci sphere lattice as CSV.
    SampleSphere(SampleSphereArgs),
}

/// Entry point used by the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Help and version land here too; clap picks exit 0 for those and
        // 2 for genuine usage errors.
        Err(err) => err.exit(),
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            exit_code(&err)
        }
    }
}

/// Maps an error to the documented exit code family.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter { .. } | Error::UnknownGate { .. } | Error::Config(_) => 2,
        Error::Io { .. } | Error::EmptyResult => 3,
        Error::SweepPoint { source, .. } => exit_code(source),
        _ => 4,
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => args.resolve()?.run(),
        Command::SweepBeta(args) => args.resolve()?.run(),
        Command::OptBeta(args) => args.resolve()?.run(),
        Command::FreqGrid(args) => args.resolve()?.run(),
        Command::FreqRatio(args) => args.resolve()?.run(),
        Command::CzSweep(args) => args.resolve()?.run(),
        Command::SampleSphere(args) => args.resolve()?.run(),
    }
}

fn load_file<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::io(format!("reading config {}", p.display()), e))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("config {}: {e}", p.display())))
        }
    }
}

fn resolve_workers(flag: Option<usize>, file: Option<usize>) -> Result<Option<usize>> {
    if let Some(w) = flag.or(file) {
        if w == 0 {
            return Err(Error::param("workers", "need at least one worker"));
        }
        return Ok(Some(w));
    }
    match std::env::var("HOLONOMY_WORKERS") {
        Ok(s) => {
            let w: usize = s
                .parse()
                .map_err(|_| Error::Config(format!("HOLONOMY_WORKERS={s:?} is not a count")))?;
            if w == 0 {
                return Err(Error::Config("HOLONOMY_WORKERS must be at least 1".into()));
            }
            Ok(Some(w))
        }
        Err(_) => Ok(None),
    }
}

/// Runs a closure in the requested pool, or inline when no count is set.
fn with_optional_workers<R: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> Result<R> + Send,
) -> Result<R> {
    match workers {
        Some(w) => with_workers(w, f)?,
        None => f(),
    }
}

fn resolve_gate(
    name: Option<&str>,
    theta: Option<f64>,
    phi: Option<f64>,
    phi_prime: Option<f64>,
) -> Result<GateSpec> {
    let name = name.ok_or_else(|| Error::param("gate", "required (flag --gate or config key)"))?;
    let mut params = GateParams::default();
    if let Some(t) = theta {
        params.theta = t;
        params.has_theta = true;
    }
    if let Some(p) = phi {
        params.phi = p;
        params.has_phi = true;
    }
    if let Some(p) = phi_prime {
        params.phi_prime = p;
        params.has_phi_prime = true;
    }
    catalog(name, &params)
}

fn integrator_settings(rel_tol: Option<f64>, abs_tol: Option<f64>) -> IntegratorSettings {
    let mut s = IntegratorSettings::default();
    if let Some(r) = rel_tol {
        s.rel_tol = r;
    }
    if let Some(a) = abs_tol {
        s.abs_tol = a;
    }
    s
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Gate name: X, NOT, H, Z, S, phase-shift, single-pulse, CZ.
    #[arg(long)]
    gate: Option<String>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    phi_prime: Option<f64>,
    /// Inverse pulse length over the drive frequency.
    #[arg(long)]
    beta_over_f: Option<f64>,
    /// Decay rate over the drive frequency.
    #[arg(long)]
    gamma_over_f: Option<f64>,
    /// Second drive frequency relative to the first.
    #[arg(long)]
    f1e_over_f0e: Option<f64>,
    /// Drop the counter-rotating terms.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    rwa: Option<bool>,
    /// Peak-to-next-window delay for two-loop gates, units of 1/beta.
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long)]
    n_states: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Write a one-row CSV instead of the stdout summary.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
struct SimulateFile {
    gate: Option<String>,
    theta: Option<f64>,
    phi: Option<f64>,
    phi_prime: Option<f64>,
    beta_over_f: Option<f64>,
    gamma_over_f: Option<f64>,
    f1e_over_f0e: Option<f64>,
    rwa: Option<bool>,
    spacing: Option<f64>,
    n_states: Option<usize>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    workers: Option<usize>,
}

struct SimulatePlan {
    run: GateRun,
    beta_over_f: f64,
    gamma_over_f: f64,
    n_states: usize,
    workers: Option<usize>,
    out: Option<PathBuf>,
}

impl SimulateArgs {
    fn resolve(self) -> Result<SimulatePlan> {
        let file: SimulateFile = load_file(self.config.as_deref())?;
        let gate = resolve_gate(
            self.gate.as_deref().or(file.gate.as_deref()),
            self.theta.or(file.theta),
            self.phi.or(file.phi),
            self.phi_prime.or(file.phi_prime),
        )?;
        let beta_over_f = self.beta_over_f.or(file.beta_over_f).unwrap_or(0.1);
        let gamma_over_f = self.gamma_over_f.or(file.gamma_over_f).unwrap_or(1e-3);
        let ratio = self.f1e_over_f0e.or(file.f1e_over_f0e).unwrap_or(1.0);
        if !(beta_over_f > 0.0) {
            return Err(Error::param("beta-over-f", "must be positive"));
        }
        if !(ratio > 0.0) {
            return Err(Error::param("f1e-over-f0e", "must be positive"));
        }
        let mut run = GateRun::new(gate);
        run.beta = beta_over_f;
        run.f0e = 1.0;
        run.f1e = ratio;
        run.gamma = gamma_over_f;
        run.rwa = self.rwa.or(file.rwa).unwrap_or(false);
        run.spacing = self.spacing.or(file.spacing).unwrap_or(DEFAULT_HALF_WIDTH);
        run.settings = integrator_settings(
            self.rel_tol.or(file.rel_tol),
            self.abs_tol.or(file.abs_tol),
        );
        Ok(SimulatePlan {
            run,
            beta_over_f,
            gamma_over_f,
            n_states: self.n_states.or(file.n_states).unwrap_or(100),
            workers: resolve_workers(self.workers, file.workers)?,
            out: self.out,
        })
    }
}

impl SimulatePlan {
    fn run(self) -> Result<()> {
        let stats = with_optional_workers(self.workers, || {
            experiments::average_fidelity(&self.run, self.n_states)
        })?;
        match &self.out {
            Some(path) => {
                let header = "beta_over_f,gamma_over_f,mean_inf,min_inf,max_inf";
                let row = format!(
                    "{},{},{},{},{}",
                    fmt_sci(self.beta_over_f),
                    fmt_sci(self.gamma_over_f),
                    fmt_sci(stats.mean_infidelity()),
                    fmt_sci(stats.min_infidelity()),
                    fmt_sci(stats.max_infidelity()),
                );
                write_lines(Some(path), header, &[row])
            }
            None => {
                println!(
                    "mean fidelity {:.9} (min {:.9}, max {:.9}) over {} input states",
                    stats.mean, stats.min, stats.max, stats.n_states
                );
                println!("mean infidelity {}", fmt_sci(stats.mean_infidelity()));
                Ok(())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// sweep-beta / cz-sweep (shared runner)

#[derive(Args)]
struct SweepBetaArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gate: Option<String>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    phi_prime: Option<f64>,
    /// Decay ratio; repeat the flag for several curves.
    #[arg(long, action = ArgAction::Append)]
    gamma_over_fi: Vec<f64>,
    #[arg(long)]
    beta_min: Option<f64>,
    #[arg(long)]
    beta_max: Option<f64>,
    /// Log-spaced points on [beta-min, beta-max].
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    n_states: Option<usize>,
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Line plot of the sweep (log axes where the grid is log-spaced).
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
struct SweepBetaFile {
    gate: Option<String>,
    theta: Option<f64>,
    phi: Option<f64>,
    phi_prime: Option<f64>,
    gamma_over_fi: Option<Vec<f64>>,
    beta_min: Option<f64>,
    beta_max: Option<f64>,
    points: Option<usize>,
    n_states: Option<usize>,
    spacing: Option<f64>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    workers: Option<usize>,
}

struct SweepBetaPlan {
    template: GateRun,
    gammas: Vec<f64>,
    betas: Vec<f64>,
    n_states: usize,
    workers: Option<usize>,
    out: Option<PathBuf>,
    svg: Option<PathBuf>,
}

impl SweepBetaArgs {
    fn resolve(self) -> Result<SweepBetaPlan> {
        let file: SweepBetaFile = load_file(self.config.as_deref())?;
        let gate = resolve_gate(
            self.gate.as_deref().or(file.gate.as_deref()),
            self.theta.or(file.theta),
            self.phi.or(file.phi),
            self.phi_prime.or(file.phi_prime),
        )?;
        resolve_beta_sweep(
            gate,
            self.gamma_over_fi,
            file.gamma_over_fi,
            self.beta_min.or(file.beta_min),
            self.beta_max.or(file.beta_max),
            self.points.or(file.points).unwrap_or(40),
            self.n_states.or(file.n_states).unwrap_or(100),
            self.spacing.or(file.spacing),
            integrator_settings(self.rel_tol.or(file.rel_tol), self.abs_tol.or(file.abs_tol)),
            resolve_workers(self.workers, file.workers)?,
            self.out,
            self.svg,
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn resolve_beta_sweep(
    gate: GateSpec,
    gammas_flag: Vec<f64>,
    gammas_file: Option<Vec<f64>>,
    beta_min: Option<f64>,
    beta_max: Option<f64>,
    points: usize,
    n_states: usize,
    spacing: Option<f64>,
    settings: IntegratorSettings,
    workers: Option<usize>,
    out: Option<PathBuf>,
    svg: Option<PathBuf>,
) -> Result<SweepBetaPlan> {
    let gammas = if gammas_flag.is_empty() {
        gammas_file.unwrap_or_else(|| vec![1e-3])
    } else {
        gammas_flag
    };
    for &g in &gammas {
        if !(g >= 0.0) || !g.is_finite() {
            return Err(Error::param(
                "gamma-over-fi",
                format!("must be non-negative, got {g}"),
            ));
        }
    }
    let lo = beta_min.unwrap_or(1e-2);
    let hi = beta_max.unwrap_or(1.0);
    let betas = log_grid(lo, hi, points)?;
    let mut template = GateRun::new(gate);
    template.spacing = spacing.unwrap_or(DEFAULT_HALF_WIDTH);
    template.settings = settings;
    Ok(SweepBetaPlan {
        template,
        gammas,
        betas,
        n_states,
        workers,
        out,
        svg,
    })
}

impl SweepBetaPlan {
    fn run(self) -> Result<()> {
        let result = with_optional_workers(self.workers, || {
            sweep_beta(&self.template, &self.gammas, &self.betas, self.n_states)
        })?;
        emit_csv(&result, self.out.as_deref())?;
        if let Some(svg) = &self.svg {
            emit_svg(&result, svg)?;
        }
        Ok(())
    }
}

#[derive(Args)]
struct CzSweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Mixing angle of the two-qubit holonomy (0 gives CZ).
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long, action = ArgAction::Append)]
    gamma_over_fi: Vec<f64>,
    #[arg(long)]
    beta_min: Option<f64>,
    #[arg(long)]
    beta_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
struct CzSweepFile {
    theta: Option<f64>,
    phi: Option<f64>,
    gamma_over_fi: Option<Vec<f64>>,
    beta_min: Option<f64>,
    beta_max: Option<f64>,
    points: Option<usize>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    workers: Option<usize>,
}

impl CzSweepArgs {
    fn resolve(self) -> Result<SweepBetaPlan> {
        let file: CzSweepFile = load_file(self.config.as_deref())?;
        let gate = GateSpec::TwoQubit {
            theta: self.theta.or(file.theta).unwrap_or(0.0),
            phi: self.phi.or(file.phi).unwrap_or(0.0),
        };
        resolve_beta_sweep(
            gate,
            self.gamma_over_fi,
            file.gamma_over_fi,
            self.beta_min.or(file.beta_min),
            self.beta_max.or(file.beta_max),
            self.points.or(file.points).unwrap_or(15),
            // The two-qubit ensemble is the fixed four-state product set.
            4,
            None,
            integrator_settings(self.rel_tol.or(file.rel_tol), self.abs_tol.or(file.abs_tol)),
            resolve_workers(self.workers, file.workers)?,
            self.out,
            self.svg,
        )
    }
}

// ---------------------------------------------------------------------------
// opt-beta

#[derive(Args)]
struct OptBetaArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gate: Option<String>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    phi_prime: Option<f64>,
    /// Decay ratio; repeat for one optimum per value.
    #[arg(long, action = ArgAction::Append)]
    gamma_over_fi: Vec<f64>,
    #[arg(long)]
    beta_min: Option<f64>,
    #[arg(long)]
    beta_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    n_states: Option<usize>,
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
struct OptBetaFile {
    gate: Option<String>,
    theta: Option<f64>,
    phi: Option<f64>,
    phi_prime: Option<f64>,
    gamma_over_fi: Option<Vec<f64>>,
    beta_min: Option<f64>,
    beta_max: Option<f64>,
    points: Option<usize>,
    n_states: Option<usize>,
    spacing: Option<f64>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    workers: Option<usize>,
}

struct OptBetaPlan {
    template: GateRun,
    gammas: Vec<f64>,
    interval: (f64, f64),
    points: usize,
    n_states: usize,
    workers: Option<usize>,
    out: Option<PathBuf>,
}

impl OptBetaArgs {
    fn resolve(self) -> Result<OptBetaPlan> {
        let file: OptBetaFile = load_file(self.config.as_deref())?;
        let gate = resolve_gate(
            self.gate.as_deref().or(file.gate.as_deref()),
            self.theta.or(file.theta),
            self.phi.or(file.phi),
            self.phi_prime.or(file.phi_prime),
        )?;
        let gammas = if self.gamma_over_fi.is_empty() {
            file.gamma_over_fi.unwrap_or_else(|| vec![1e-3])
        } else {
            self.gamma_over_fi
        };
        let mut template = GateRun::new(gate);
        template.spacing = self.spacing.or(file.spacing).unwrap_or(DEFAULT_HALF_WIDTH);
        template.settings =
            integrator_settings(self.rel_tol.or(file.rel_tol), self.abs_tol.or(file.abs_tol));
        Ok(OptBetaPlan {
            template,
            gammas,
            interval: (
                self.beta_min.or(file.beta_min).unwrap_or(0.03),
                self.beta_max.or(file.beta_max).unwrap_or(0.3),
            ),
            points: self.points.or(file.points).unwrap_or(60),
            n_states: self.n_states.or(file.n_states).unwrap_or(100),
            workers: resolve_workers(self.workers, file.workers)?,
            out: self.out,
        })
    }
}

impl OptBetaPlan {
    fn run(self) -> Result<()> {
        let rows = with_optional_workers(self.workers, || {
            let mut rows = Vec::with_capacity(self.gammas.len());
            for &gamma in &self.gammas {
                let (beta_opt, infidelity) = find_beta_opt(
                    &self.template,
                    gamma,
                    self.interval,
                    self.points,
                    self.n_states,
                )?;
                rows.push(format!(
                    "{},{},{}",
                    fmt_sci(gamma),
                    fmt_sci(beta_opt),
                    fmt_sci(infidelity)
                ));
            }
            Ok(rows)
        })?;
        write_lines(
            self.out.as_deref(),
            "gamma_over_fi,beta_opt_over_fi,mean_inf",
            &rows,
        )
    }
}

// ---------------------------------------------------------------------------
// freq-grid

#[derive(Args)]
struct FreqGridArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gate: Option<String>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    phi_prime: Option<f64>,
    /// Lower edge of both frequency axes, in units of beta.
    #[arg(long)]
    f_min: Option<f64>,
    #[arg(long)]
    f_max: Option<f64>,
    /// Points per axis (the grid is points x points).
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    gamma_over_beta: Option<f64>,
    #[arg(long)]
    n_states: Option<usize>,
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the per-column minimum curve.
    #[arg(long)]
    ridge_out: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
struct FreqGridFile {
    gate: Option<String>,
    theta: Option<f64>,
    phi: Option<f64>,
    phi_prime: Option<f64>,
    f_min: Option<f64>,
    f_max: Option<f64>,
    points: Option<usize>,
    gamma_over_beta: Option<f64>,
    n_states: Option<usize>,
    spacing: Option<f64>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    workers: Option<usize>,
}

struct FreqGridPlan {
    template: GateRun,
    axis: Vec<f64>,
    gamma_over_beta: f64,
    n_states: usize,
    workers: Option<usize>,
    out: Option<PathBuf>,
    ridge_out: Option<PathBuf>,
}

impl FreqGridArgs {
    fn resolve(self) -> Result<FreqGridPlan> {
        let file: FreqGridFile = load_file(self.config.as_deref())?;
        let gate = resolve_gate(
            self.gate.as_deref().or(file.gate.as_deref()),
            self.theta.or(file.theta),
            self.phi.or(file.phi),
            self.phi_prime.or(file.phi_prime),
        )?;
        let lo = self.f_min.or(file.f_min).unwrap_or(2.0);
        let hi = self.f_max.or(file.f_max).unwrap_or(20.0);
        let points = self.points.or(file.points).unwrap_or(30);
        let axis = linear_grid(lo, hi, points)?;
        let gamma = self.gamma_over_beta.or(file.gamma_over_beta).unwrap_or(0.02);
        let mut template = GateRun::new(gate);
        template.spacing = self.spacing.or(file.spacing).unwrap_or(DEFAULT_HALF_WIDTH);
        template.settings =
            integrator_settings(self.rel_tol.or(file.rel_tol), self.abs_tol.or(file.abs_tol));
        Ok(FreqGridPlan {
            template,
            axis,
            gamma_over_beta: gamma,
            n_states: self.n_states.or(file.n_states).unwrap_or(100),
            workers: resolve_workers(self.workers, file.workers)?,
            out: self.out,
            ridge_out: self.ridge_out,
        })
    }
}

impl FreqGridPlan {
    fn run(self) -> Result<()> {
        let FrequencyGridResult { sweep, ridge } = with_optional_workers(self.workers, || {
            frequency_grid(
                &self.template,
                &self.axis,
                &self.axis,
                self.gamma_over_beta,
                self.n_states,
            )
        })?;
        emit_csv(&sweep, self.out.as_deref())?;
        if let Some(path) = &self.ridge_out {
            let rows: Vec<String> = ridge
                .iter()
                .map(|r| {
                    format!(
                        "{},{},{}",
                        fmt_sci(r.f0e_over_beta),
                        fmt_sci(r.f1e_opt_over_beta),
                        fmt_sci(r.mean_infidelity)
                    )
                })
                .collect();
            write_lines(
                Some(path),
                "f0e_over_beta,f1e_opt_over_beta,mean_inf",
                &rows,
            )?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// freq-ratio

#[derive(Args)]
struct FreqRatioArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gate: Option<String>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    phi_prime: Option<f64>,
    #[arg(long)]
    ratio_min: Option<f64>,
    #[arg(long)]
    ratio_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    f0e_over_beta: Option<f64>,
    #[arg(long)]
    gamma_over_beta: Option<f64>,
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long)]
    n_states: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
struct FreqRatioFile {
    gate: Option<String>,
    theta: Option<f64>,
    phi: Option<f64>,
    phi_prime: Option<f64>,
    ratio_min: Option<f64>,
    ratio_max: Option<f64>,
    points: Option<usize>,
    f0e_over_beta: Option<f64>,
    gamma_over_beta: Option<f64>,
    spacing: Option<f64>,
    n_states: Option<usize>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    workers: Option<usize>,
}

struct FreqRatioPlan {
    template: GateRun,
    ratios: Vec<f64>,
    f0e_over_beta: f64,
    gamma_over_beta: f64,
    spacing: f64,
    n_states: usize,
    workers: Option<usize>,
    out: Option<PathBuf>,
    svg: Option<PathBuf>,
}

impl FreqRatioArgs {
    fn resolve(self) -> Result<FreqRatioPlan> {
        let file: FreqRatioFile = load_file(self.config.as_deref())?;
        let gate = resolve_gate(
            self.gate.as_deref().or(file.gate.as_deref()),
            self.theta.or(file.theta),
            self.phi.or(file.phi),
            self.phi_prime.or(file.phi_prime),
        )?;
        let lo = self.ratio_min.or(file.ratio_min).unwrap_or(0.5);
        let hi = self.ratio_max.or(file.ratio_max).unwrap_or(1.5);
        let points = self.points.or(file.points).unwrap_or(50);
        let ratios = linear_grid(lo, hi, points)?;
        let mut template = GateRun::new(gate);
        template.settings =
            integrator_settings(self.rel_tol.or(file.rel_tol), self.abs_tol.or(file.abs_tol));
        Ok(FreqRatioPlan {
            template,
            ratios,
            f0e_over_beta: self.f0e_over_beta.or(file.f0e_over_beta).unwrap_or(10.0),
            gamma_over_beta: self.gamma_over_beta.or(file.gamma_over_beta).unwrap_or(1e-3),
            // Pulse pairs sit 10/beta apart by default in this study.
            spacing: self.spacing.or(file.spacing).unwrap_or(2.0 * DEFAULT_HALF_WIDTH),
            n_states: self.n_states.or(file.n_states).unwrap_or(100),
            workers: resolve_workers(self.workers, file.workers)?,
            out: self.out,
            svg: self.svg,
        })
    }
}

impl FreqRatioPlan {
    fn run(self) -> Result<()> {
        let result = with_optional_workers(self.workers, || {
            frequency_ratio_sweep(
                &self.template,
                &self.ratios,
                self.f0e_over_beta,
                self.gamma_over_beta,
                self.spacing,
                self.n_states,
            )
        })?;
        emit_csv(&result, self.out.as_deref())?;
        if let Some(svg) = &self.svg {
            emit_svg(&result, svg)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// sample-sphere

#[derive(Args)]
struct SampleSphereArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of lattice nodes.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
struct SampleSphereFile {
    n: Option<usize>,
}

struct SampleSpherePlan {
    n: usize,
    out: Option<PathBuf>,
}

impl SampleSphereArgs {
    fn resolve(self) -> Result<SampleSpherePlan> {
        let file: SampleSphereFile = load_file(self.config.as_deref())?;
        Ok(SampleSpherePlan {
            n: self.n.or(file.n).unwrap_or(100),
            out: self.out,
        })
    }
}

impl SampleSpherePlan {
    fn run(self) -> Result<()> {
        let nodes = fibonacci_nodes(self.n)?;
        let rows: Vec<String> = nodes
            .iter()
            .map(|p| format!("{},{},{}", fmt_sci(p.x), fmt_sci(p.y), fmt_sci(p.z)))
            .collect();
        write_lines(self.out.as_deref(), "x,y,z", &rows)
    }
}

// ---------------------------------------------------------------------------
// output

/// Scientific notation with a dotted mantissa and a round-trippable
/// mantissa length: 0.1 prints as 1.0e-1.
pub fn fmt_sci(v: f64) -> String {
    let s = format!("{v:e}");
    match s.find('e') {
        Some(pos) if !s[..pos].contains('.') => format!("{}.0{}", &s[..pos], &s[pos..]),
        _ => s,
    }
}

fn write_lines(path: Option<&Path>, header: &str, rows: &[String]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyResult);
    }
    let mut text = String::with_capacity((rows.len() + 1) * 48);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::io(format!("writing {}", p.display()), e)),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .map_err(|e| Error::io("writing to stdout", e))
        }
    }
}

/// Writes a sweep as CSV with the column layout fixed by its kind.
pub fn emit_csv(result: &SweepResult, path: Option<&Path>) -> Result<()> {
    let header = match result.kind {
        SweepKind::Beta => "beta_over_fi,gamma_over_fi,mean_inf,min_inf,max_inf,rwa_mean_inf",
        SweepKind::Ratio => "f1e_over_f0e,gamma_over_beta,mean_inf,min_inf,max_inf,rwa_mean_inf",
        SweepKind::FrequencyGrid => "f0e_over_beta,f1e_over_beta,mean_inf",
    };
    let mut rows = Vec::with_capacity(result.points.len());
    for p in &result.points {
        let row = match result.kind {
            SweepKind::FrequencyGrid => format!(
                "{},{},{}",
                fmt_sci(p.x),
                fmt_sci(p.y),
                fmt_sci(p.stats.mean_infidelity())
            ),
            _ => {
                let rwa = p.rwa.ok_or_else(|| {
                    Error::Config("sweep point is missing its RWA companion".into())
                })?;
                format!(
                    "{},{},{},{},{},{}",
                    fmt_sci(p.x),
                    fmt_sci(p.y),
                    fmt_sci(p.stats.mean_infidelity()),
                    fmt_sci(p.stats.min_infidelity()),
                    fmt_sci(p.stats.max_infidelity()),
                    fmt_sci(rwa.mean_infidelity())
                )
            }
        };
        rows.push(row);
    }
    write_lines(path, header, &rows)
}

/// Renders a 1-D sweep as a standalone SVG: one polyline per series (full
/// model solid, RWA companion dashed), log axes where the data calls for
/// them. Grids are not plottable here and are rejected.
pub fn emit_svg(result: &SweepResult, path: &Path) -> Result<()> {
    if result.kind == SweepKind::FrequencyGrid {
        return Err(Error::param(
            "svg",
            "frequency grids export CSV only; plot a 1-D sweep instead",
        ));
    }
    if result.points.is_empty() {
        return Err(Error::EmptyResult);
    }
    // One series per distinct y (decay ratio), in first-seen order.
    let mut series: Vec<(f64, Vec<&crate::experiments::SweepPoint>)> = Vec::new();
    for p in &result.points {
        match series.iter_mut().find(|(y, _)| *y == p.y) {
            Some((_, v)) => v.push(p),
            None => series.push((p.y, vec![p])),
        }
    }
    let xs: Vec<f64> = series[0].1.iter().map(|p| p.x).collect();
    let log_x = is_log_spaced(&xs);
    let mut values: Vec<f64> = Vec::new();
    for p in &result.points {
        values.push(p.stats.mean_infidelity());
        if let Some(r) = p.rwa {
            values.push(r.mean_infidelity());
        }
    }
    let log_y = values.iter().all(|&v| v > 0.0);
    let (x_lo, x_hi) = bounds(&xs);
    let (y_lo, y_hi) = bounds(&values);

    let (width, height) = (640.0, 480.0);
    let (ml, mr, mt, mb) = (80.0, 20.0, 20.0, 60.0);
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let sx = move |x: f64| {
        let (a, b) = (tx(x_lo), tx(x_hi));
        let f = if b > a { (tx(x) - a) / (b - a) } else { 0.5 };
        ml + f * (width - ml - mr)
    };
    let sy = move |y: f64| {
        let (a, b) = (ty(y_lo), ty(y_hi));
        let f = if b > a { (ty(y) - a) / (b - a) } else { 0.5 };
        height - mb - f * (height - mt - mb)
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"black\"/>\n",
        y = height - mb,
        x2 = width - mr
    ));
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{y2}\" stroke=\"black\"/>\n",
        y2 = height - mb
    ));
    // Ticks.
    for (t, label) in ticks(x_lo, x_hi, log_x) {
        let px = sx(t);
        svg.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{y1}\" x2=\"{px:.2}\" y2=\"{y2}\" stroke=\"black\"/>\n",
            y1 = height - mb,
            y2 = height - mb + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px:.2}\" y=\"{y}\" text-anchor=\"middle\">{label}</text>\n",
            y = height - mb + 20.0
        ));
    }
    for (t, label) in ticks(y_lo, y_hi, log_y) {
        let py = sy(t);
        svg.push_str(&format!(
            "<line x1=\"{x1}\" y1=\"{py:.2}\" x2=\"{ml}\" y2=\"{py:.2}\" stroke=\"black\"/>\n",
            x1 = ml - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{py:.2}\" text-anchor=\"end\" dy=\"4\">{label}</text>\n",
            x = ml - 8.0
        ));
    }
    // Axis labels.
    let x_label = match result.kind {
        SweepKind::Beta => "beta / f",
        SweepKind::Ratio => "f1e / f0e",
        SweepKind::FrequencyGrid => unreachable!("rejected above"),
    };
    svg.push_str(&format!(
        "<text x=\"{x:.2}\" y=\"{y}\" text-anchor=\"middle\">{x_label}</text>\n",
        x = ml + 0.5 * (width - ml - mr),
        y = height - 15.0
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{y:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {y:.2})\">mean infidelity</text>\n",
        y = mt + 0.5 * (height - mt - mb)
    ));
    // Series.
    const COLORS: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
    ];
    for (i, (y_val, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let line: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.2},{:.2}", sx(p.x), sy(p.stats.mean_infidelity())))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            line.join(" ")
        ));
        if pts.iter().all(|p| p.rwa.is_some()) {
            let line: Vec<String> = pts
                .iter()
                .map(|p| {
                    format!(
                        "{:.2},{:.2}",
                        sx(p.x),
                        sy(p.rwa.expect("checked above").mean_infidelity())
                    )
                })
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" \
                 stroke-dasharray=\"5 3\" points=\"{}\"/>\n",
                line.join(" ")
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y:.2}\" fill=\"{color}\">series y = {label}</text>\n",
            x = width - mr - 150.0,
            y = mt + 16.0 * (i + 1) as f64,
            label = fmt_sci(*y_val),
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// A grid is treated as log-spaced when consecutive ratios are constant to
/// one part in 1e-6.
fn is_log_spaced(xs: &[f64]) -> bool {
    if xs.len() < 3 || xs.iter().any(|&x| !(x > 0.0)) {
        return false;
    }
    let ratios: Vec<f64> = xs.windows(2).map(|w| w[1] / w[0]).collect();
    let (lo, hi) = bounds(&ratios);
    hi - lo <= 1e-6 * hi.abs()
}

fn ticks(lo: f64, hi: f64, log: bool) -> Vec<(f64, String)> {
    if !(hi > lo) {
        return vec![(lo, fmt_sci(lo))];
    }
    if log {
        // One tick per decade inside the range.
        let first = lo.log10().ceil() as i32;
        let last = hi.log10().floor() as i32;
        let mut out = Vec::new();
        for k in first..=last {
            out.push((10f64.powi(k), format!("1e{k}")));
        }
        if out.is_empty() {
            out.push((lo, fmt_sci(lo)));
            out.push((hi, fmt_sci(hi)));
        }
        out
    } else {
        (0..5)
            .map(|i| {
                let t = lo + (hi - lo) * i as f64 / 4.0;
                (t, format!("{t:.3}"))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{FidelityStats, SweepPoint};

    fn stats(mean: f64) -> FidelityStats {
        FidelityStats {
            mean,
            min: mean - 1e-3,
            max: (mean + 1e-3).min(1.0),
            n_states: 4,
        }
    }

    fn beta_sweep() -> SweepResult {
        SweepResult {
            kind: SweepKind::Beta,
            points: vec![
                SweepPoint {
                    x: 0.01,
                    y: 1e-3,
                    stats: stats(0.9),
                    rwa: Some(stats(0.91)),
                },
                SweepPoint {
                    x: 0.1,
                    y: 1e-3,
                    stats: stats(0.99),
                    rwa: Some(stats(0.995)),
                },
            ],
        }
    }

    #[test]
    fn sci_format_examples() {
        assert_eq!(fmt_sci(0.1), "1.0e-1");
        assert_eq!(fmt_sci(1e-3), "1.0e-3");
        assert_eq!(fmt_sci(0.0), "0.0e0");
        assert_eq!(fmt_sci(-0.25), "-2.5e-1");
        assert_eq!(fmt_sci(1.2345e-7), "1.2345e-7");
        // Round trip through parse.
        for v in [0.1, 1.0 / 3.0, 2.5e-17, -9.99e4] {
            assert_eq!(fmt_sci(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_layout_matches_kind() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        emit_csv(&beta_sweep(), Some(&path)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "beta_over_fi,gamma_over_fi,mean_inf,min_inf,max_inf,rwa_mean_inf"
        );
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1.0e-2,1.0e-3,"));
        assert_eq!(lines[1].split(',').count(), 6);
        // Written twice, byte-identical.
        let again = dir.path().join("sweep2.csv");
        emit_csv(&beta_sweep(), Some(&again)).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }

    #[test]
    fn empty_sweep_is_an_error() {
        let empty = SweepResult {
            kind: SweepKind::Beta,
            points: vec![],
        };
        assert!(matches!(emit_csv(&empty, None), Err(Error::EmptyResult)));
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.svg");
        emit_svg(&beta_sweep(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        // One full + one RWA polyline for the single gamma series.
        assert_eq!(text.matches("<polyline").count(), 2);
        assert!(text.contains("beta / f"));
        assert!(text.contains("mean infidelity"));
        // Deterministic bytes.
        let again = dir.path().join("sweep2.svg");
        emit_svg(&beta_sweep(), &again).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }

    #[test]
    fn svg_rejects_grids() {
        let grid = SweepResult {
            kind: SweepKind::FrequencyGrid,
            points: vec![SweepPoint {
                x: 5.0,
                y: 5.0,
                stats: stats(0.9),
                rwa: None,
            }],
        };
        let err = emit_svg(&grid, Path::new("/nonexistent/grid.svg")).unwrap_err();
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn log_spacing_detection() {
        assert!(is_log_spaced(&[0.01, 0.1, 1.0]));
        assert!(!is_log_spaced(&[0.1, 0.2, 0.3]));
        assert!(!is_log_spaced(&[0.1, 0.2])); // too short to tell
        assert!(!is_log_spaced(&[-1.0, 1.0, 10.0]));
    }

    #[test]
    fn config_file_merging_and_rejection() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(
            &path,
            r#"{"gate": "S", "beta-min": 0.05, "points": 7, "gamma-over-fi": [1e-4]}"#,
        )
        .unwrap();
        let file: SweepBetaFile = load_file(Some(&path)).unwrap();
        assert_eq!(file.gate.as_deref(), Some("S"));
        assert_eq!(file.beta_min, Some(0.05));
        assert_eq!(file.points, Some(7));
        assert_eq!(file.gamma_over_fi, Some(vec![1e-4]));

        // Unknown keys are named in the error.
        std::fs::write(&path, r#"{"gate": "S", "bogus-key": 1}"#).unwrap();
        let err = load_file::<SweepBetaFile>(Some(&path)).unwrap_err();
        assert_eq!(exit_code(&err), 2);
        assert!(err.to_string().contains("bogus-key"), "{err}");

        // Missing file is an I/O error.
        let err = load_file::<SweepBetaFile>(Some(Path::new("/no/such/file.json"))).unwrap_err();
        assert_eq!(exit_code(&err), 3);
    }

    #[test]
    fn defaults_round_trip_through_json() {
        // Serializing a fully populated config and parsing it back yields
        // the same resolved plan as the original.
        let file = SweepBetaFile {
            gate: Some("S".into()),
            theta: None,
            phi: None,
            phi_prime: None,
            gamma_over_fi: Some(vec![1e-3]),
            beta_min: Some(1e-2),
            beta_max: Some(1.0),
            points: Some(40),
            n_states: Some(100),
            spacing: Some(10.0),
            rel_tol: Some(1e-9),
            abs_tol: Some(1e-11),
            workers: None,
        };
        let text = serde_json::to_string(&file).unwrap();
        let parsed: SweepBetaFile = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, file);
    }

    #[test]
    fn gate_resolution_and_exit_codes() {
        assert!(resolve_gate(None, None, None, None).is_err());
        assert!(resolve_gate(Some("warp"), None, None, None).is_err());
        let err = resolve_gate(Some("warp"), None, None, None).unwrap_err();
        assert_eq!(exit_code(&err), 2);
        assert_eq!(exit_code(&Error::EmptyResult), 3);
        assert_eq!(
            exit_code(&Error::StepUnderflow {
                t: 0.0,
                step: 0.0,
                floor: 0.0
            }),
            4
        );
        let nested = Error::SweepPoint {
            index: 3,
            source: Box::new(Error::StepUnderflow {
                t: 0.0,
                step: 0.0,
                floor: 0.0,
            }),
        };
        assert_eq!(exit_code(&nested), 4);
        // Gate params flow through to the spec.
        let spec = resolve_gate(Some("single-pulse"), Some(0.7), Some(0.2), None).unwrap();
        assert!(matches!(spec, GateSpec::SingleLoop(_)));
    }

    #[test]
    fn workers_resolution_precedence() {
        // Flag beats file; zero is rejected.
        assert_eq!(resolve_workers(Some(3), Some(5)).unwrap(), Some(3));
        assert_eq!(resolve_workers(None, Some(5)).unwrap(), Some(5));
        assert!(resolve_workers(Some(0), None).is_err());
    }
}
