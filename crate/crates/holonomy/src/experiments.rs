//! Gate-quality studies: sphere-averaged fidelity, pulse-length and
//! frequency sweeps, and the grid search for the best inverse pulse
//! length.
//!
//! Everything here is expressed in dimensionless ratios; the master
//! equation is scale invariant, so only beta/f, gamma/f and spacing*beta
//! matter. Pulse-length sweeps pin the drive frequency to 1 and move beta;
//! frequency sweeps pin beta to 1 and move f0e, f1e. Sweep points are
//! evaluated concurrently with [`parallel_map`], whose output order and
//! values do not depend on the worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gates::GateSpec;
use crate::linalg::ComplexMatrix;
use crate::model::{DriveConfig, PulseSequence, PulseShape, TwoQubitConfig, DEFAULT_HALF_WIDTH};
use crate::sampling::{bloch_to_state, fibonacci_nodes, two_qubit_inputs};
use crate::solver::{run_single_qubit, run_two_qubit, DensityMatrix, IntegratorSettings};

/// Summary of gate fidelities over an input ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub n_states: usize,
}

impl FidelityStats {
    pub fn from_fidelities(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyResult);
        }
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for &v in values {
            min = min.min(v);
            max = max.max(v);
            sum += v;
        }
        Ok(FidelityStats {
            mean: sum / values.len() as f64,
            min,
            max,
            n_states: values.len(),
        })
    }

    pub fn mean_infidelity(&self) -> f64 {
        1.0 - self.mean
    }

    /// Smallest infidelity comes from the largest fidelity.
    pub fn min_infidelity(&self) -> f64 {
        1.0 - self.max
    }

    pub fn max_infidelity(&self) -> f64 {
        1.0 - self.min
    }
}

/// A fully specified protocol run: gate, pulse scale, drive frequencies,
/// decay rate, and integrator settings. Sweeps use one of these as a
/// template and overwrite the swept fields point by point.
#[derive(Debug, Clone)]
pub struct GateRun {
    pub gate: GateSpec,
    pub beta: f64,
    pub f0e: f64,
    pub f1e: f64,
    pub gamma: f64,
    pub rwa: bool,
    /// Delay from a pulse peak to the opening of the next window, in units
    /// of 1/beta; the default 10 makes consecutive windows abut.
    pub spacing: f64,
    pub settings: IntegratorSettings,
}

impl GateRun {
    pub fn new(gate: GateSpec) -> Self {
        GateRun {
            gate,
            beta: 1.0,
            f0e: 10.0,
            f1e: 10.0,
            gamma: 0.0,
            rwa: false,
            spacing: DEFAULT_HALF_WIDTH,
            settings: IntegratorSettings::default(),
        }
    }

    pub fn drive(&self) -> Result<DriveConfig> {
        DriveConfig::new(self.f0e, self.f1e, self.gamma, self.rwa)
    }

    pub fn sequence(&self) -> Result<PulseSequence> {
        match &self.gate {
            GateSpec::SingleLoop(l) => Ok(PulseSequence::single_loop(*l, self.beta)),
            GateSpec::DoubleLoop(a, b) => {
                PulseSequence::two_loop(*a, *b, self.beta, self.spacing / self.beta)
            }
            GateSpec::TwoQubit { .. } => Err(Error::param(
                "gate",
                "two-qubit gates use a TwoQubitConfig, not a pulse sequence",
            )),
        }
    }

    pub fn two_qubit_config(&self) -> Result<TwoQubitConfig> {
        match &self.gate {
            GateSpec::TwoQubit { theta, phi } => TwoQubitConfig::new(
                *theta,
                *phi,
                self.f0e,
                self.f1e,
                self.gamma,
                PulseShape::new(self.beta),
                self.rwa,
            ),
            _ => Err(Error::param(
                "gate",
                "single-qubit gates use a pulse sequence, not a TwoQubitConfig",
            )),
        }
    }

    /// Propagates one pure input state through the whole protocol.
    pub fn run_state(&self, psi0: &ComplexMatrix) -> Result<DensityMatrix> {
        let rho0 = DensityMatrix::from_pure(psi0)?;
        if self.gate.is_two_qubit() {
            run_two_qubit(&rho0, &self.two_qubit_config()?, &self.settings)
        } else {
            run_single_qubit(&rho0, &self.sequence()?, &self.drive()?, &self.settings)
        }
    }

    /// Input ensemble matching the gate arity: n Fibonacci-lattice states
    /// for one qubit, the four (|0> +- |1>) products for two (n is ignored
    /// there; entangling fidelity is probed on the fixed product set).
    pub fn input_states(&self, n_states: usize) -> Result<Vec<ComplexMatrix>> {
        if self.gate.is_two_qubit() {
            Ok(two_qubit_inputs())
        } else {
            single_qubit_inputs(n_states)
        }
    }
}

/// Fibonacci-lattice pure states embedded in the four-level space.
pub fn single_qubit_inputs(n: usize) -> Result<Vec<ComplexMatrix>> {
    Ok(fibonacci_nodes(n)?.iter().map(bloch_to_state).collect())
}

/// Fidelity of a final state against the ideal gate applied to the input:
/// Re <psi0| U^H rho U |psi0>, clamped to [0, 1 + 1e-9]. Global phases of
/// U drop out.
pub fn gate_fidelity(
    rho_final: &DensityMatrix,
    ideal: &ComplexMatrix,
    psi0: &ComplexMatrix,
) -> Result<f64> {
    if ideal.rows() != rho_final.dim() || ideal.cols() != rho_final.dim() {
        return Err(Error::DimensionMismatch {
            op: "gate_fidelity",
            left_rows: rho_final.dim(),
            left_cols: rho_final.dim(),
            right_rows: ideal.rows(),
            right_cols: ideal.cols(),
        });
    }
    let target = ideal.matmul(psi0)?;
    let overlap = target
        .adjoint()
        .matmul(rho_final.matrix())?
        .matmul(&target)?[(0, 0)];
    Ok(overlap.re.clamp(0.0, 1.0 + 1e-9))
}

/// Runs the protocol for every input state and aggregates fidelities
/// against the gate's ideal embedded unitary.
pub fn average_fidelity(run: &GateRun, n_states: usize) -> Result<FidelityStats> {
    let ideal = run.gate.embedded_ideal();
    let inputs = run.input_states(n_states)?;
    let mut fidelities = Vec::with_capacity(inputs.len());
    for psi in &inputs {
        let rho = run.run_state(psi)?;
        fidelities.push(gate_fidelity(&rho, &ideal, psi)?);
    }
    FidelityStats::from_fidelities(&fidelities)
}

/// Infidelity of doing nothing: 1 - mean over the lattice of
/// |<psi0|U|psi0>|^2. This is the floor both strong decay and fast pulses
/// approach, when the state barely moves while the target does.
pub fn asymptotic_infidelity(gate: &GateSpec, n_states: usize) -> Result<f64> {
    if gate.is_two_qubit() {
        return Err(Error::param(
            "gate",
            "asymptotic infidelity is defined for single-qubit gates",
        ));
    }
    let u = gate.ideal_unitary();
    let nodes = fibonacci_nodes(n_states)?;
    let mut sum = 0.0;
    for node in &nodes {
        let psi = bloch_to_state(node);
        // Only the 2x2 computational block of U matters; psi lives there.
        let amp = u[(0, 0)] * psi[(0, 0)].conj() * psi[(0, 0)]
            + u[(0, 1)] * psi[(0, 0)].conj() * psi[(1, 0)]
            + u[(1, 0)] * psi[(1, 0)].conj() * psi[(0, 0)]
            + u[(1, 1)] * psi[(1, 0)].conj() * psi[(1, 0)];
        sum += amp.norm_sqr();
    }
    Ok(1.0 - sum / n_states as f64)
}

/// Which study produced a [`SweepResult`]; fixes the meaning of the point
/// coordinates and the CSV layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// x = beta/f, y = gamma/f.
    Beta,
    /// x = f1e/f0e, y = gamma/beta.
    Ratio,
    /// x = f0e/beta, y = f1e/beta.
    FrequencyGrid,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub x: f64,
    pub y: f64,
    pub stats: FidelityStats,
    /// Companion result with the counter-rotating terms dropped, where the
    /// study pairs the two models.
    pub rwa: Option<FidelityStats>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub points: Vec<SweepPoint>,
}

/// Mean infidelity versus beta/f at fixed drive frequency, one block per
/// decay ratio, with an RWA companion per point. Two-loop gates keep their
/// windows abutting as beta moves (spacing scales as 1/beta).
pub fn sweep_beta(
    template: &GateRun,
    gammas_over_f: &[f64],
    betas_over_f: &[f64],
    n_states: usize,
) -> Result<SweepResult> {
    require_strictly_increasing("betas_over_f", betas_over_f)?;
    require_positive("betas_over_f", betas_over_f)?;
    if gammas_over_f.is_empty() {
        return Err(Error::param("gammas_over_f", "need at least one value"));
    }
    let mut tasks = Vec::new();
    for &gamma in gammas_over_f {
        for &beta in betas_over_f {
            tasks.push((beta, gamma));
        }
    }
    let points = parallel_map(&tasks, |&(beta, gamma)| {
        // f = 1 fixes the scale; beta and gamma are then the plotted ratios.
        let mut run = template.clone();
        run.beta = beta;
        run.f0e = 1.0;
        run.f1e = 1.0;
        run.gamma = gamma;
        let stats = average_fidelity(&run, n_states)?;
        let mut rwa_run = run.clone();
        rwa_run.rwa = true;
        let rwa = average_fidelity(&rwa_run, n_states)?;
        Ok(SweepPoint {
            x: beta,
            y: gamma,
            stats,
            rwa: Some(rwa),
        })
    })?;
    Ok(SweepResult {
        kind: SweepKind::Beta,
        points,
    })
}

/// One row of the per-column minimum of a frequency grid.
#[derive(Debug, Clone, Copy)]
pub struct RidgePoint {
    pub f0e_over_beta: f64,
    pub f1e_opt_over_beta: f64,
    pub mean_infidelity: f64,
}

#[derive(Debug, Clone)]
pub struct FrequencyGridResult {
    pub sweep: SweepResult,
    /// Per f0e column, the f1e with the smallest mean infidelity (ties go
    /// to the smaller f1e).
    pub ridge: Vec<RidgePoint>,
}

/// Mean infidelity on a (f0e, f1e) grid at beta = 1, full model only (the
/// RWA result does not depend on the drive frequencies at all).
pub fn frequency_grid(
    template: &GateRun,
    f0es_over_beta: &[f64],
    f1es_over_beta: &[f64],
    gamma_over_beta: f64,
    n_states: usize,
) -> Result<FrequencyGridResult> {
    require_strictly_increasing("f0es_over_beta", f0es_over_beta)?;
    require_positive("f0es_over_beta", f0es_over_beta)?;
    require_strictly_increasing("f1es_over_beta", f1es_over_beta)?;
    require_positive("f1es_over_beta", f1es_over_beta)?;
    let mut tasks = Vec::new();
    for &f0 in f0es_over_beta {
        for &f1 in f1es_over_beta {
            tasks.push((f0, f1));
        }
    }
    let points = parallel_map(&tasks, |&(f0, f1)| {
        let mut run = template.clone();
        run.beta = 1.0;
        run.f0e = f0;
        run.f1e = f1;
        run.gamma = gamma_over_beta;
        run.rwa = false;
        let stats = average_fidelity(&run, n_states)?;
        Ok(SweepPoint {
            x: f0,
            y: f1,
            stats,
            rwa: None,
        })
    })?;
    let n1 = f1es_over_beta.len();
    let mut ridge = Vec::with_capacity(f0es_over_beta.len());
    for (i, &f0) in f0es_over_beta.iter().enumerate() {
        let column = &points[i * n1..(i + 1) * n1];
        let mut best = 0;
        for (j, p) in column.iter().enumerate() {
            if p.stats.mean_infidelity() < column[best].stats.mean_infidelity() {
                best = j;
            }
        }
        ridge.push(RidgePoint {
            f0e_over_beta: f0,
            f1e_opt_over_beta: f1es_over_beta[best],
            mean_infidelity: column[best].stats.mean_infidelity(),
        });
    }
    Ok(FrequencyGridResult {
        sweep: SweepResult {
            kind: SweepKind::FrequencyGrid,
            points,
        },
        ridge,
    })
}

/// Mean infidelity versus f1e/f0e at fixed f0e/beta, with an RWA companion
/// (constant across the axis, since the RWA drops all frequency
/// dependence).
pub fn frequency_ratio_sweep(
    template: &GateRun,
    ratios: &[f64],
    f0e_over_beta: f64,
    gamma_over_beta: f64,
    spacing: f64,
    n_states: usize,
) -> Result<SweepResult> {
    require_strictly_increasing("ratios", ratios)?;
    require_positive("ratios", ratios)?;
    if !(f0e_over_beta > 0.0) {
        return Err(Error::param("f0e_over_beta", "must be positive"));
    }
    let tasks: Vec<f64> = ratios.to_vec();
    let points = parallel_map(&tasks, |&ratio| {
        let mut run = template.clone();
        run.beta = 1.0;
        run.f0e = f0e_over_beta;
        run.f1e = ratio * f0e_over_beta;
        run.gamma = gamma_over_beta;
        run.spacing = spacing;
        let stats = average_fidelity(&run, n_states)?;
        let mut rwa_run = run.clone();
        rwa_run.rwa = true;
        let rwa = average_fidelity(&rwa_run, n_states)?;
        Ok(SweepPoint {
            x: ratio,
            y: gamma_over_beta,
            stats,
            rwa: Some(rwa),
        })
    })?;
    Ok(SweepResult {
        kind: SweepKind::Ratio,
        points,
    })
}

/// Grid search for the beta/f minimizing mean infidelity on a log-spaced
/// interval. Ties go to the smaller beta. Returns (beta_opt, infidelity).
pub fn find_beta_opt(
    template: &GateRun,
    gamma_over_f: f64,
    interval: (f64, f64),
    n_points: usize,
    n_states: usize,
) -> Result<(f64, f64)> {
    let grid = log_grid(interval.0, interval.1, n_points)?;
    minimize_on_grid(&grid, |beta| {
        let mut run = template.clone();
        run.beta = beta;
        run.f0e = 1.0;
        run.f1e = 1.0;
        run.gamma = gamma_over_f;
        Ok(average_fidelity(&run, n_states)?.mean_infidelity())
    })
}

/// Evaluates the objective on every grid point concurrently and returns
/// (argmin, min). On ties the earliest grid point wins, so ascending grids
/// resolve toward the smaller value. Public as a seam for testing search
/// behavior with synthetic objectives.
pub fn minimize_on_grid<F>(grid: &[f64], objective: F) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if grid.is_empty() {
        return Err(Error::EmptyResult);
    }
    let values = parallel_map(grid, |&x| objective(x))?;
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    Ok((grid[best], values[best]))
}

/// n log-spaced points from lo to hi inclusive, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0) || !lo.is_finite() {
        return Err(Error::param("lo", format!("must be positive, got {lo}")));
    }
    if !(hi > lo) || !hi.is_finite() {
        return Err(Error::param(
            "hi",
            format!("must exceed the lower bound {lo}, got {hi}"),
        ));
    }
    if n < 2 {
        return Err(Error::param("n", "need at least two grid points"));
    }
    let step = (hi / lo).ln() / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|k| lo * (step * k as f64).exp()).collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    require_strictly_increasing("log grid", &grid)?;
    Ok(grid)
}

/// n linearly spaced points from lo to hi inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::param(
            "hi",
            format!("need lo < hi, got [{lo}, {hi}]"),
        ));
    }
    if n < 2 {
        return Err(Error::param("n", "need at least two grid points"));
    }
    let step = (hi - lo) / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|k| lo + step * k as f64).collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    require_strictly_increasing("linear grid", &grid)?;
    Ok(grid)
}

/// Order-preserving concurrent map. Results are bit-identical for any
/// worker count; if points fail, the error for the lowest index is
/// reported.
pub fn parallel_map<T, U, F>(items: &[T], eval: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync,
{
    let results: Vec<Result<U>> = items.par_iter().map(&eval).collect();
    let mut out = Vec::with_capacity(results.len());
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => out.push(v),
            Err(e) => {
                return Err(Error::SweepPoint {
                    index,
                    source: Box::new(e),
                })
            }
        }
    }
    Ok(out)
}

/// Runs a closure inside a dedicated thread pool with the given worker
/// count; parallel maps inside inherit it.
pub fn with_workers<R, F>(workers: usize, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    if workers == 0 {
        return Err(Error::param("workers", "need at least one worker"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool construction failed: {e}")))?;
    Ok(pool.install(f))
}

fn require_strictly_increasing(name: &'static str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::param(name, "need at least one value"));
    }
    for w in values.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::param(
                name,
                format!("values must strictly increase ({} then {})", w[0], w[1]),
            ));
        }
    }
    Ok(())
}

fn require_positive(name: &'static str, values: &[f64]) -> Result<()> {
    for &v in values {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::param(
                name,
                format!("values must be positive and finite, got {v}"),
            ));
        }
    }
    Ok(())
}
