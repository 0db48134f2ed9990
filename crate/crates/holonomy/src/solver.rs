//! Lindblad propagation. The master equation is written as
//!
//! ```text
//! d rho / dt = i [rho, H(t)] + sum_k gamma_k (L_k rho L_k^H
//!              - 1/2 {L_k^H L_k, rho})
//! ```
//!
//! and integrated with an adaptive embedded Runge-Kutta 4(5) pair
//! (Dormand-Prince coefficients). A step is accepted when the embedded
//! error estimate stays below abs_tol + rel_tol * |rho|; the state is
//! re-Hermitized after every accepted step. Field-free stretches between
//! pulse windows are not stepped at all: amplitude damping with H = 0 has
//! a closed-form map, applied exactly.

use crate::error::{Error, Result};
use crate::linalg::{c64, C64, ComplexMatrix, HERMITIAN_TOL};
use crate::model::{
    hamiltonian_single_into, hamiltonian_two_qubit_into, DriveConfig, PulseSequence,
    TwoQubitConfig, EXCITED, GROUND_SINK, LEVELS,
};

/// Trace drift allowed on a density matrix.
pub const TRACE_TOL: f64 = 1e-8;
/// Most negative eigenvalue tolerated by positivity diagnostics.
pub const POSITIVITY_FLOOR: f64 = -1e-8;
/// Steps below this fraction of the interval abort the integration.
const STEP_FLOOR_FRACTION: f64 = 1e-12;
/// Cap on the step inside a pulse window, in units of 1/beta; keeps the
/// counter-rotating phase sampled even when the envelope is slowly varying.
pub const PULSE_MAX_STEP: f64 = 0.05;

/// Validated density matrix: square, unit trace within `TRACE_TOL`,
/// Hermitian within the linalg tolerance. Positivity is only checked in
/// diagnostic paths because it costs an eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidState {
                reason: format!("not square: {}x{}", mat.rows(), mat.cols()),
            });
        }
        // Checks are written so NaN entries fail them.
        let dev = mat.hermiticity_deviation();
        let tol = HERMITIAN_TOL * mat.max_abs().max(1.0);
        if !(dev <= tol) {
            return Err(Error::InvalidState {
                reason: format!("not Hermitian: deviation {dev:.3e}"),
            });
        }
        let tr = mat.trace()?;
        if !((tr.re - 1.0).abs() <= TRACE_TOL && tr.im.abs() <= TRACE_TOL) {
            return Err(Error::InvalidState {
                reason: format!("trace {tr} is not 1"),
            });
        }
        Ok(DensityMatrix { mat })
    }

    /// |psi><psi| for a normalized column vector.
    pub fn from_pure(psi: &ComplexMatrix) -> Result<Self> {
        if psi.cols() != 1 {
            return Err(Error::InvalidState {
                reason: format!("state must be a column vector, got {} columns", psi.cols()),
            });
        }
        let norm2: f64 = psi.data().iter().map(|a| a.norm_sqr()).sum();
        if !((norm2 - 1.0).abs() <= TRACE_TOL) {
            return Err(Error::InvalidState {
                reason: format!("state norm^2 = {norm2} is not 1"),
            });
        }
        let mat = psi.matmul(&psi.adjoint())?;
        DensityMatrix::new(mat)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn trace_real(&self) -> f64 {
        self.mat.trace().expect("square by construction").re
    }

    /// tr(rho^2); for Hermitian rho this is the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        self.mat.frobenius_norm().powi(2)
    }

    pub fn population(&self, level: usize) -> f64 {
        self.mat[(level, level)].re
    }

    /// Smallest eigenvalue; errors if it drops below the positivity floor.
    pub fn validate_positivity(&self) -> Result<f64> {
        let min = self.mat.min_eigenvalue_hermitian()?;
        if !(min >= POSITIVITY_FLOOR) {
            return Err(Error::InvalidState {
                reason: format!("negative eigenvalue {min:.3e}"),
            });
        }
        Ok(min)
    }
}

/// Half the trace norm of a - b, computed from the spectrum of the
/// Hermitian difference.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    let mut diff = a.matrix().sub(b.matrix())?;
    diff.hermitize();
    let eigs = diff.hermitian_eigenvalues()?;
    Ok(0.5 * eigs.iter().map(|e| e.abs()).sum::<f64>())
}

/// One decay channel: jump operator and non-negative rate.
#[derive(Debug, Clone)]
pub struct DecayChannel {
    pub jump: ComplexMatrix,
    pub rate: f64,
}

impl DecayChannel {
    pub fn new(jump: ComplexMatrix, rate: f64) -> Result<Self> {
        if !jump.is_square() {
            return Err(Error::NotSquare {
                rows: jump.rows(),
                cols: jump.cols(),
            });
        }
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::param(
                "rate",
                format!("must be non-negative, got {rate}"),
            ));
        }
        Ok(DecayChannel { jump, rate })
    }
}

/// Spontaneous decay |e> -> |g> for each ion: one channel for the 4-level
/// system, two commuting single-ion channels for the 16-level product.
pub fn amplitude_damping_channels(dim: usize, gamma: f64) -> Result<Vec<DecayChannel>> {
    Ok(damping_sites(dim, gamma)?
        .iter()
        .map(|site| DecayChannel {
            jump: site.jump_matrix(),
            rate: site.rate,
        })
        .collect())
}

/// Integration controls. `initial_step` zero means automatic;
/// `validate_every` enables trace and positivity checks every so many
/// accepted steps (diagnostic runs and the acceptance suite turn it on).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub validate_every: Option<usize>,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            initial_step: 0.0,
            max_step: f64::INFINITY,
            validate_every: None,
        }
    }
}

impl IntegratorSettings {
    fn check(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return Err(Error::param("rel_tol", "must be positive and finite"));
        }
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(Error::param("abs_tol", "must be positive and finite"));
        }
        if !(self.initial_step >= 0.0) || !self.initial_step.is_finite() {
            return Err(Error::param("initial_step", "must be non-negative and finite"));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::param("max_step", "must be positive"));
        }
        Ok(())
    }
}

/// Right-hand side of the master equation for a Hermitian `rho`. The
/// Hamiltonian must be Hermitian; both preconditions are checked here
/// (the integrator uses the unchecked core).
pub fn lindblad_rhs(
    rho: &DensityMatrix,
    h: &ComplexMatrix,
    channels: &[DecayChannel],
) -> Result<ComplexMatrix> {
    let dim = rho.dim();
    if h.rows() != dim || h.cols() != dim {
        return Err(Error::DimensionMismatch {
            op: "lindblad_rhs",
            left_rows: dim,
            left_cols: dim,
            right_rows: h.rows(),
            right_cols: h.cols(),
        });
    }
    let dev = h.hermiticity_deviation();
    let tol = HERMITIAN_TOL * h.max_abs().max(1.0);
    if dev > tol {
        return Err(Error::NotHermitian {
            deviation: dev,
            tol,
        });
    }
    let prepared = prepare_channels(channels, dim)?;
    let mut ws = RhsWorkspace::new(dim);
    let mut out = ComplexMatrix::zeros(dim, dim);
    rhs_into(rho.matrix(), h, &prepared, &mut ws, &mut out);
    Ok(out)
}

/// Jump operator reduced to its nonzeros plus the precomputed L^H L.
struct PreparedChannel {
    rate: f64,
    entries: Vec<(usize, usize, C64)>,
    sparse: bool,
    jump: ComplexMatrix,
    jump_adj: ComplexMatrix,
    ldl: ComplexMatrix,
    ldl_diag: Option<Vec<f64>>,
}

fn prepare_channels(channels: &[DecayChannel], dim: usize) -> Result<Vec<PreparedChannel>> {
    let mut out = Vec::with_capacity(channels.len());
    for ch in channels {
        if ch.jump.rows() != dim || ch.jump.cols() != dim {
            return Err(Error::DimensionMismatch {
                op: "decay channel",
                left_rows: dim,
                left_cols: dim,
                right_rows: ch.jump.rows(),
                right_cols: ch.jump.cols(),
            });
        }
        if !(ch.rate >= 0.0) || !ch.rate.is_finite() {
            return Err(Error::param(
                "rate",
                format!("must be non-negative, got {}", ch.rate),
            ));
        }
        if ch.rate == 0.0 {
            continue;
        }
        let mut entries = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                let v = ch.jump[(i, j)];
                if v != C64::default() {
                    entries.push((i, j, v));
                }
            }
        }
        let jump_adj = ch.jump.adjoint();
        let ldl = jump_adj.matmul(&ch.jump)?;
        let mut diagonal = true;
        for i in 0..dim {
            for j in 0..dim {
                if i != j && ldl[(i, j)] != C64::default() {
                    diagonal = false;
                }
            }
        }
        let ldl_diag = diagonal.then(|| (0..dim).map(|i| ldl[(i, i)].re).collect());
        out.push(PreparedChannel {
            rate: ch.rate,
            sparse: entries.len() <= dim,
            entries,
            jump: ch.jump.clone(),
            jump_adj,
            ldl,
            ldl_diag,
        });
    }
    Ok(out)
}

struct RhsWorkspace {
    m: ComplexMatrix,
    t1: ComplexMatrix,
    t2: ComplexMatrix,
}

impl RhsWorkspace {
    fn new(dim: usize) -> Self {
        RhsWorkspace {
            m: ComplexMatrix::zeros(dim, dim),
            t1: ComplexMatrix::zeros(dim, dim),
            t2: ComplexMatrix::zeros(dim, dim),
        }
    }
}

/// Core derivative. Relies on `rho` being Hermitian: the commutator is
/// formed as i (M - M^H) with M = rho H, one product instead of two.
fn rhs_into(
    rho: &ComplexMatrix,
    h: &ComplexMatrix,
    channels: &[PreparedChannel],
    ws: &mut RhsWorkspace,
    out: &mut ComplexMatrix,
) {
    let dim = rho.rows();
    rho.mul_into(h, &mut ws.m);
    for i in 0..dim {
        for j in 0..dim {
            let v = ws.m[(i, j)] - ws.m[(j, i)].conj();
            out[(i, j)] = c64(-v.im, v.re);
        }
    }
    for ch in channels {
        let g = ch.rate;
        if ch.sparse {
            for &(r, c, v) in &ch.entries {
                for &(r2, c2, v2) in &ch.entries {
                    out[(r, r2)] += g * v * v2.conj() * rho[(c, c2)];
                }
            }
        } else {
            ch.jump.mul_into(rho, &mut ws.t1);
            ws.t1.mul_into(&ch.jump_adj, &mut ws.t2);
            out.add_scaled_assign(c64(g, 0.0), &ws.t2);
        }
        match &ch.ldl_diag {
            Some(diag) => {
                for i in 0..dim {
                    for j in 0..dim {
                        let w = diag[i] + diag[j];
                        if w != 0.0 {
                            out[(i, j)] -= 0.5 * g * w * rho[(i, j)];
                        }
                    }
                }
            }
            None => {
                ch.ldl.mul_into(rho, &mut ws.t1);
                rho.mul_into(&ch.ldl, &mut ws.t2);
                out.add_scaled_assign(c64(-0.5 * g, 0.0), &ws.t1);
                out.add_scaled_assign(c64(-0.5 * g, 0.0), &ws.t2);
            }
        }
    }
}

// Dormand-Prince 4(5) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Difference between the fifth and the embedded fourth order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates the master equation from t0 to t1 and returns the final
/// validated state. The Hamiltonian callback writes H(t) into the provided
/// buffer at every stage time.
pub fn integrate<F>(
    rho0: &DensityMatrix,
    mut hamiltonian: F,
    channels: &[DecayChannel],
    t0: f64,
    t1: f64,
    settings: &IntegratorSettings,
) -> Result<DensityMatrix>
where
    F: FnMut(f64, &mut ComplexMatrix),
{
    settings.check()?;
    if !(t1 >= t0) {
        return Err(Error::param(
            "t1",
            format!("integration interval reversed: [{t0}, {t1}]"),
        ));
    }
    let prepared = prepare_channels(channels, rho0.dim())?;
    let mut mat = rho0.matrix().clone();
    integrate_matrix(&mut mat, &mut hamiltonian, &prepared, t0, t1, settings)?;
    DensityMatrix::new(mat)
}

fn integrate_matrix<F>(
    y: &mut ComplexMatrix,
    h_fn: &mut F,
    channels: &[PreparedChannel],
    t0: f64,
    t1: f64,
    settings: &IntegratorSettings,
) -> Result<()>
where
    F: FnMut(f64, &mut ComplexMatrix),
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(());
    }
    let dim = y.rows();
    let mut h_buf = ComplexMatrix::zeros(dim, dim);
    let mut k: Vec<ComplexMatrix> = (0..7).map(|_| ComplexMatrix::zeros(dim, dim)).collect();
    let mut stage = ComplexMatrix::zeros(dim, dim);
    let mut cand = ComplexMatrix::zeros(dim, dim);
    let mut ws = RhsWorkspace::new(dim);

    let floor = STEP_FLOOR_FRACTION * span;
    let mut t = t0;
    let mut h = if settings.initial_step > 0.0 {
        settings.initial_step
    } else {
        span * 1e-2
    };
    h = h.min(settings.max_step).min(span);
    let mut accepted: usize = 0;
    let mut k1_fresh = false;
    let mut last_rejected = false;

    while t < t1 {
        if h < floor {
            return Err(Error::StepUnderflow {
                t,
                step: h,
                floor,
            });
        }
        h = h.min(t1 - t);
        if !k1_fresh {
            h_fn(t, &mut h_buf);
            rhs_into(y, &h_buf, channels, &mut ws, &mut k[0]);
            k1_fresh = true;
        }
        for s in 1..7 {
            stage.copy_from(y);
            for (j, a) in A[s - 1].iter().enumerate().take(s) {
                if *a != 0.0 {
                    stage.add_scaled_assign(c64(h * a, 0.0), &k[j]);
                }
            }
            if s == 6 {
                // Stage 7 sits at the fifth-order solution itself.
                cand.copy_from(&stage);
            }
            h_fn(t + C[s] * h, &mut h_buf);
            rhs_into(&stage, &h_buf, channels, &mut ws, &mut k[s]);
        }
        // Embedded error estimate: h * sum_i (b5_i - b4_i) k_i. Non-finite
        // stage values count as infinite error so the step gets rejected
        // instead of silently accepted (f64::max would swallow a NaN).
        let mut err: f64 = 0.0;
        for idx in 0..dim * dim {
            let mut e = C64::default();
            for (s, w) in E.iter().enumerate() {
                if *w != 0.0 {
                    e += *w * k[s].data()[idx];
                }
            }
            let v = (h * e).norm();
            if !v.is_finite() {
                err = f64::INFINITY;
                break;
            }
            err = err.max(v);
        }
        let scale = settings.abs_tol + settings.rel_tol * y.max_abs().max(cand.max_abs());
        if err <= scale {
            t += h;
            y.copy_from(&cand);
            y.hermitize();
            accepted += 1;
            k1_fresh = false;
            if let Some(every) = settings.validate_every {
                if every > 0 && accepted.is_multiple_of(every) {
                    validate_state(y, t)?;
                }
            }
            let grow = if last_rejected { 1.0 } else { 5.0 };
            let factor = (0.9 * (scale / err.max(1e-300)).powf(0.2)).clamp(0.2, grow);
            h = (h * factor).min(settings.max_step);
            last_rejected = false;
        } else {
            let factor = (0.9 * (scale / err).powf(0.2)).clamp(0.2, 1.0);
            h *= factor.min(0.9);
            last_rejected = true;
        }
    }
    Ok(())
}

fn validate_state(y: &ComplexMatrix, t: f64) -> Result<()> {
    let tr = y.trace().expect("state is square");
    if !((tr.re - 1.0).abs() <= TRACE_TOL && tr.im.abs() <= TRACE_TOL) {
        return Err(Error::ValidityCheck {
            t,
            reason: format!("trace drifted to {tr}"),
        });
    }
    let min = y.min_eigenvalue_hermitian()?;
    if !(min >= POSITIVITY_FLOOR) {
        return Err(Error::ValidityCheck {
            t,
            reason: format!("negative eigenvalue {min:.3e}"),
        });
    }
    Ok(())
}

/// Amplitude damping acting on one tensor factor; carries enough layout to
/// build the dense jump operator and to apply the field-free decay map in
/// closed form.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DampingSite {
    left: usize,
    levels: usize,
    right: usize,
    excited: usize,
    ground: usize,
    pub rate: f64,
}

pub(crate) fn damping_sites(dim: usize, gamma: f64) -> Result<Vec<DampingSite>> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::param(
            "gamma",
            format!("must be non-negative, got {gamma}"),
        ));
    }
    let site = |left, right| DampingSite {
        left,
        levels: LEVELS,
        right,
        excited: EXCITED,
        ground: GROUND_SINK,
        rate: gamma,
    };
    match dim {
        d if d == LEVELS => Ok(vec![site(1, 1)]),
        d if d == LEVELS * LEVELS => Ok(vec![site(1, LEVELS), site(LEVELS, 1)]),
        _ => Err(Error::param(
            "dim",
            format!("expected 4 or 16, got {dim}"),
        )),
    }
}

impl DampingSite {
    fn dim(&self) -> usize {
        self.left * self.levels * self.right
    }

    fn index(&self, l: usize, a: usize, r: usize) -> usize {
        (l * self.levels + a) * self.right + r
    }

    pub(crate) fn jump_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim(), self.dim());
        for l in 0..self.left {
            for r in 0..self.right {
                m[(self.index(l, self.ground, r), self.index(l, self.excited, r))] =
                    c64(1.0, 0.0);
            }
        }
        m
    }

    /// Exact field-free decay over dt: excited populations shed
    /// (1 - e^{-gamma dt}) into the sink, excited coherences shrink by
    /// e^{-gamma dt / 2}.
    pub(crate) fn apply_decay(&self, rho: &mut ComplexMatrix, dt: f64) {
        if self.rate == 0.0 || dt == 0.0 {
            return;
        }
        let decay = (-self.rate * dt).exp();
        let half = (-0.5 * self.rate * dt).exp();
        let dim = self.dim();
        // Feed the sink first, while the excited block is still intact.
        for l in 0..self.left {
            for r in 0..self.right {
                for l2 in 0..self.left {
                    for r2 in 0..self.right {
                        let ee = rho[(self.index(l, self.excited, r), self.index(l2, self.excited, r2))];
                        rho[(self.index(l, self.ground, r), self.index(l2, self.ground, r2))] +=
                            (1.0 - decay) * ee;
                    }
                }
            }
        }
        let is_excited = |i: usize| (i / self.right) % self.levels == self.excited;
        for i in 0..dim {
            for j in 0..dim {
                match (is_excited(i), is_excited(j)) {
                    (true, true) => rho[(i, j)] *= decay,
                    (true, false) | (false, true) => rho[(i, j)] *= half,
                    _ => {}
                }
            }
        }
    }
}

/// A complete gate protocol: either a single-ion pulse sequence with its
/// drive, or the two-ion configuration.
#[derive(Debug, Clone)]
pub enum Protocol<'a> {
    SingleQubit {
        sequence: &'a PulseSequence,
        drive: &'a DriveConfig,
    },
    TwoQubit { config: &'a TwoQubitConfig },
}

/// Runs a protocol end to end: every pulse window is integrated with the
/// step cap `PULSE_MAX_STEP / beta`, every gap between windows is advanced
/// with the exact decay map.
pub fn run_protocol(
    rho0: &DensityMatrix,
    protocol: &Protocol<'_>,
    settings: &IntegratorSettings,
) -> Result<DensityMatrix> {
    match protocol {
        Protocol::SingleQubit { sequence, drive } => {
            run_single_qubit(rho0, sequence, drive, settings)
        }
        Protocol::TwoQubit { config } => run_two_qubit(rho0, config, settings),
    }
}

pub fn run_single_qubit(
    rho0: &DensityMatrix,
    sequence: &PulseSequence,
    drive: &DriveConfig,
    settings: &IntegratorSettings,
) -> Result<DensityMatrix> {
    settings.check()?;
    if rho0.dim() != LEVELS {
        return Err(Error::param(
            "rho0",
            format!("single-ion protocol needs dim 4, got {}", rho0.dim()),
        ));
    }
    let sites = damping_sites(LEVELS, drive.gamma)?;
    let channels = prepare_site_channels(&sites)?;
    let mut mat = rho0.matrix().clone();
    let mut t = sequence.start_time();
    for (loop_params, pulse) in sequence.entries() {
        let gap = pulse.window_start() - t;
        if gap > 0.0 {
            for site in &sites {
                site.apply_decay(&mut mat, gap);
            }
        }
        let mut windowed = *settings;
        windowed.max_step = settings.max_step.min(PULSE_MAX_STEP / pulse.beta);
        let loop_params = *loop_params;
        let pulse = *pulse;
        let drive = *drive;
        let mut h_fn = move |time: f64, out: &mut ComplexMatrix| {
            hamiltonian_single_into(time, &loop_params, &pulse, &drive, out)
        };
        integrate_matrix(
            &mut mat,
            &mut h_fn,
            &channels,
            pulse.window_start(),
            pulse.window_end(),
            &windowed,
        )?;
        t = pulse.window_end();
    }
    DensityMatrix::new(mat)
}

pub fn run_two_qubit(
    rho0: &DensityMatrix,
    config: &TwoQubitConfig,
    settings: &IntegratorSettings,
) -> Result<DensityMatrix> {
    settings.check()?;
    let dim = LEVELS * LEVELS;
    if rho0.dim() != dim {
        return Err(Error::param(
            "rho0",
            format!("two-ion protocol needs dim 16, got {}", rho0.dim()),
        ));
    }
    let sites = damping_sites(dim, config.gamma)?;
    let channels = prepare_site_channels(&sites)?;
    let mut mat = rho0.matrix().clone();
    let mut windowed = *settings;
    windowed.max_step = settings.max_step.min(PULSE_MAX_STEP / config.pulse.beta);
    let cfg = config.clone();
    let mut h_fn =
        move |time: f64, out: &mut ComplexMatrix| hamiltonian_two_qubit_into(time, &cfg, out);
    integrate_matrix(
        &mut mat,
        &mut h_fn,
        &channels,
        config.pulse.window_start(),
        config.pulse.window_end(),
        &windowed,
    )?;
    DensityMatrix::new(mat)
}

fn prepare_site_channels(sites: &[DampingSite]) -> Result<Vec<PreparedChannel>> {
    let channels: Vec<DecayChannel> = sites
        .iter()
        .map(|s| DecayChannel {
            jump: s.jump_matrix(),
            rate: s.rate,
        })
        .collect();
    let dim = sites.first().map(|s| s.dim()).unwrap_or(LEVELS);
    prepare_channels(&channels, dim)
}
