//! Drive model for a four-level Lambda system: two ground states |0>, |1>
//! coupled to an excited state |e> by a shared sech envelope, plus a
//! spectator level |g> that only receives spontaneous decay from |e>.
//!
//! Basis order is fixed crate-wide as (|0>, |1>, |e>, |g>) = indices
//! (0, 1, 2, 3); two-ion operators use the Kronecker product with the first
//! ion as the slow index. Time zero sits at the left edge of the first pulse
//! window and the counter-rotating phase factors exp(-2i f t) always take
//! the absolute time, so shifting a window changes the physics and the
//! origin convention matters.
//!
//! Each coupling carries a factor (1 + exp(-2i f_je t)) from the
//! counter-rotating term; the rotating wave approximation (RWA) replaces
//! that factor by 1. The two-ion form squares the factor on the |ee><00|
//! and |ee><11| channels and uses 4 cos^2(f_je t) on the exchange channels.
//! Note the exchange factor averages to 2 over a drive period while the RWA
//! form uses coefficient 1, so the two branches keep a finite offset even
//! at large f; both are implemented exactly as defined.

use crate::error::{Error, Result};
use crate::linalg::{c64, C64, ComplexMatrix};

/// Basis index of |e| in the single-ion ordering.
pub const EXCITED: usize = 2;
/// Basis index of the decay sink |g>.
pub const GROUND_SINK: usize = 3;
/// Levels per ion.
pub const LEVELS: usize = 4;

/// Loop angles (theta, phi) selecting the coupling weights
/// omega_0 = sin(theta/2) e^{i phi}, omega_1 = -cos(theta/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopParams {
    pub theta: f64,
    pub phi: f64,
}

impl LoopParams {
    pub fn new(theta: f64, phi: f64) -> Self {
        LoopParams { theta, phi }
    }

    /// Normalized coupling weights; |omega_0|^2 + |omega_1|^2 = 1 for all
    /// angles.
    pub fn omega_weights(&self) -> (C64, C64) {
        let half = 0.5 * self.theta;
        let omega0 = C64::from_polar(half.sin(), self.phi);
        let omega1 = c64(-half.cos(), 0.0);
        (omega0, omega1)
    }
}

/// Truncated sech pulse: beta * sech(beta (t - center)) inside
/// [center - half_width, center + half_width] and exactly zero outside.
///
/// The default half width of 10/beta keeps the truncated area within
/// 2e-4 of pi (sech(10) ~ 9.08e-5); the constructor rejects windows whose
/// area deficit exceeds 1e-3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    pub beta: f64,
    pub center: f64,
    pub half_width: f64,
}

/// Pulse area deficit tolerance: |area - pi| over the window must stay
/// below this.
pub const AREA_TOL: f64 = 1e-3;

/// Dimensionless default half width in units of 1/beta.
pub const DEFAULT_HALF_WIDTH: f64 = 10.0;

impl PulseShape {
    /// Pulse with the default window, centered so the window starts at t = 0.
    pub fn new(beta: f64) -> Self {
        let hw = DEFAULT_HALF_WIDTH / beta;
        PulseShape {
            beta,
            center: hw,
            half_width: hw,
        }
    }

    pub fn with_center(beta: f64, center: f64) -> Self {
        PulseShape {
            beta,
            center,
            half_width: DEFAULT_HALF_WIDTH / beta,
        }
    }

    /// Fully custom shape; validates positivity and the area invariant.
    pub fn custom(beta: f64, center: f64, half_width: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::param("beta", format!("must be positive, got {beta}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::param(
                "half_width",
                format!("must be positive, got {half_width}"),
            ));
        }
        let shape = PulseShape {
            beta,
            center,
            half_width,
        };
        let deficit = (shape.area() - std::f64::consts::PI).abs();
        if deficit > AREA_TOL {
            return Err(Error::param(
                "half_width",
                format!(
                    "window area deviates from pi by {deficit:.2e} (limit {AREA_TOL:.0e}); \
                     increase half_width"
                ),
            ));
        }
        Ok(shape)
    }

    /// Envelope value at absolute time t. Even about the center by
    /// construction (the offset is passed through abs).
    pub fn envelope(&self, t: f64) -> f64 {
        let s = (t - self.center).abs();
        if s > self.half_width {
            return 0.0;
        }
        self.beta / (self.beta * s).cosh()
    }

    /// Exact area over the truncated window: 2 gd(beta * half_width) with
    /// gd the Gudermannian function.
    pub fn area(&self) -> f64 {
        let x = self.beta * self.half_width;
        4.0 * (0.5 * x).tanh().atan()
    }

    pub fn window_start(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn window_end(&self) -> f64 {
        self.center + self.half_width
    }
}

/// Static drive parameters: the two transition frequencies (in the same
/// units as beta and gamma), the decay rate out of |e>, and the model
/// branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    pub f0e: f64,
    pub f1e: f64,
    pub gamma: f64,
    pub rwa: bool,
}

impl DriveConfig {
    pub fn new(f0e: f64, f1e: f64, gamma: f64, rwa: bool) -> Result<Self> {
        if !(f0e > 0.0) || !f0e.is_finite() {
            return Err(Error::param("f0e", format!("must be positive, got {f0e}")));
        }
        if !(f1e > 0.0) || !f1e.is_finite() {
            return Err(Error::param("f1e", format!("must be positive, got {f1e}")));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::param(
                "gamma",
                format!("must be non-negative, got {gamma}"),
            ));
        }
        Ok(DriveConfig {
            f0e,
            f1e,
            gamma,
            rwa,
        })
    }
}

/// Ordered, non-overlapping pulses, each carrying its own loop angles.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    entries: Vec<(LoopParams, PulseShape)>,
}

impl PulseSequence {
    /// Validates strictly increasing centers and window disjointness
    /// (consecutive centers at least the sum of half widths apart, up to a
    /// relative rounding allowance so exactly abutting windows pass).
    pub fn new(entries: Vec<(LoopParams, PulseShape)>) -> Result<Self> {
        for pair in entries.windows(2) {
            let (_, a) = &pair[0];
            let (_, b) = &pair[1];
            if !(b.center > a.center) {
                return Err(Error::param(
                    "sequence",
                    format!(
                        "pulse centers must strictly increase ({} then {})",
                        a.center, b.center
                    ),
                ));
            }
            let min_sep = a.half_width + b.half_width;
            if b.center - a.center < min_sep * (1.0 - 1e-12) {
                return Err(Error::param(
                    "sequence",
                    format!(
                        "pulse windows overlap: centers {} and {} closer than {}",
                        a.center,
                        b.center,
                        a.half_width + b.half_width
                    ),
                ));
            }
        }
        Ok(PulseSequence { entries })
    }

    /// One pulse whose window starts at t = 0.
    pub fn single_loop(loop_params: LoopParams, beta: f64) -> Self {
        PulseSequence {
            entries: vec![(loop_params, PulseShape::new(beta))],
        }
    }

    /// Two pulses. The second window opens `spacing` after the first pulse
    /// peak, so spacing equal to the half width (the 10/beta default) makes
    /// the windows abut and larger values leave a field-free gap of
    /// spacing - half_width between them.
    pub fn two_loop(first: LoopParams, second: LoopParams, beta: f64, spacing: f64) -> Result<Self> {
        let p1 = PulseShape::new(beta);
        let hw = p1.half_width;
        let p2 = PulseShape::with_center(beta, p1.center + spacing + hw);
        PulseSequence::new(vec![(first, p1), (second, p2)])
    }

    pub fn entries(&self) -> &[(LoopParams, PulseShape)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Left edge of the first window (0 for the built-in constructors).
    pub fn start_time(&self) -> f64 {
        self.entries
            .first()
            .map(|(_, p)| p.window_start())
            .unwrap_or(0.0)
    }

    /// Right edge of the last window.
    pub fn end_time(&self) -> f64 {
        self.entries
            .last()
            .map(|(_, p)| p.window_end())
            .unwrap_or(0.0)
    }
}

/// Parameters of the two-ion entangling protocol: one effective pulse
/// driving the pair couplings, shared angles (theta, phi), and a decay rate
/// applied to each ion's excited state independently.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitConfig {
    pub theta: f64,
    pub phi: f64,
    pub f0e: f64,
    pub f1e: f64,
    pub gamma: f64,
    pub pulse: PulseShape,
    pub rwa: bool,
}

impl TwoQubitConfig {
    pub fn new(
        theta: f64,
        phi: f64,
        f0e: f64,
        f1e: f64,
        gamma: f64,
        pulse: PulseShape,
        rwa: bool,
    ) -> Result<Self> {
        // Reuse the single-ion validation for the shared scalar fields.
        DriveConfig::new(f0e, f1e, gamma, rwa)?;
        Ok(TwoQubitConfig {
            theta,
            phi,
            f0e,
            f1e,
            gamma,
            pulse,
            rwa,
        })
    }
}

fn counter_rotating(f: f64, t: f64) -> C64 {
    // 1 + exp(-2 i f t)
    c64(1.0, 0.0) + C64::cis(-2.0 * f * t)
}

/// Writes the single-ion Hamiltonian at absolute time t into `out` (4x4).
pub fn hamiltonian_single_into(
    t: f64,
    loop_params: &LoopParams,
    pulse: &PulseShape,
    drive: &DriveConfig,
    out: &mut ComplexMatrix,
) {
    out.set_zero();
    let env = pulse.envelope(t);
    if env == 0.0 {
        return;
    }
    let (omega0, omega1) = loop_params.omega_weights();
    let (fac0, fac1) = if drive.rwa {
        (c64(1.0, 0.0), c64(1.0, 0.0))
    } else {
        (counter_rotating(drive.f0e, t), counter_rotating(drive.f1e, t))
    };
    let a0 = env * omega0 * fac0;
    let a1 = env * omega1 * fac1;
    out[(EXCITED, 0)] = a0;
    out[(0, EXCITED)] = a0.conj();
    out[(EXCITED, 1)] = a1;
    out[(1, EXCITED)] = a1.conj();
}

/// Single-ion Hamiltonian at absolute time t in the (|0>, |1>, |e>, |g>)
/// basis.
pub fn hamiltonian_single(
    t: f64,
    loop_params: &LoopParams,
    pulse: &PulseShape,
    drive: &DriveConfig,
) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(LEVELS, LEVELS);
    hamiltonian_single_into(t, loop_params, pulse, drive, &mut out);
    out
}

/// Bright and dark superpositions for the given loop angles, embedded as
/// 4-component columns: |b> = conj(omega_0)|0> + conj(omega_1)|1> and
/// |d> = -omega_1|0> + omega_0|1>. The RWA drive couples only |b> to |e>;
/// |d> is exactly dark.
pub fn bright_dark_states(loop_params: &LoopParams) -> (ComplexMatrix, ComplexMatrix) {
    let (omega0, omega1) = loop_params.omega_weights();
    let zero = C64::default();
    let bright = ComplexMatrix::column(&[omega0.conj(), omega1.conj(), zero, zero]);
    let dark = ComplexMatrix::column(&[-omega1, omega0, zero, zero]);
    (bright, dark)
}

/// Same drive expressed in the (|b>, |d>, |e>, |g>) basis. For the RWA the
/// only coupling is (e, b) = envelope; with counter-rotating terms the
/// bright coupling picks up the weighted phase factor and a residual
/// (e, d) element proportional to omega_0 omega_1 (e^{-2i f1 t} - e^{-2i f0 t})
/// appears. Equal transition frequencies cancel that element identically.
pub fn hamiltonian_bright_dark(
    t: f64,
    loop_params: &LoopParams,
    pulse: &PulseShape,
    drive: &DriveConfig,
) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(LEVELS, LEVELS);
    let env = pulse.envelope(t);
    if env == 0.0 {
        return out;
    }
    let (omega0, omega1) = loop_params.omega_weights();
    let (eb, ed) = if drive.rwa {
        (c64(env, 0.0), C64::default())
    } else {
        let e0 = C64::cis(-2.0 * drive.f0e * t);
        let e1 = C64::cis(-2.0 * drive.f1e * t);
        let w0 = omega0.norm_sqr();
        let w1 = omega1.norm_sqr();
        (
            env * (c64(1.0, 0.0) + w0 * e0 + w1 * e1),
            env * omega0 * omega1 * (e1 - e0),
        )
    };
    out[(EXCITED, 0)] = eb;
    out[(0, EXCITED)] = eb.conj();
    out[(EXCITED, 1)] = ed;
    out[(1, EXCITED)] = ed.conj();
    out
}

/// Unitary change of basis whose columns are (|b>, |d>, |e>, |g>) expressed
/// in the bare ordering, so R^H H_bare R reproduces `hamiltonian_bright_dark`.
pub fn bright_dark_basis(loop_params: &LoopParams) -> ComplexMatrix {
    let (bright, dark) = bright_dark_states(loop_params);
    let mut r = ComplexMatrix::zeros(LEVELS, LEVELS);
    for i in 0..LEVELS {
        r[(i, 0)] = bright[(i, 0)];
        r[(i, 1)] = dark[(i, 0)];
    }
    r[(EXCITED, 2)] = c64(1.0, 0.0);
    r[(GROUND_SINK, 3)] = c64(1.0, 0.0);
    r
}

const DIM2: usize = LEVELS * LEVELS;

fn pair_index(first: usize, second: usize) -> usize {
    first * LEVELS + second
}

/// Writes the two-ion Hamiltonian at absolute time t into `out` (16x16).
pub fn hamiltonian_two_qubit_into(t: f64, config: &TwoQubitConfig, out: &mut ComplexMatrix) {
    out.set_zero();
    let env = config.pulse.envelope(t);
    if env == 0.0 {
        return;
    }
    let half = 0.5 * config.theta;
    let sin = half.sin();
    let cos = half.cos();
    let phase = C64::cis(0.5 * config.phi);
    let (pair0, pair1, exch0, exch1) = if config.rwa {
        let one = c64(1.0, 0.0);
        (one, one, 1.0, 1.0)
    } else {
        let cr0 = counter_rotating(config.f0e, t);
        let cr1 = counter_rotating(config.f1e, t);
        let c0 = (config.f0e * t).cos();
        let c1 = (config.f1e * t).cos();
        (cr0 * cr0, cr1 * cr1, 4.0 * c0 * c0, 4.0 * c1 * c1)
    };
    let ee = pair_index(EXCITED, EXCITED);
    let mut put = |row: usize, col: usize, amp: C64| {
        out[(row, col)] = amp;
        out[(col, row)] = amp.conj();
    };
    put(ee, pair_index(0, 0), env * sin * phase * pair0);
    put(ee, pair_index(1, 1), -env * cos * phase.conj() * pair1);
    put(
        pair_index(EXCITED, 0),
        pair_index(0, EXCITED),
        c64(env * sin * exch0, 0.0),
    );
    put(
        pair_index(EXCITED, 1),
        pair_index(1, EXCITED),
        c64(-env * cos * exch1, 0.0),
    );
}

/// Two-ion Hamiltonian at absolute time t; 16x16 with the first ion as the
/// slow Kronecker index.
pub fn hamiltonian_two_qubit(t: f64, config: &TwoQubitConfig) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(DIM2, DIM2);
    hamiltonian_two_qubit_into(t, config, &mut out);
    out
}
