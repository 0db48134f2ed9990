//! Ideal holonomic gates. A single pulse loop with angles (theta, phi)
//! acts on the qubit span as n.sigma for the unit vector
//! n = (sin t cos p, sin t sin p, cos t); traversing two loops composes to
//! (n.m) I - i sigma.(n x m). The two-ion protocol realizes a controlled
//! phase family whose theta = 0 member is CZ.

use crate::error::{Error, Result};
use crate::linalg::{c64, C64, ComplexMatrix};
use crate::model::{LoopParams, EXCITED, LEVELS};

/// Real three-component Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &BlochVector) -> BlochVector {
        BlochVector::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    /// Loop angles whose traversal produces this gate axis.
    pub fn from_loop(loop_params: &LoopParams) -> Self {
        let (theta, phi) = (loop_params.theta, loop_params.phi);
        BlochVector::new(
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        )
    }
}

/// n.sigma for unit n: traceless, Hermitian, and involutive.
pub fn holonomy_single(n: &BlochVector) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![c64(n.z, 0.0), c64(n.x, -n.y)],
        vec![c64(n.x, n.y), c64(-n.z, 0.0)],
    ])
}

/// Composition of two loop holonomies, first n then m:
/// (n.m) I - i sigma.(n x m).
pub fn holonomy_double(n: &BlochVector, m: &BlochVector) -> ComplexMatrix {
    let d = n.dot(m);
    let c = n.cross(m);
    ComplexMatrix::from_rows(&[
        vec![c64(d, -c.z), c64(-c.y, -c.x)],
        vec![c64(c.y, -c.x), c64(d, c.z)],
    ])
}

/// Ideal two-qubit holonomy on the ordered computational basis
/// (|00>, |01>, |10>, |11>): a rotation mixing |00> and |11> while the odd
/// sector stays untouched. theta = 0 gives diag(1, 1, 1, -1) = CZ.
pub fn ideal_two_qubit(theta: f64, phi: f64) -> ComplexMatrix {
    let mut u = ComplexMatrix::zeros(4, 4);
    u[(0, 0)] = c64(theta.cos(), 0.0);
    u[(0, 3)] = C64::from_polar(theta.sin(), -phi);
    u[(3, 0)] = C64::from_polar(theta.sin(), phi);
    u[(3, 3)] = c64(-theta.cos(), 0.0);
    u[(1, 1)] = c64(1.0, 0.0);
    u[(2, 2)] = c64(1.0, 0.0);
    u
}

/// A gate expressed as the loops that traverse it.
#[derive(Debug, Clone, PartialEq)]
pub enum GateSpec {
    SingleLoop(LoopParams),
    /// Two loops in traversal order.
    DoubleLoop(LoopParams, LoopParams),
    TwoQubit {
        theta: f64,
        phi: f64,
    },
}

impl GateSpec {
    /// Hilbert space dimension of the simulated system.
    pub fn dim(&self) -> usize {
        match self {
            GateSpec::TwoQubit { .. } => LEVELS * LEVELS,
            _ => LEVELS,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, GateSpec::TwoQubit { .. })
    }

    /// Ideal unitary on the computational space (2x2 or 4x4).
    pub fn ideal_unitary(&self) -> ComplexMatrix {
        match self {
            GateSpec::SingleLoop(l) => holonomy_single(&BlochVector::from_loop(l)),
            GateSpec::DoubleLoop(first, second) => holonomy_double(
                &BlochVector::from_loop(first),
                &BlochVector::from_loop(second),
            ),
            GateSpec::TwoQubit { theta, phi } => ideal_two_qubit(*theta, *phi),
        }
    }

    /// Ideal unitary embedded in the full level space, identity elsewhere.
    pub fn embedded_ideal(&self) -> ComplexMatrix {
        embed_qubit_unitary(&self.ideal_unitary(), self.dim())
            .expect("catalog unitaries always embed")
    }
}

/// Indices of the computational states inside the full level space. For one
/// ion these are |0>, |1>; for two ions the four products, first ion slow.
pub fn computational_indices(dim: usize) -> Result<Vec<usize>> {
    match dim {
        d if d == LEVELS => Ok(vec![0, 1]),
        d if d == LEVELS * LEVELS => Ok(vec![0, 1, LEVELS, LEVELS + 1]),
        _ => Err(Error::param(
            "dim",
            format!("expected 4 or 16, got {dim}"),
        )),
    }
}

/// Places a computational-space unitary into the full level space, acting
/// as the identity on every non-computational level.
pub fn embed_qubit_unitary(u: &ComplexMatrix, dim: usize) -> Result<ComplexMatrix> {
    let idx = computational_indices(dim)?;
    if u.rows() != idx.len() || u.cols() != idx.len() {
        return Err(Error::DimensionMismatch {
            op: "embed_qubit_unitary",
            left_rows: u.rows(),
            left_cols: u.cols(),
            right_rows: idx.len(),
            right_cols: idx.len(),
        });
    }
    let mut out = ComplexMatrix::identity(dim);
    for (i, &row) in idx.iter().enumerate() {
        out[(row, row)] = C64::default();
        for (j, &col) in idx.iter().enumerate() {
            out[(row, col)] = u[(i, j)];
        }
    }
    Ok(out)
}

/// Optional angle arguments for the parametrized catalog entries.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GateParams {
    pub theta: f64,
    pub phi: f64,
    /// Azimuth of the second loop for two-loop phase gates.
    pub phi_prime: f64,
    pub has_theta: bool,
    pub has_phi: bool,
    pub has_phi_prime: bool,
}

impl GateParams {
    pub fn with_theta(theta: f64) -> Self {
        GateParams {
            theta,
            has_theta: true,
            ..Default::default()
        }
    }
}

const VALID_GATES: &str = "X, NOT, H, Z, S, phase-shift, single-pulse, CZ";

/// Resolves a gate name (case-insensitive) to its loop construction.
///
/// - `X`/`NOT`: one loop along (1, 0, 0)
/// - `H`: one loop along (1, 0, 1)/sqrt(2)
/// - `Z`: one loop along (0, 0, 1)
/// - `S`: two equatorial loops at azimuths 0 and pi/4
/// - `phase-shift`: two equatorial loops at azimuths phi and phi_prime
///   (phi defaults to 0, so phi_prime is the phase-shift angle)
/// - `single-pulse`: one loop at caller-chosen (theta, phi)
/// - `CZ`: the two-qubit protocol with theta = phi = 0
pub fn catalog(name: &str, params: &GateParams) -> Result<GateSpec> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
    let equatorial = |phi: f64| LoopParams::new(FRAC_PI_2, phi);
    match name.to_ascii_lowercase().as_str() {
        "x" | "not" => Ok(GateSpec::SingleLoop(equatorial(0.0))),
        "h" => Ok(GateSpec::SingleLoop(LoopParams::new(FRAC_PI_4, 0.0))),
        "z" => Ok(GateSpec::SingleLoop(LoopParams::new(0.0, 0.0))),
        "s" => Ok(GateSpec::DoubleLoop(equatorial(0.0), equatorial(FRAC_PI_4))),
        "phase-shift" => {
            if !params.has_phi_prime {
                return Err(Error::param(
                    "phi_prime",
                    "phase-shift needs the second-loop azimuth (set phi-prime)",
                ));
            }
            let phi = if params.has_phi { params.phi } else { 0.0 };
            Ok(GateSpec::DoubleLoop(
                equatorial(phi),
                equatorial(params.phi_prime),
            ))
        }
        "single-pulse" => {
            if !params.has_theta {
                return Err(Error::param(
                    "theta",
                    "single-pulse needs the loop polar angle (set theta)",
                ));
            }
            let phi = if params.has_phi { params.phi } else { 0.0 };
            Ok(GateSpec::SingleLoop(LoopParams::new(params.theta, phi)))
        }
        "cz" => Ok(GateSpec::TwoQubit {
            theta: 0.0,
            phi: 0.0,
        }),
        _ => Err(Error::UnknownGate {
            name: name.to_string(),
            valid: VALID_GATES,
        }),
    }
}

/// The excited level of ion `which` (0 or 1) inside the two-ion index, used
/// when mapping decay channels.
pub fn two_ion_excited_index(which: usize, other_level: usize) -> usize {
    if which == 0 {
        EXCITED * LEVELS + other_level
    } else {
        other_level * LEVELS + EXCITED
    }
}
