//! Deterministic input-state ensembles: a Fibonacci lattice on the Bloch
//! sphere for single-qubit averages and the four |++>-type products for the
//! entangling gate.

use crate::error::{Error, Result};
use crate::linalg::{c64, C64, ComplexMatrix};

/// Golden ratio, the azimuthal step of the lattice in turns.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

/// A lattice node with its Cartesian coordinates on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochSample {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// n near-uniform nodes: latitudes z_k = 1 - (2k - 1)/n for k = 1..n and
/// azimuths advancing by the golden angle. The azimuth index is centered on
/// the equator, which keeps every uniformity moment of the plain golden
/// spiral (the whole set is just rigidly rotated about z) while making the
/// set exactly invariant under (x, y, z) -> (x, -y, -z): node k maps onto
/// node n + 1 - k. Symmetry-related gate averages then agree without any
/// sampling bias.
pub fn fibonacci_nodes(n: usize) -> Result<Vec<BlochSample>> {
    if n == 0 {
        return Err(Error::param("n", "need at least one node"));
    }
    let mut nodes = Vec::with_capacity(n);
    let mid = 0.5 * (n as f64 + 1.0);
    for k in 1..=n {
        let z = 1.0 - (2.0 * k as f64 - 1.0) / n as f64;
        let turns = GOLDEN_RATIO * (k as f64 - mid);
        // Reduce to [-1/2, 1/2] turns before scaling; keeps the trig
        // argument small and the k <-> n+1-k pair exactly negated.
        let azimuth = std::f64::consts::TAU * (turns - turns.round());
        let r = (1.0 - z * z).max(0.0).sqrt();
        nodes.push(BlochSample {
            x: r * azimuth.cos(),
            y: r * azimuth.sin(),
            z,
        });
    }
    Ok(nodes)
}

/// Pure qubit state for a Bloch point, embedded in the four-level space:
/// cos(t/2)|0> + e^{i p} sin(t/2)|1> with the poles mapping to |0> and |1>.
pub fn bloch_to_state(sample: &BlochSample) -> ComplexMatrix {
    let polar = sample.z.clamp(-1.0, 1.0).acos();
    let azimuth = sample.y.atan2(sample.x);
    let zero = C64::default();
    ComplexMatrix::column(&[
        c64((0.5 * polar).cos(), 0.0),
        C64::from_polar((0.5 * polar).sin(), azimuth),
        zero,
        zero,
    ])
}

/// The four product states (|0> +- |1>)/sqrt(2) per ion, embedded as
/// 16-component columns; CZ maps each onto a maximally entangled state.
pub fn two_qubit_inputs() -> Vec<ComplexMatrix> {
    let w = 0.5f64.sqrt();
    let mut inputs = Vec::with_capacity(4);
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            let ion = |s: f64| {
                ComplexMatrix::column(&[c64(w, 0.0), c64(s * w, 0.0), C64::default(), C64::default()])
            };
            inputs.push(ion(s1).kron(&ion(s2)));
        }
    }
    inputs
}
