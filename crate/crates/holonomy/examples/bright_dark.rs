//! The bright/dark decomposition that makes the holonomy work. Under the
//! RWA only the bright combination couples to |e>; keeping the
//! counter-rotating terms leaks a residual (e, d) coupling unless the two
//! transition frequencies coincide.

use std::f64::consts::PI;

use holonomy::model::{
    bright_dark_states, hamiltonian_bright_dark, hamiltonian_single, DriveConfig, LoopParams,
    PulseShape, EXCITED, LEVELS,
};
use holonomy::ComplexMatrix;

/// max_i |(H v)_i| with H and v both in the bare level ordering.
fn leak(h: &ComplexMatrix, v: &ComplexMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..LEVELS {
        let mut acc = holonomy::c64(0.0, 0.0);
        for k in 0..LEVELS {
            acc += h[(i, k)] * v[(k, 0)];
        }
        worst = worst.max(acc.norm());
    }
    worst
}

fn main() -> holonomy::Result<()> {
    let lp = LoopParams::new(PI / 3.0, 0.7);
    let pulse = PulseShape::new(1.0);
    let t = 9.0; // near the pulse peak
    let (bright, dark) = bright_dark_states(&lp);

    let rwa = DriveConfig::new(12.0, 8.0, 0.0, true)?;
    let h = hamiltonian_single(t, &lp, &pulse, &rwa);
    println!("RWA:             ||H|b>|| = {:.3e}", leak(&h, &bright));
    println!("                 ||H|d>|| = {:.3e}", leak(&h, &dark));

    // In the (b, d, e, g) ordering the leak is one matrix element.
    let full = DriveConfig::new(12.0, 8.0, 0.0, false)?;
    let h = hamiltonian_bright_dark(t, &lp, &pulse, &full);
    println!("full, f0 != f1:  (e,d) element = {:.6e}", h[(EXCITED, 1)].norm());

    let equal = DriveConfig::new(10.0, 10.0, 0.0, false)?;
    let h = hamiltonian_bright_dark(t, &lp, &pulse, &equal);
    println!("full, f0 == f1:  (e,d) element = {:e}", h[(EXCITED, 1)].norm());
    println!("    equal frequencies cancel the dark coupling identically");
    Ok(())
}
