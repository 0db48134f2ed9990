//! One holonomic gate, start to finish: pick a gate from the catalog, run
//! the pulse protocol on a probe state, and report the fidelity against
//! the ideal unitary with and without decay.

use holonomy::experiments::{gate_fidelity, GateRun};
use holonomy::gates::{catalog, GateParams};
use holonomy::sampling::{bloch_to_state, BlochSample};

fn main() -> holonomy::Result<()> {
    let spec = catalog("H", &GateParams::default())?;
    let psi = bloch_to_state(&BlochSample {
        x: 0.6,
        y: 0.0,
        z: 0.8,
    });
    let ideal = spec.embedded_ideal();

    let mut run = GateRun::new(spec);
    run.beta = 0.1; // pulse length 10/beta in units of 1/f
    run.f0e = 1.0;
    run.f1e = 1.0;

    for gamma in [0.0, 1e-4, 1e-3, 1e-2] {
        run.gamma = gamma;
        let rho = run.run_state(&psi)?;
        let f = gate_fidelity(&rho, &ideal, &psi)?;
        println!("gamma/f = {gamma:<7}  fidelity = {f:.9}  (infidelity {:.3e})", 1.0 - f);
    }

    // The same gate with the counter-rotating terms dropped barely notices
    // the drive at these frequencies.
    run.gamma = 0.0;
    run.rwa = true;
    let rho = run.run_state(&psi)?;
    println!(
        "RWA reference          fidelity = {:.9}",
        gate_fidelity(&rho, &ideal, &psi)?
    );
    Ok(())
}
