//! The two-ion entangling gate: a single pi-area pulse on the bichromatic
//! coupling realizes CZ up to local phases. Ideal-limit check first, then
//! the same decay-versus-speed trade-off the single-qubit gates show.

use holonomy::experiments::{average_fidelity, log_grid, sweep_beta, GateRun};
use holonomy::gates::GateSpec;

fn main() -> holonomy::Result<()> {
    let cz = GateSpec::TwoQubit {
        theta: 0.0,
        phi: 0.0,
    };
    let mut ideal = GateRun::new(cz.clone());
    ideal.rwa = true;
    ideal.gamma = 0.0;
    ideal.beta = 0.1;
    let stats = average_fidelity(&ideal, 4)?;
    println!(
        "ideal limit: fidelity {:.9} on the four product inputs",
        stats.mean
    );

    let mut template = GateRun::new(cz);
    template.rwa = false;
    let betas = log_grid(0.02, 0.5, 8)?;
    let result = sweep_beta(&template, &[1e-3], &betas, 4)?;
    println!("\nwith decay, gamma/f = 1e-3:");
    println!("{:>10}  {:>12}  {:>12}", "beta/f", "infidelity", "RWA");
    for p in &result.points {
        println!(
            "{:>10.4}  {:>12.4e}  {:>12.4e}",
            p.x,
            p.stats.mean_infidelity(),
            p.rwa.unwrap().mean_infidelity(),
        );
    }
    Ok(())
}
