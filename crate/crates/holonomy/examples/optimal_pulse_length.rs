//! Locate the best inverse pulse length for several decay rates. The
//! optimum drifts toward faster pulses as decay strengthens: less time
//! exposed, at the price of more counter-rotating error.

use holonomy::experiments::{find_beta_opt, GateRun};
use holonomy::gates::{catalog, GateParams};

fn main() -> holonomy::Result<()> {
    let template = GateRun::new(catalog("S", &GateParams::default())?);
    println!("{:>10}  {:>10}  {:>12}", "gamma/f", "beta_opt/f", "infidelity");
    for gamma in [1e-4, 3e-4, 1e-3, 3e-3] {
        let (beta, inf) = find_beta_opt(&template, gamma, (0.03, 0.3), 24, 20)?;
        println!("{gamma:>10.0e}  {beta:>10.4}  {inf:>12.4e}");
    }
    Ok(())
}
