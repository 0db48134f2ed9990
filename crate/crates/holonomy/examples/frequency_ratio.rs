//! Slice through the frequency plane at fixed f0e: the X gate dips
//! sharply at f1e = f0e, while the RWA reference is flat because it never
//! sees the frequencies at all.

use holonomy::experiments::{frequency_ratio_sweep, linear_grid, GateRun};
use holonomy::gates::{catalog, GateParams};

fn main() -> holonomy::Result<()> {
    let template = GateRun::new(catalog("X", &GateParams::default())?);
    let ratios = linear_grid(0.7, 1.3, 13)?;
    let result = frequency_ratio_sweep(&template, &ratios, 10.0, 1e-3, 20.0, 16)?;

    println!("X gate, f0e/beta = 10, gamma/beta = 1e-3");
    println!("{:>9}  {:>12}  {:>12}", "f1e/f0e", "infidelity", "RWA");
    for p in &result.points {
        let marker = if (p.x - 1.0).abs() < 1e-9 { "  <- homogeneous" } else { "" };
        println!(
            "{:>9.3}  {:>12.4e}  {:>12.4e}{marker}",
            p.x,
            p.stats.mean_infidelity(),
            p.rwa.unwrap().mean_infidelity(),
        );
    }
    Ok(())
}
