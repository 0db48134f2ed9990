//! Infidelity over the (f0e, f1e) plane for an X gate. The valley along
//! the diagonal is the homogeneous-frequency cancellation: equal
//! frequencies decouple the dark state exactly, whatever the pulse speed.

use holonomy::experiments::{frequency_grid, linear_grid, GateRun};
use holonomy::gates::{catalog, GateParams};

fn main() -> holonomy::Result<()> {
    let template = GateRun::new(catalog("X", &GateParams::default())?);
    let axis = linear_grid(2.0, 14.0, 7)?;
    let result = frequency_grid(&template, &axis, &axis, 0.02, 16)?;

    print!("{:>7}", "f0\\f1");
    for f1 in &axis {
        print!("{f1:>9.1}");
    }
    println!();
    let n = axis.len();
    for (i, f0) in axis.iter().enumerate() {
        print!("{f0:>7.1}");
        for j in 0..n {
            print!("{:>9.4}", result.sweep.points[i * n + j].stats.mean_infidelity());
        }
        println!();
    }

    println!("\nper-column optimum (the ridge):");
    for r in &result.ridge {
        println!(
            "  f0e/beta = {:>5.1}  best f1e/beta = {:>5.1}  infidelity {:.4e}",
            r.f0e_over_beta, r.f1e_opt_over_beta, r.mean_infidelity
        );
    }
    Ok(())
}
