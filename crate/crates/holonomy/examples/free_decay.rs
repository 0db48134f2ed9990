//! Spontaneous emission without a drive: start in |e>, let the Lindblad
//! term drain it into the sink level, and compare against the closed-form
//! exponential at a few times.

use holonomy::model::{EXCITED, GROUND_SINK, LEVELS};
use holonomy::solver::{amplitude_damping_channels, integrate, DensityMatrix, IntegratorSettings};
use holonomy::{c64, ComplexMatrix};

fn main() -> holonomy::Result<()> {
    let gamma = 0.5;
    let mut psi = ComplexMatrix::zeros(LEVELS, 1);
    psi[(EXCITED, 0)] = c64(1.0, 0.0);
    let rho0 = DensityMatrix::from_pure(&psi)?;
    let channels = amplitude_damping_channels(LEVELS, gamma)?;
    let settings = IntegratorSettings::default();

    println!("{:>6}  {:>12}  {:>12}  {:>12}", "t", "P(e)", "exp(-gt)", "P(sink)");
    for &t in &[0.5, 1.0, 2.0, 5.0, 10.0] {
        let rho = integrate(
            &rho0,
            |_, h: &mut ComplexMatrix| h.set_zero(),
            &channels,
            0.0,
            t,
            &settings,
        )?;
        println!(
            "{t:>6.1}  {:>12.6e}  {:>12.6e}  {:>12.6}",
            rho.population(EXCITED),
            (-gamma * t).exp(),
            rho.population(GROUND_SINK),
        );
    }
    Ok(())
}
