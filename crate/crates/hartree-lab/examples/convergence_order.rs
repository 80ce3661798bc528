//! Second-order convergence of the split step: halving dt divides the energy
//! drift by about four. The rk4 reference stepper sits near rounding on the
//! same run, which is what makes it useful as a cross-check.
//!
//!     cargo run --release --example convergence_order

use hartree_lab::dynamics::{evolve, EvolveConfig, Integrator, ModelParams, Probe};
use hartree_lab::experiments::fit_log2_slope;
use hartree_lab::initial_data::gaussian;
use hartree_lab::make_grid;

fn main() -> hartree_lab::Result<()> {
    let grid = make_grid(2, 64, 16.0)?;
    let mp = ModelParams::new(2, 1.5)?;
    let u0 = gaussian(&grid, 1.2, 1.0, &[0.0; 2]);

    println!("{:>10}  {:>14}  {:>14}", "dt", "strang drift", "rk4 drift");
    let mut pts = Vec::new();
    for &dt in &[5e-3, 2.5e-3, 1.25e-3] {
        let mut drift = [0.0; 2];
        for (slot, integ) in [Integrator::Strang, Integrator::ReferenceRk4].iter().enumerate() {
            let mut cfg = EvolveConfig::new(dt, 0.5);
            cfg.integrator = *integ;
            cfg.sample_every = (0.1 / dt).round() as usize;
            let out = evolve(&u0, &mp, &cfg, &[Probe::Energy])?;
            drift[slot] = out.series.sup_deviation("energy").unwrap();
        }
        println!("{dt:>10.1e}  {:>14.6e}  {:>14.6e}", drift[0], drift[1]);
        pts.push((dt, drift[0]));
    }

    let slope = fit_log2_slope(&pts).unwrap();
    println!("\nlog2-log2 slope of strang drift vs dt: {slope:.3}  (2.0 = second order)");
    Ok(())
}
