//! The scaling bookkeeping used by threshold sweeps: the symmetry
//! u_λ(x) = λ^{-(d+2-γ)/2} u(x/λ), the threshold-to-scale map λ(N), the
//! regularity floor s*(γ), and the window-count estimate. Power laws for
//! mass and the homogeneous H¹ seminorm are checked on a live field.
//!
//!     cargo run --release --example rescaling_bookkeeping

use hartree_lab::dynamics::ModelParams;
use hartree_lab::experiments::{choose_lambda, interval_count, rescale, s_star};
use hartree_lab::functionals::{mass, sobolev_norm};
use hartree_lab::initial_data::gaussian;
use hartree_lab::make_grid;

fn main() -> hartree_lab::Result<()> {
    let mp = ModelParams::new(3, 2.5)?;
    println!("gamma = {}: scaling-critical floor s* = {:.6}\n", mp.gamma(), s_star(mp.gamma()));

    println!("{:>6}  {:>12}  {:>16}", "N", "lambda(N)", "windows (K=1, mu=0.1)");
    for &n_thr in &[4.0, 16.0, 64.0] {
        let lam = choose_lambda(n_thr, 0.5, &mp)?;
        println!("{n_thr:>6}  {lam:>12.4}  {:>16.1}", interval_count(1.0, lam, mp.gamma(), 0.1));
    }

    // live check of the power laws: mass scales by lambda^(gamma-2), the
    // homogeneous H1 seminorm by lambda^((gamma-4)/2)
    let grid = make_grid(2, 128, 32.0)?;
    let mp2 = ModelParams::new(2, 1.5)?;
    let u = gaussian(&grid, 1.0, 1.0, &[0.0; 2]);
    println!("\nd=2, gamma=1.5, lambda=2 on a {}^2 grid:", grid.n());
    let v = rescale(&u, 2.0, &mp2)?;
    let mass_ratio = mass(&v) / mass(&u);
    let h1_ratio = sobolev_norm(&v, 1.0, true)? / sobolev_norm(&u, 1.0, true)?;
    let lam: f64 = 2.0;
    println!(
        "mass ratio {mass_ratio:.10}  expected lambda^(gamma-2) = {:.10}",
        lam.powf(mp2.gamma() - 2.0)
    );
    println!(
        "H1 ratio   {h1_ratio:.10}  expected lambda^((gamma-4)/2) = {:.10}",
        lam.powf((mp2.gamma() - 4.0) / 2.0)
    );

    // the support guard: spreading a wide profile must fail loudly
    let wide = gaussian(&grid, 1.0, 4.0, &[0.0; 2]);
    match rescale(&wide, 4.0, &mp2) {
        Err(e) => println!("\nwide profile at lambda=4 refused: {e}"),
        Ok(_) => println!("\nunexpected: wide profile fit after spreading"),
    }
    Ok(())
}
