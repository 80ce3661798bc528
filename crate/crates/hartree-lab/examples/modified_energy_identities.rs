//! The modified energy and its multilinear anatomy, all on one small grid:
//!
//!   * E(Iu) splits exactly into the order-2 and order-4 constrained forms;
//!   * the differentiation law moves a time derivative into the multiplier;
//!   * d/dt E(Iu) equals the order-4 plus order-6 increment forms, the
//!     discrete skeleton of the almost-conservation estimate;
//!   * both increment forms vanish when the data sits below the threshold.
//!
//!     cargo run --release --example modified_energy_identities

use hartree_lab::dynamics::ModelParams;
use hartree_lab::functionals::modified_energy;
use hartree_lab::initial_data::random_spectrum;
use hartree_lab::multilinear::{
    diff_law_residual, instantaneous_increment_residual, kinetic_multiplier, lambda_k_bruteforce,
    lambda_k_fft, m4_multiplier, m6_multiplier, quartic_energy_multiplier,
};
use hartree_lab::{make_grid, IParams};

fn main() -> hartree_lab::Result<()> {
    let grid = make_grid(3, 8, 6.0)?;
    let mp = ModelParams::new(3, 2.5)?;
    let p = IParams::new(2.0, 0.6)?;
    let u = random_spectrum(&grid, 3, 2024);

    let lam2 = lambda_k_fft(&kinetic_multiplier(&p, 3), &u)?;
    let lam4 = lambda_k_fft(&quartic_energy_multiplier(&p, &mp), &u)?;
    let etilde = modified_energy(&u, &p, &mp)?;
    println!("order-2 form           {lam2:+.15e}");
    println!("order-4 form           {lam4:+.15e}");
    println!("sum                    {:+.15e}", lam2 + lam4);
    println!("modified energy E(Iu)  {etilde:+.15e}");
    println!("decomposition residual {:.3e}\n", ((lam2 + lam4) - etilde).abs() / etilde.abs());

    println!("differentiation law residual      {:.3e}", diff_law_residual(&u, &mp, &p)?);
    println!(
        "production identity residual      {:.3e}\n",
        instantaneous_increment_residual(&u, &p, &mp)?
    );

    // the increment multipliers against direct enumeration, and their
    // vanishing below the threshold (band data, N = 8 dominates every chain)
    let m4 = m4_multiplier(&p, &mp);
    let m6 = m6_multiplier(&p, &mp);
    let g4 = make_grid(3, 4, 5.0)?;
    let w = random_spectrum(&g4, 1, 7);
    println!(
        "order-4 plan vs enumeration: {:+.12e} vs {:+.12e}",
        lambda_k_fft(&m4, &w)?,
        lambda_k_bruteforce(&m4, &vec![w.clone(); 4])?
    );
    println!(
        "order-6 plan vs enumeration: {:+.12e} vs {:+.12e}",
        lambda_k_fft(&m6, &w)?,
        lambda_k_bruteforce(&m6, &vec![w.clone(); 6])?
    );

    let p8 = IParams::new(8.0, 0.6)?;
    let low = random_spectrum(&grid, 1, 13);
    let v4 = lambda_k_bruteforce(&m4_multiplier(&p8, &mp), &vec![low.clone(); 4])?;
    let v6 = lambda_k_fft(&m6_multiplier(&p8, &mp), &low)?;
    println!("\nbelow threshold: order-4 enumeration = {v4:+.1e}, order-6 fft = {v6:+.1e}");
    Ok(())
}
