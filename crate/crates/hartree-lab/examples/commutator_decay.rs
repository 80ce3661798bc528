//! The commutator [I, nonlinearity] measured directly: I(N(u)) - N(Iu).
//! It is identically zero when the smoothing is inactive (s = 1, or data
//! below the threshold) and its norm decays as the threshold N grows, the
//! quantitative engine behind almost conservation.
//!
//!     cargo run --release --example commutator_decay

use hartree_lab::dynamics::ModelParams;
use hartree_lab::experiments::fit_log2_slope;
use hartree_lab::functionals::i_commutator;
use hartree_lab::initial_data::{rough_noise, RoughSpec};
use hartree_lab::{make_grid, IParams};

fn main() -> hartree_lab::Result<()> {
    let grid = make_grid(1, 2048, 64.0)?;
    let mp = ModelParams::new(1, 0.5)?;
    let spec = RoughSpec { s_data: 0.6, shells: 6, envelope_width: 2.0, amplitude: 1.0 };
    let u = rough_noise(&grid, &spec, 5)?;

    // s = 1: I is the identity, both commutator flavors are bitwise zero
    let p1 = IParams::new(8.0, 1.0)?;
    println!(
        "s = 1 sanity: |[I,N]u|_L2 = {:.1e}, |grad [I,N]u|_L2 = {:.1e}\n",
        i_commutator(&u, &p1, &mp, false)?,
        i_commutator(&u, &p1, &mp, true)?
    );

    println!("{:>6}  {:>14}  {:>14}", "N", "l2 norm", "grad l2 norm");
    let mut pts = Vec::new();
    for &n_thr in &[4.0, 8.0, 16.0, 32.0] {
        let p = IParams::new(n_thr, 0.6)?;
        let c0 = i_commutator(&u, &p, &mp, false)?;
        let c1 = i_commutator(&u, &p, &mp, true)?;
        println!("{n_thr:>6}  {c0:>14.6e}  {c1:>14.6e}");
        pts.push((n_thr, c1));
    }
    let slope = fit_log2_slope(&pts).unwrap();
    println!("\nlog2 slope of the gradient commutator vs N: {slope:.3}");
    Ok(())
}
