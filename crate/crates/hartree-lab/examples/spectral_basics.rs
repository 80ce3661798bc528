//! Grid and transform fundamentals: the unitary transform pair, Plancherel,
//! plane-wave spikes, and exact spectral differentiation.
//!
//!     cargo run --release --example spectral_basics

use hartree_lab::grid::{make_grid, spectral_derivative, Field};
use num_complex::Complex64;

fn main() -> hartree_lab::Result<()> {
    let grid = make_grid(2, 64, 16.0)?;
    println!(
        "grid: d={} n={} L={}  ({} modes, dx={}, dxi={:.6})",
        grid.d(),
        grid.n(),
        grid.len(),
        grid.modes(),
        grid.len() / grid.n() as f64,
        grid.dxi()
    );

    // a plane wave with lattice wavenumber k lands on exactly one mode
    let k = [3i64, -5];
    let wave = Field::from_fn_physical(&grid, |x| {
        let phase = grid.dxi() * (k[0] as f64 * x[0] + k[1] as f64 * x[1]);
        Complex64::from_polar(1.0, phase)
    });
    let spec = wave.to_spectral();
    let spike = grid.flat_of_kvec(&k);
    let expected = (grid.modes() as f64).sqrt();
    println!(
        "plane wave k={k:?}: spectrum at k = {:.12} (expect sqrt(M) = {expected:.12})",
        spec.values()[spike].re
    );
    let leak: f64 = spec
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != spike)
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max);
    println!("largest off-spike coefficient: {leak:.3e}");

    // Plancherel: the lattice l2 sum is the same in both representations
    let phys_sum = wave.norm_sq_lattice();
    let spec_sum = spec.norm_sq_lattice();
    println!("plancherel: physical {phys_sum:.12}  spectral {spec_sum:.12}");

    // round trip is exact to rounding
    let back = spec.to_physical();
    let mut worst = 0.0f64;
    for (a, b) in wave.values().iter().zip(back.values()) {
        worst = worst.max((a - b).norm());
    }
    println!("round-trip worst pointwise error: {worst:.3e}");

    // spectral derivative of the plane wave is i*xi times itself, exactly
    let d0 = spectral_derivative(&wave, 0)?;
    let xi0 = grid.dxi() * k[0] as f64;
    let mut derr = 0.0f64;
    for (d, w) in d0.to_physical().values().iter().zip(wave.values()) {
        derr = derr.max((d - Complex64::i() * xi0 * w).norm());
    }
    println!("derivative vs i*xi[0]*wave: worst error {derr:.3e}");
    Ok(())
}
