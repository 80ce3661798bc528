//! The frequency-smoothing operator I: its multiplier profile m, exactness
//! below the threshold, and how it damps a rough field's high shells.
//!
//!     cargo run --release --example smoothing_operator

use hartree_lab::initial_data::{rough_noise, RoughSpec};
use hartree_lab::symbols::{lp_project, lp_shell_count, monotonicity_probe};
use hartree_lab::{i_operator, m_eval, make_grid, IParams};

fn main() -> hartree_lab::Result<()> {
    let p = IParams::new(8.0, 0.6)?;
    println!("multiplier m(xi) = min(1, (N/|xi|)^(1-s)) with N = 8, s = 0.6\n");
    println!("{:>8}  {:>10}", "|xi|", "m");
    for r in [0.0, 2.0, 8.0, 12.0, 16.0, 32.0, 64.0, 256.0] {
        println!("{r:>8}  {:>10.6}", m_eval(r, &p));
    }
    println!(
        "\nm is nonincreasing and m(xi)*|xi|^(1-s) is nondecreasing: {}",
        monotonicity_probe(&p, 1.0 - 0.6)
    );

    let grid = make_grid(1, 1024, 64.0)?;
    let spec = RoughSpec { s_data: 0.55, shells: 5, envelope_width: 4.0, amplitude: 1.0 };
    let u = rough_noise(&grid, &spec, 11)?;
    let iu = i_operator(&u, &p);

    // per-shell l2 content before and after smoothing: identity through the
    // threshold shell, contraction above it
    println!("\nshell-by-shell l2 mass on a rough field (N sits in shell 3):");
    println!("{:>6}  {:>12}  {:>12}  {:>8}", "shell", "u", "Iu", "ratio");
    for j in 0..lp_shell_count(&grid).min(9) {
        let a = lp_project(&u, j).norm_sq_lattice().sqrt();
        let b = lp_project(&iu, j).norm_sq_lattice().sqrt();
        let ratio = if a > 0.0 { b / a } else { 1.0 };
        println!("{j:>6}  {a:>12.6e}  {b:>12.6e}  {ratio:>8.5}");
    }
    Ok(())
}
