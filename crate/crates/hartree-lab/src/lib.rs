//! Pseudospectral laboratory for the defocusing Hartree equation
//!
//! ```text
//! i·∂_t u + Δu = (|x|^(-γ) * |u|²) u        on the torus [-L/2, L/2)^d
//! ```
//!
//! built around a frequency-smoothing operator I (multiplier m(ξ), identity
//! below a threshold N) and the modified energy Ẽ(u) = E(I·u). The crate
//! provides the lattice spectral kernel, the multiplier algebra, symplectic
//! split-step evolution, conserved/almost-conserved functionals, exact
//! frequency-constrained multilinear forms Λ_k with both brute-force and
//! FFT-factorized evaluation, interaction Morawetz diagnostics, and the
//! rescaling bookkeeping used by threshold sweeps.
//!
//! Start with the runnable examples (`cargo run --release --example ...`):
//! each one demonstrates a major capability end to end. A thin CLI binary
//! (`hartree-lab`) exposes the same machinery as subcommands
//! `simulate`, `verify`, `sweep`, `morawetz`, `report`.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod grid;
pub mod initial_data;
pub mod io;
pub mod multilinear;
pub mod symbols;
pub mod verify;

pub use error::{LabError, Result};
pub use grid::{make_grid, Field, Grid, Representation};
pub use symbols::{apply_symbol, i_operator, lp_project, m_eval, IParams, SymbolSpec};
