//! Initial-data families: smooth Gaussians, multi-bump superpositions with
//! momenta, and a seed-reproducible rough family emulating H^s data.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::grid::{Field, Grid};

/// A·exp(−|x−c|²/(2w²)). Panics if `center` does not match the grid
/// dimension.
pub fn gaussian(grid: &Grid, amplitude: f64, width: f64, center: &[f64]) -> Field {
    assert_eq!(center.len(), grid.d(), "center length vs grid dimension");
    assert!(width > 0.0, "gaussian width must be positive");
    let inv = 1.0 / (2.0 * width * width);
    Field::from_fn_physical(grid, |x| {
        let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
        Complex64::new(amplitude * (-r2 * inv).exp(), 0.0)
    })
}

/// One Gaussian bump with carrier phase and momentum.
#[derive(Debug, Clone)]
pub struct Bump {
    pub amplitude: f64,
    pub phase: f64,
    pub width: f64,
    pub center: Vec<f64>,
    pub velocity: Vec<f64>,
}

/// Σ_b A_b e^{iφ_b} e^{−|x−c_b|²/(2w_b²)} e^{i v_b·x}.
pub fn multibump(grid: &Grid, bumps: &[Bump]) -> Field {
    for b in bumps {
        assert_eq!(b.center.len(), grid.d(), "bump center length vs grid dimension");
        assert_eq!(b.velocity.len(), grid.d(), "bump velocity length vs grid dimension");
        assert!(b.width > 0.0, "bump width must be positive");
    }
    Field::from_fn_physical(grid, |x| {
        bumps
            .iter()
            .map(|b| {
                let inv = 1.0 / (2.0 * b.width * b.width);
                let r2: f64 = x.iter().zip(&b.center).map(|(a, c)| (a - c) * (a - c)).sum();
                let carrier: f64 = x.iter().zip(&b.velocity).map(|(a, v)| a * v).sum();
                Complex64::from_polar(b.amplitude * (-r2 * inv).exp(), b.phase + carrier)
            })
            .sum()
    })
}

/// Rough family: dyadic-shell noise with per-mode coefficients
/// 2^(−j(s_data + d/2)) and independent uniform phases, localized by a
/// Gaussian envelope. Emulates H^{s_data} data: shell j contributes O(1) to
/// the H^{s_data} norm, so higher norms diverge as shells are added.
#[derive(Debug, Clone, PartialEq)]
pub struct RoughSpec {
    pub s_data: f64,
    /// highest dyadic shell included; modes with |ξ| > 2^shells are silent
    pub shells: u32,
    pub envelope_width: f64,
    pub amplitude: f64,
}

impl RoughSpec {
    pub fn new(s_data: f64, shells: u32) -> RoughSpec {
        RoughSpec { s_data, shells, envelope_width: 2.0, amplitude: 1.0 }
    }
}

/// Draw the rough field. Deterministic in (grid, spec, seed). The shell cap
/// must sit strictly below the Nyquist frequency so the family never touches
/// the unpaired Nyquist rows.
pub fn rough_noise(grid: &Grid, spec: &RoughSpec, seed: u64) -> Result<Field> {
    if !spec.s_data.is_finite() || !spec.amplitude.is_finite() || !(spec.envelope_width > 0.0) {
        return Err(LabError::InvalidParam(format!("bad rough-data spec {spec:?}")));
    }
    let cap = (2.0f64).powi(spec.shells as i32);
    if cap >= grid.nyquist() {
        return Err(LabError::InvalidParam(format!(
            "shell cap 2^{} = {cap} must stay below the Nyquist frequency {}",
            spec.shells,
            grid.nyquist()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.d();
    let half = grid.n() as i64 / 2;
    let mut k = vec![0i64; d];
    let mut vals = vec![Complex64::default(); grid.modes()];
    for (flat, v) in vals.iter_mut().enumerate() {
        grid.kvec(flat, &mut k);
        if k.iter().any(|&ka| ka == -half) {
            continue;
        }
        let r = grid.xi_norm_sq(flat).sqrt();
        if r > cap {
            continue;
        }
        let j = if r <= 1.0 { 0 } else { r.log2().ceil() as i32 };
        let weight = (2.0f64).powi(j).powf(-(spec.s_data + d as f64 / 2.0));
        let theta = rng.gen::<f64>() * std::f64::consts::TAU;
        *v = Complex64::from_polar(spec.amplitude * weight, theta);
    }
    let noise = Field::from_values(grid, crate::grid::Representation::Spectral, vals)?;
    let phys = noise.to_physical();
    let inv = 1.0 / (2.0 * spec.envelope_width * spec.envelope_width);
    let mut idx = vec![0usize; d];
    let enveloped = phys
        .values()
        .iter()
        .enumerate()
        .map(|(flat, v)| {
            grid.unravel(flat, &mut idx);
            let r2: f64 = idx.iter().map(|&i| grid.x_of(i) * grid.x_of(i)).sum();
            v * (-r2 * inv).exp()
        })
        .collect();
    Field::from_values(grid, crate::grid::Representation::Physical, enveloped)
}

/// Uniform random coefficients on the block |k_a| ≤ min(max_axis, n/2 − 1)
/// of integer wavenumbers, Nyquist rows silent. Test and experiment helper.
pub fn random_spectrum(grid: &Grid, max_axis: i64, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = max_axis.min(grid.n() as i64 / 2 - 1);
    let d = grid.d();
    let mut k = vec![0i64; d];
    let mut vals = vec![Complex64::default(); grid.modes()];
    for (flat, v) in vals.iter_mut().enumerate() {
        grid.kvec(flat, &mut k);
        if k.iter().all(|&ka| ka.abs() <= cap) {
            *v = Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0);
        }
    }
    Field::from_values(grid, crate::grid::Representation::Spectral, vals).expect("sized buffer")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{mass, sobolev_norm};
    use crate::grid::make_grid;

    #[test]
    fn rough_noise_is_seed_reproducible_and_band_limited() {
        let g = make_grid(3, 32, 24.0).unwrap();
        let spec = RoughSpec::new(0.6, 2);
        let a = rough_noise(&g, &spec, 42).unwrap();
        let b = rough_noise(&g, &spec, 42).unwrap();
        let c = rough_noise(&g, &spec, 43).unwrap();
        assert_eq!(a.to_spectral().values(), b.to_spectral().values());
        let diff: f64 = a
            .values()
            .iter()
            .zip(c.to_physical().values())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        assert!(diff > 0.0, "different seeds must differ");
        assert!(mass(&a) > 0.0);
    }

    #[test]
    fn rough_noise_rejects_shells_at_nyquist() {
        let g = make_grid(1, 16, 2.0 * std::f64::consts::PI).unwrap();
        // nyquist = 8: shells = 3 caps at 8, not allowed
        assert!(rough_noise(&g, &RoughSpec::new(0.5, 3), 1).is_err());
        assert!(rough_noise(&g, &RoughSpec::new(0.5, 2), 1).is_ok());
    }

    #[test]
    fn rough_family_has_divergent_h1_character() {
        // doubling the shell count grows H^1 much faster than H^s
        let g = make_grid(1, 256, 2.0 * std::f64::consts::PI).unwrap();
        let s = 0.5;
        let few = rough_noise(&g, &RoughSpec::new(s, 3), 7).unwrap();
        let many = rough_noise(&g, &RoughSpec::new(s, 6), 7).unwrap();
        let hs_ratio = sobolev_norm(&many, s, false).unwrap() / sobolev_norm(&few, s, false).unwrap();
        let h1_ratio = sobolev_norm(&many, 1.0, false).unwrap() / sobolev_norm(&few, 1.0, false).unwrap();
        assert!(hs_ratio < 1.25, "H^s should barely move, grew by {hs_ratio:.3}");
        assert!(h1_ratio > 1.8, "H^1 should keep growing, grew by {h1_ratio:.3}");
    }

    #[test]
    fn multibump_reduces_to_gaussian() {
        let g = make_grid(2, 16, 8.0).unwrap();
        let a = gaussian(&g, 1.2, 0.9, &[0.5, -1.0]);
        let b = multibump(
            &g,
            &[Bump {
                amplitude: 1.2,
                phase: 0.0,
                width: 0.9,
                center: vec![0.5, -1.0],
                velocity: vec![0.0, 0.0],
            }],
        );
        assert_eq!(a.values(), b.values());
    }
}
