//! Conserved and monitored quantities: mass, energy, modified energy,
//! Sobolev norms, the interaction Morawetz action, and the smoothing
//! commutator norm.
//!
//! Box-integral convention: every functional that is an integral over the
//! torus carries the cell volume Δx^d, so values approximate their continuum
//! counterparts directly. Energy splits as
//!
//! ```text
//! E(u) = ½‖∇u‖₂² + ¼⟨V[u], |u|²⟩,      V[u] = |x|^(-γ) * |u|²
//! ```
//!
//! and both summands are nonnegative for the defocusing coupling. The
//! modified energy evaluates E on the smoothed field Iu.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::dynamics::{hartree_potential, nonlinearity, ModelParams};
use crate::error::{LabError, Result};
use crate::grid::{spectral_derivative, Field, Grid};
use crate::symbols::{apply_symbol, i_operator, IParams, SymbolSpec};

/// ‖u‖₂² on the box, representation independent.
pub fn mass(u: &Field) -> f64 {
    u.norm_sq_lattice() * u.grid().cell_volume()
}

/// ½ Σ |ξ|²|û(ξ)|² Δx^d over reduced wavenumbers.
pub fn kinetic_energy(u: &Field) -> f64 {
    let spec = u.to_spectral();
    let g = u.grid();
    let sum: f64 = spec
        .values()
        .iter()
        .enumerate()
        .map(|(flat, v)| g.xi_norm_sq(flat) * v.norm_sqr())
        .sum();
    0.5 * sum * g.cell_volume()
}

/// ¼ ⟨V[u], |u|²⟩ on the box. Nonnegative: the convolution weight is a
/// nonnegative symbol.
pub fn potential_energy(u: &Field, mp: &ModelParams) -> Result<f64> {
    let phys = u.to_physical();
    let v = hartree_potential(&phys, mp)?;
    let sum: f64 = phys
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| a.norm_sqr() * b.re)
        .sum();
    Ok(0.25 * sum * u.grid().cell_volume())
}

pub fn energy(u: &Field, mp: &ModelParams) -> Result<f64> {
    Ok(kinetic_energy(u) + potential_energy(u, mp)?)
}

/// E(Iu): the almost-conserved quantity of the smoothing method.
pub fn modified_energy(u: &Field, p: &IParams, mp: &ModelParams) -> Result<f64> {
    energy(&i_operator(u, p), mp)
}

/// Sobolev norm with weight ⟨ξ⟩^(2s) (inhomogeneous) or |ξ|^(2s)
/// (homogeneous). The homogeneous variant with s < 0 rejects data with a
/// nonzero mean (the zero-mode weight would be infinite); an at-rounding
/// mean is treated as zero and the mode is dropped.
pub fn sobolev_norm(u: &Field, s: f64, homogeneous: bool) -> Result<f64> {
    if !s.is_finite() {
        return Err(LabError::InvalidParam(format!("sobolev order must be finite, got {s}")));
    }
    let spec = u.to_spectral();
    let g = u.grid();
    let zero_flat = g.flat_of_kvec(&vec![0i64; g.d()]);
    let scale = spec.norm_sq_lattice().sqrt();
    let mut sum = 0.0;
    for (flat, v) in spec.values().iter().enumerate() {
        let r2 = g.xi_norm_sq(flat);
        let w = if homogeneous {
            if flat == zero_flat {
                if s < 0.0 {
                    if v.norm() > 1e-12 * scale {
                        return Err(LabError::InvalidParam(
                            "homogeneous norm with negative order needs mean-free data".into(),
                        ));
                    }
                    continue;
                }
                // 0^0 = 1 keeps s = 0 equal to the L² norm
                r2.powf(s)
            } else {
                r2.powf(s)
            }
        } else {
            (1.0 + r2).powf(s)
        };
        sum += w * v.norm_sqr();
    }
    Ok((sum * g.cell_volume()).sqrt())
}

/// ∫ |u|⁴ dx on the box.
pub fn l4_norm4(u: &Field) -> f64 {
    let phys = u.to_physical();
    let sum: f64 = phys.values().iter().map(|v| {
        let q = v.norm_sqr();
        q * q
    }).sum();
    sum * u.grid().cell_volume()
}

/// Labeled time series of scalar diagnostics. Within each label, times must
/// be strictly increasing and values finite.
#[derive(Debug, Clone, Default)]
pub struct DiagnosticsSeries {
    rows: Vec<(f64, String, f64)>,
    order: Vec<String>,
    last_t: HashMap<String, f64>,
}

impl DiagnosticsSeries {
    pub fn new() -> DiagnosticsSeries {
        DiagnosticsSeries::default()
    }

    pub fn push(&mut self, t: f64, name: &str, value: f64) -> Result<()> {
        if !t.is_finite() || !value.is_finite() {
            return Err(LabError::Mismatch(format!(
                "non-finite diagnostics row ({t}, {name}, {value})"
            )));
        }
        match self.last_t.get(name) {
            Some(&prev) if prev >= t => {
                return Err(LabError::Mismatch(format!(
                    "diagnostics times for {name} must increase: {prev} then {t}"
                )));
            }
            Some(_) => {}
            None => self.order.push(name.to_string()),
        }
        self.last_t.insert(name.to_string(), t);
        self.rows.push((t, name.to_string(), value));
        Ok(())
    }

    /// Labels in first-appearance order.
    pub fn names(&self) -> &[String] {
        &self.order
    }

    pub fn rows(&self) -> &[(f64, String, f64)] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self, name: &str) -> Vec<f64> {
        self.rows.iter().filter(|r| r.1 == name).map(|r| r.0).collect()
    }

    pub fn values(&self, name: &str) -> Vec<f64> {
        self.rows.iter().filter(|r| r.1 == name).map(|r| r.2).collect()
    }

    /// sup_t |v(t) − v(0)| for one label.
    pub fn sup_deviation(&self, name: &str) -> Option<f64> {
        let vals = self.values(name);
        let first = *vals.first()?;
        vals.iter().map(|v| (v - first).abs()).fold(None, |acc, x| {
            Some(match acc {
                None => x,
                Some(a) => a.max(x),
            })
        })
    }

    /// Trapezoid rule ∫ v dt over the label's sample times.
    pub fn integrate_trapezoid(&self, name: &str) -> Option<f64> {
        let t = self.times(name);
        let v = self.values(name);
        if t.len() < 2 {
            return None;
        }
        let mut acc = 0.0;
        for i in 1..t.len() {
            acc += 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1]);
        }
        Some(acc)
    }

    /// Left-endpoint rule Σ v_i (t_{i+1} − t_i), the L¹-in-time accumulation
    /// used for commutator sums.
    pub fn accumulate_left(&self, name: &str) -> Option<f64> {
        let t = self.times(name);
        let v = self.values(name);
        if t.len() < 2 {
            return None;
        }
        let mut acc = 0.0;
        for i in 1..t.len() {
            acc += v[i - 1] * (t[i] - t[i - 1]);
        }
        Some(acc)
    }
}

/// Per-axis correlation kernel K_a(z) = z_a/|z| on centered displacement
/// representatives, 0 at z = 0. Rows with a component at the self-paired
/// index n/2 are zeroed so that K(−z) = −K(z) holds exactly on the lattice.
fn morawetz_kernel(grid: &Grid, axis: usize) -> Vec<f64> {
    let n = grid.n() as i64;
    let d = grid.d();
    let mut idx = vec![0usize; d];
    (0..grid.modes())
        .map(|flat| {
            grid.unravel(flat, &mut idx);
            let mut norm2 = 0.0;
            let mut za = 0.0;
            let mut nyquist_row = false;
            for (a, &i) in idx.iter().enumerate() {
                let t = i as i64;
                if 2 * t == n {
                    nyquist_row = true;
                }
                let c = if 2 * t <= n { t } else { t - n } as f64;
                norm2 += c * c;
                if a == axis {
                    za = c;
                }
            }
            if nyquist_row || norm2 == 0.0 {
                0.0
            } else {
                za / norm2.sqrt()
            }
        })
        .collect()
}

fn density_and_current(u: &Field) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let phys = u.to_physical();
    let rho: Vec<f64> = phys.values().iter().map(|v| v.norm_sqr()).collect();
    let mut current = Vec::with_capacity(u.grid().d());
    for a in 0..u.grid().d() {
        let du = spectral_derivative(&phys, a)?.to_physical();
        let j: Vec<f64> = phys
            .values()
            .iter()
            .zip(du.values())
            .map(|(v, dv)| (v.conj() * dv).im)
            .collect();
        current.push(j);
    }
    Ok((rho, current))
}

/// Interaction Morawetz action
///
/// ```text
/// M(t) = 4 ∫∫ K(x₁−x₂)·J(x₁) ρ(x₂) dx₁ dx₂,   ρ = |u|²,  J = Im(ū∇u)
/// ```
///
/// with K(z) = z/|z|, evaluated by circular correlation in O(M log M).
pub fn interaction_morawetz_action(u: &Field) -> Result<f64> {
    let g = u.grid().clone();
    let m = g.modes();
    let (rho, current) = density_and_current(u)?;
    let mut rho_hat: Vec<Complex64> = rho.iter().map(|&r| Complex64::new(r, 0.0)).collect();
    g.raw_dft(&mut rho_hat, true);
    let mut total = 0.0;
    for (a, j) in current.iter().enumerate() {
        let mut ker: Vec<Complex64> =
            morawetz_kernel(&g, a).iter().map(|&k| Complex64::new(k, 0.0)).collect();
        g.raw_dft(&mut ker, true);
        for (kv, rv) in ker.iter_mut().zip(&rho_hat) {
            *kv *= rv;
        }
        g.raw_dft(&mut ker, false);
        let inv_m = 1.0 / m as f64;
        total += j
            .iter()
            .zip(&ker)
            .map(|(jv, cv)| jv * cv.re * inv_m)
            .sum::<f64>();
    }
    Ok(4.0 * total * g.cell_volume().powi(2))
}

/// Direct O(M²) double sum over lattice pairs; oracle for the correlation
/// path. Guarded: refuses grids beyond 4096 points.
pub fn interaction_morawetz_action_direct(u: &Field) -> Result<f64> {
    let g = u.grid().clone();
    let m = g.modes();
    if m > 4096 {
        return Err(LabError::Budget { tuples: (m as u128) * (m as u128), budget: 4096 * 4096 });
    }
    let (rho, current) = density_and_current(u)?;
    let kernels: Vec<Vec<f64>> = (0..g.d()).map(|a| morawetz_kernel(&g, a)).collect();
    let n = g.n();
    let d = g.d();
    let mut i1 = vec![0usize; d];
    let mut i2 = vec![0usize; d];
    let mut total = 0.0;
    for j1 in 0..m {
        g.unravel(j1, &mut i1);
        for j2 in 0..m {
            g.unravel(j2, &mut i2);
            let mut disp = 0usize;
            for a in 0..d {
                disp = disp * n + (i1[a] + n - i2[a]) % n;
            }
            for (a, j) in current.iter().enumerate() {
                total += kernels[a][disp] * j[j1] * rho[j2];
            }
        }
    }
    Ok(4.0 * total * g.cell_volume().powi(2))
}

/// ∫ ‖|∇|^(−(d−3)/4) Iu‖⁴_{L⁴} dt over a snapshot trajectory (trapezoid in
/// time). At d = 3 the smoothing weight is the identity. Dimensions below 3
/// are rejected: the weight would turn into a differential operator.
pub fn morawetz_lhs(snapshots: &[(f64, Field)], p: &IParams) -> Result<f64> {
    let Some((_, first)) = snapshots.first() else {
        return Ok(0.0);
    };
    let d = first.grid().d();
    if d < 3 {
        return Err(LabError::InvalidParam(format!(
            "morawetz left side needs dimension >= 3, got {d}"
        )));
    }
    if snapshots.len() < 2 {
        return Ok(0.0);
    }
    let alpha = -((d as f64) - 3.0) / 4.0;
    let mut acc = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (t, u) in snapshots {
        let mut v = i_operator(u, p);
        if d > 3 {
            v = apply_symbol(&v, &SymbolSpec::riesz_zeroed(alpha))?;
        }
        let val = l4_norm4(&v);
        if let Some((t0, v0)) = prev {
            if *t <= t0 {
                return Err(LabError::Mismatch(format!(
                    "snapshot times must increase: {t0} then {t}"
                )));
            }
            acc += 0.5 * (val + v0) * (t - t0);
        }
        prev = Some((*t, val));
    }
    Ok(acc)
}

/// Norm of the smoothing commutator g = I(Ñ(u)) − Ñ(Iu) with Ñ(v) = V[v]·v:
/// ‖g‖₂ or, with `derivative`, ‖∇g‖₂. Vanishes when I acts as the identity
/// on every frequency entering the cubic terms.
pub fn i_commutator(u: &Field, p: &IParams, mp: &ModelParams, derivative: bool) -> Result<f64> {
    // everything in the spectral representation: applying I is then an exact
    // pointwise product, and for m = 1 both branches share every transform
    let spec = u.to_spectral();
    let commuted = i_operator(&nonlinearity(&spec, mp)?.to_spectral(), p);
    let outer = nonlinearity(&i_operator(&spec, p), mp)?.to_spectral();
    let g = crate::grid::axpy(
        Complex64::new(1.0, 0.0),
        &commuted,
        Complex64::new(-1.0, 0.0),
        &outer,
    )?;
    let vol = u.grid().cell_volume();
    if derivative {
        let mut sum = 0.0;
        for a in 0..u.grid().d() {
            sum += spectral_derivative(&g, a)?.norm_sq_lattice();
        }
        Ok((sum * vol).sqrt())
    } else {
        Ok((g.norm_sq_lattice() * vol).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Representation};
    use crate::initial_data;

    // 10-point Gauss-Legendre nodes and weights on [-1, 1]
    const GL_X: [f64; 5] = [
        0.1488743389816312,
        0.4333953941292472,
        0.6794095682990244,
        0.8650633666889845,
        0.9739065285171717,
    ];
    const GL_W: [f64; 5] = [
        0.2955242247147529,
        0.2692667193099963,
        0.2190863625159820,
        0.1494513491505806,
        0.0666713443086881,
    ];

    fn gl_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for i in 0..5 {
                acc += GL_W[i] * (f(mid + 0.5 * h * GL_X[i]) + f(mid - 0.5 * h * GL_X[i]));
            }
        }
        acc * 0.5 * h
    }

    #[test]
    fn gaussian_mass_matches_quadrature_oracle() {
        let g = make_grid(3, 64, 32.0).unwrap();
        let u = initial_data::gaussian(&g, 1.0, 1.0, &[0.0, 0.0, 0.0]);
        let one_dim = gl_integrate(|x| (-x * x).exp(), -16.0, 16.0, 64);
        let expected = one_dim.powi(3);
        let got = mass(&u);
        assert!(
            (got - expected).abs() <= 1e-8 * expected,
            "mass {got:.12e} vs quadrature {expected:.12e}"
        );
    }

    #[test]
    fn plane_wave_mass_is_amplitude_squared_times_volume() {
        let g = make_grid(2, 16, 5.0).unwrap();
        let a = 0.37;
        let u = Field::from_fn_spectral(&g, |k| {
            if k == [3, -2] {
                Complex64::new(a, 0.0) * (g.modes() as f64).sqrt()
            } else {
                Complex64::default()
            }
        });
        let got = mass(&u);
        let expected = a * a * 25.0;
        assert!((got - expected).abs() <= 1e-12 * expected);
        assert_eq!(mass(&Field::zeros(&g, Representation::Physical)), 0.0);
    }

    #[test]
    fn two_mode_energy_closed_form() {
        let g = make_grid(3, 16, 2.0 * std::f64::consts::PI).unwrap();
        let mp = ModelParams::new(3, 2.5).unwrap();
        let a1 = Complex64::new(0.9, -0.2);
        let a2 = Complex64::new(0.4, 0.7);
        let (k1, k2) = ([1i64, 0, 2], [-2i64, 1, 0]);
        let u = Field::from_fn_spectral(&g, |k| {
            let m = (g.modes() as f64).sqrt();
            if k == k1 {
                a1 * m
            } else if k == k2 {
                a2 * m
            } else {
                Complex64::default()
            }
        });
        let vol = (2.0 * std::f64::consts::PI).powi(3);
        let kin = 0.5 * (5.0 * a1.norm_sqr() + 5.0 * a2.norm_sqr()) * vol;
        let beat = 14.0f64.sqrt(); // |k1 - k2|
        let pot = 0.5 * beat.powf(mp.gamma() - 3.0) * a1.norm_sqr() * a2.norm_sqr() * vol;
        let got = energy(&u, &mp).unwrap();
        let expected = kin + pot;
        assert!(
            (got - expected).abs() <= 1e-12 * expected,
            "energy {got:.12e} vs closed form {expected:.12e}"
        );
        assert!(potential_energy(&u, &mp).unwrap() >= 0.0);
    }

    #[test]
    fn potential_energy_matches_kernel_double_sum() {
        // independent path: physical kernel from a plain DFT of the symbol,
        // then an O(M^2) double sum
        let g = make_grid(3, 8, 7.0).unwrap();
        let mp = ModelParams::new(3, 2.5).unwrap();
        let u = initial_data::random_spectrum(&g, 3, 7);
        let spec = SymbolSpec::riesz_zeroed(mp.gamma() - 3.0);
        let m = g.modes();
        let mut ker: Vec<Complex64> = (0..m)
            .map(|flat| Complex64::new(spec.eval(g.xi_norm_sq(flat).sqrt()).unwrap(), 0.0))
            .collect();
        g.raw_dft(&mut ker, false);
        for v in ker.iter_mut() {
            *v /= m as f64;
        }
        let phys = u.to_physical();
        let rho: Vec<f64> = phys.values().iter().map(|v| v.norm_sqr()).collect();
        let n = g.n();
        let mut i1 = vec![0usize; 3];
        let mut i2 = vec![0usize; 3];
        let mut direct = 0.0;
        for j1 in 0..m {
            g.unravel(j1, &mut i1);
            for j2 in 0..m {
                g.unravel(j2, &mut i2);
                let mut disp = 0usize;
                for a in 0..3 {
                    disp = disp * n + (i1[a] + n - i2[a]) % n;
                }
                direct += ker[disp].re * rho[j1] * rho[j2];
            }
        }
        direct *= 0.25 * g.cell_volume();
        let got = potential_energy(&u, &mp).unwrap();
        assert!(
            (got - direct).abs() <= 1e-9 * direct.abs().max(1.0),
            "potential {got:.12e} vs double sum {direct:.12e}"
        );
    }

    #[test]
    fn invariance_under_phase_and_translation() {
        let g = make_grid(3, 16, 12.0).unwrap();
        let mp = ModelParams::new(3, 2.5).unwrap();
        let p = IParams::new(2.0, 0.6).unwrap();
        let u = initial_data::random_spectrum(&g, 5, 11);
        let theta = Complex64::from_polar(1.0, 1.234);
        let rotated = Field::from_values(
            &g,
            Representation::Spectral,
            u.to_spectral().values().iter().map(|v| v * theta).collect(),
        )
        .unwrap();
        // translation by a lattice vector = per-mode phase in spectrum
        let shift = [2.0 * g.dx(), 0.0, 5.0 * g.dx()];
        let translated = u.map_spectral(|k, v| {
            let phase: f64 = k
                .iter()
                .zip(&shift)
                .map(|(&ka, &sa)| ka as f64 * g.dxi() * sa)
                .sum();
            v * Complex64::from_polar(1.0, -phase)
        });
        for w in [&rotated, &translated] {
            assert!((mass(w) - mass(&u)).abs() <= 1e-10 * mass(&u));
            let (e0, e1) = (energy(&u, &mp).unwrap(), energy(w, &mp).unwrap());
            assert!((e0 - e1).abs() <= 1e-10 * e0.abs());
            let (me0, me1) = (
                modified_energy(&u, &p, &mp).unwrap(),
                modified_energy(w, &p, &mp).unwrap(),
            );
            assert!((me0 - me1).abs() <= 1e-10 * me0.abs());
            let (s0, s1) = (
                sobolev_norm(&u, 0.6, false).unwrap(),
                sobolev_norm(w, 0.6, false).unwrap(),
            );
            assert!((s0 - s1).abs() <= 1e-10 * s0);
        }
    }

    #[test]
    fn modified_energy_equals_energy_on_low_spectrum() {
        let g = make_grid(3, 16, 2.0 * std::f64::consts::PI).unwrap();
        let mp = ModelParams::new(3, 2.5).unwrap();
        let p = IParams::new(4.0, 0.5).unwrap();
        // spectrum inside |xi| <= 2 < N = 4: I is the identity bit for bit
        let u = initial_data::random_spectrum(&g, 2, 3);
        assert_eq!(modified_energy(&u, &p, &mp).unwrap(), energy(&u, &mp).unwrap());
        // s = 1: m = 1 everywhere regardless of spectrum
        let p1 = IParams::new(4.0, 1.0).unwrap();
        let w = initial_data::random_spectrum(&g, 7, 4);
        assert_eq!(modified_energy(&w, &p1, &mp).unwrap(), energy(&w, &mp).unwrap());
    }

    #[test]
    fn sobolev_norm_conventions() {
        let g = make_grid(2, 16, 5.0).unwrap();
        let u = initial_data::random_spectrum(&g, 6, 19);
        let s0 = sobolev_norm(&u, 0.0, false).unwrap();
        assert!((s0 - mass(&u).sqrt()).abs() <= 1e-12 * s0);
        // plane wave, homogeneous s=1
        let a = 1.7;
        let pw = Field::from_fn_spectral(&g, |k| {
            if k == [3, 1] {
                Complex64::new(a, 0.0) * (g.modes() as f64).sqrt()
            } else {
                Complex64::default()
            }
        });
        let xi = 10.0f64.sqrt() * g.dxi();
        let expect = xi * a * 5.0; // |xi| A L^(d/2)
        let got = sobolev_norm(&pw, 1.0, true).unwrap();
        assert!((got - expect).abs() <= 1e-12 * expect);
        // identity <xi>^2 = 1 + |xi|^2
        let h1 = sobolev_norm(&u, 1.0, false).unwrap();
        let dot: f64 = sobolev_norm(&u, 1.0, true).unwrap();
        let l2 = mass(&u).sqrt();
        assert!((h1 * h1 - (l2 * l2 + dot * dot)).abs() <= 1e-10 * h1 * h1);
        // negative homogeneous order demands mean-free data
        let with_mean = Field::from_fn_spectral(&g, |k| {
            if k.iter().all(|&x| x == 0) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        });
        assert!(sobolev_norm(&with_mean, -0.5, true).is_err());
        let mean_free = u.map_spectral(|k, v| {
            if k.iter().all(|&x| x == 0) {
                Complex64::default()
            } else {
                v
            }
        });
        assert!(sobolev_norm(&mean_free, -0.5, true).is_ok());
    }

    #[test]
    fn diagnostics_series_rules() {
        let mut s = DiagnosticsSeries::new();
        s.push(0.0, "mass", 1.0).unwrap();
        s.push(0.5, "mass", 1.1).unwrap();
        s.push(0.25, "energy", 2.0).unwrap(); // other label: own clock
        assert!(s.push(0.5, "mass", 1.2).is_err());
        assert!(s.push(1.0, "mass", f64::NAN).is_err());
        s.push(1.0, "mass", 0.7).unwrap();
        assert_eq!(s.names(), &["mass".to_string(), "energy".to_string()]);
        assert_eq!(s.values("mass"), vec![1.0, 1.1, 0.7]);
        assert!((s.sup_deviation("mass").unwrap() - 0.3).abs() <= 1e-15);
        // trapezoid of (0,1),(0.5,1.1),(1,0.7)
        let integral = s.integrate_trapezoid("mass").unwrap();
        assert!((integral - (0.525 + 0.45)).abs() <= 1e-15);
        let left = s.accumulate_left("mass").unwrap();
        assert!((left - (0.5 + 0.55)).abs() <= 1e-15);
    }

    #[test]
    fn morawetz_action_vanishes_for_real_data_and_flips_under_conjugation() {
        let g = make_grid(3, 8, 10.0).unwrap();
        let real = initial_data::gaussian(&g, 1.3, 1.2, &[1.0, 0.0, -2.0]);
        let m_real = interaction_morawetz_action(&real).unwrap();
        assert!(m_real.abs() <= 1e-12, "real data gave {m_real:.3e}");
        let u = initial_data::multibump(
            &g,
            &[
                initial_data::Bump {
                    amplitude: 1.0,
                    phase: 0.0,
                    width: 1.0,
                    center: vec![-2.0, 0.0, 0.0],
                    velocity: vec![1.5, 0.0, 0.0],
                },
                initial_data::Bump {
                    amplitude: 0.8,
                    phase: 0.7,
                    width: 1.3,
                    center: vec![2.0, 1.0, 0.0],
                    velocity: vec![-1.0, 0.5, 0.0],
                },
            ],
        );
        let a = interaction_morawetz_action(&u).unwrap();
        let b = interaction_morawetz_action(&u.conj_physical()).unwrap();
        assert!((a + b).abs() <= 1e-10 * a.abs().max(1e-30), "conjugation: {a} vs {b}");
        assert!(a.abs() > 0.0);
    }

    #[test]
    fn morawetz_action_matches_double_sum_oracle() {
        let g = make_grid(3, 8, 10.0).unwrap();
        let u = initial_data::multibump(
            &g,
            &[
                initial_data::Bump {
                    amplitude: 1.0,
                    phase: 0.0,
                    width: 1.0,
                    center: vec![-2.0, -1.0, 0.0],
                    velocity: vec![2.0, 0.0, 0.5],
                },
                initial_data::Bump {
                    amplitude: 0.6,
                    phase: 1.1,
                    width: 0.8,
                    center: vec![2.0, 1.0, 1.0],
                    velocity: vec![-1.0, 1.0, 0.0],
                },
            ],
        );
        let fast = interaction_morawetz_action(&u).unwrap();
        let slow = interaction_morawetz_action_direct(&u).unwrap();
        assert!(
            (fast - slow).abs() <= 1e-9 * slow.abs().max(1.0),
            "correlation {fast:.12e} vs double sum {slow:.12e}"
        );
        // guard on big grids
        let big = make_grid(3, 32, 10.0).unwrap();
        let z = Field::zeros(&big, Representation::Physical);
        assert!(matches!(
            interaction_morawetz_action_direct(&z),
            Err(LabError::Budget { .. })
        ));
    }

    #[test]
    fn morawetz_lhs_conventions() {
        let g = make_grid(3, 8, 10.0).unwrap();
        let p = IParams::new(2.0, 0.6).unwrap();
        let u = initial_data::gaussian(&g, 1.0, 1.5, &[0.0, 0.0, 0.0]);
        assert_eq!(morawetz_lhs(&[], &p).unwrap(), 0.0);
        // constant-in-time trajectory at d = 3: T * l4_norm4(Iu)
        let traj = vec![(0.0, u.clone()), (2.5, u.clone())];
        let got = morawetz_lhs(&traj, &p).unwrap();
        let expect = 2.5 * l4_norm4(&i_operator(&u, &p));
        assert!((got - expect).abs() <= 1e-12 * expect);
        let g1 = make_grid(1, 8, 10.0).unwrap();
        let u1 = initial_data::gaussian(&g1, 1.0, 1.5, &[0.0]);
        assert!(morawetz_lhs(&[(0.0, u1.clone()), (1.0, u1)], &p).is_err());
    }

    #[test]
    fn commutator_vanishes_when_smoothing_is_inactive() {
        let g = make_grid(3, 16, 2.0 * std::f64::consts::PI).unwrap();
        let mp = ModelParams::new(3, 2.5).unwrap();
        // s = 1: I is the identity, commutator exactly zero
        let p1 = IParams::new(4.0, 1.0).unwrap();
        let u = initial_data::random_spectrum(&g, 5, 23);
        assert_eq!(i_commutator(&u, &p1, &mp, false).unwrap(), 0.0);
        assert_eq!(i_commutator(&u, &p1, &mp, true).unwrap(), 0.0);
        // spectrum under N/3: every frequency entering the cubic terms sees
        // m = 1 (support norm sqrt(3), cubic spectrum norm <= 3 sqrt(3) < 8)
        let p8 = IParams::new(8.0, 0.6).unwrap();
        let low = initial_data::random_spectrum(&g, 1, 29);
        let val = i_commutator(&low, &p8, &mp, true).unwrap();
        assert!(val <= 1e-12, "low-band commutator {val:.3e}");
        // generic rough data: strictly positive
        let p = IParams::new(4.0, 0.6).unwrap();
        let rough = initial_data::random_spectrum(&g, 7, 31);
        assert!(i_commutator(&rough, &p, &mp, true).unwrap() > 1e-8);
    }
}
