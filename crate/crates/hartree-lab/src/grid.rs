//! Periodic lattice, complex fields and the unitary Fourier transform.
//!
//! The torus is [-L/2, L/2)^d sampled with n points per axis (n a power of
//! two), lattice frequencies ξ_k = (2π/L)·k with integer k in [-n/2, n/2).
//! Both transform directions carry 1/√M (M = n^d total modes) so Plancherel
//! is exact: Σ|u_j|² = Σ|û_k|². A plane wave e^{iξ_k·x} of amplitude A maps
//! to a single spike of value A·√M at slot k.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{LabError, Result};

/// Which space the values of a [`Field`] live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Physical,
    Spectral,
}

struct GridInner {
    d: usize,
    n: usize,
    len: f64,
    /// strides[a] = n^(d-1-a); axis 0 is slowest (row-major).
    strides: Vec<usize>,
    /// wavenumber of storage slot m along one axis, in [-n/2, n/2)
    wavenumbers: Vec<i64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Periodic grid shared by fields; cheap to clone.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid")
            .field("d", &self.d())
            .field("n", &self.n())
            .field("len", &self.len())
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.d() == other.d() && self.n() == other.n() && self.len() == other.len()
    }
}

/// Build a grid after validating d >= 1, n a power of two >= 4, L > 0.
pub fn make_grid(d: usize, n: usize, len: f64) -> Result<Grid> {
    if d < 1 {
        return Err(LabError::InvalidGrid("dimension must be >= 1".into()));
    }
    if n < 4 || !n.is_power_of_two() {
        return Err(LabError::InvalidGrid(format!(
            "modes per axis must be a power of two >= 4, got {n}"
        )));
    }
    if !(len > 0.0) || !len.is_finite() {
        return Err(LabError::InvalidGrid(format!("box length must be positive, got {len}")));
    }
    // guard against absurd allocations before they panic somewhere deeper
    let modes = (n as u128).checked_pow(d as u32).ok_or_else(|| {
        LabError::InvalidGrid(format!("n^d overflows: n = {n}, d = {d}"))
    })?;
    if modes > (1u128 << 28) {
        return Err(LabError::InvalidGrid(format!(
            "grid has {modes} modes; refusing more than 2^28"
        )));
    }

    let mut strides = vec![0usize; d];
    let mut s = 1usize;
    for a in (0..d).rev() {
        strides[a] = s;
        s *= n;
    }
    let wavenumbers: Vec<i64> = (0..n)
        .map(|m| if m < n / 2 { m as i64 } else { m as i64 - n as i64 })
        .collect();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    Ok(Grid {
        inner: Arc::new(GridInner { d, n, len, strides, wavenumbers, forward, inverse }),
    })
}

impl Grid {
    pub fn d(&self) -> usize {
        self.inner.d
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    /// Box side length L.
    pub fn len(&self) -> f64 {
        self.inner.len
    }

    /// Total number of lattice points / modes, M = n^d.
    pub fn modes(&self) -> usize {
        self.inner.n.pow(self.inner.d as u32)
    }

    /// Physical mesh spacing Δx = L/n.
    pub fn dx(&self) -> f64 {
        self.inner.len / self.inner.n as f64
    }

    /// Frequency spacing Δξ = 2π/L.
    pub fn dxi(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.inner.len
    }

    /// Largest resolved frequency magnitude per axis, (2π/L)·(n/2).
    pub fn nyquist(&self) -> f64 {
        self.dxi() * (self.inner.n / 2) as f64
    }

    /// Quadrature weight Δx^d for lattice sums standing in for integrals.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.inner.d as i32)
    }

    /// Physical coordinate of index j along one axis: -L/2 + j·Δx.
    pub fn x_of(&self, j: usize) -> f64 {
        -0.5 * self.inner.len + j as f64 * self.dx()
    }

    /// Integer wavenumber of storage slot m along one axis.
    pub fn k_of(&self, m: usize) -> i64 {
        self.inner.wavenumbers[m]
    }

    /// Storage slot of an integer wavenumber (must already be reduced).
    pub fn slot_of(&self, k: i64) -> usize {
        if k >= 0 {
            k as usize
        } else {
            (k + self.inner.n as i64) as usize
        }
    }

    /// Reduce an arbitrary integer wavenumber to its representative in [-n/2, n/2).
    pub fn reduce(&self, k: i64) -> i64 {
        let n = self.inner.n as i64;
        let half = n / 2;
        (((k + half) % n + n) % n) - half
    }

    /// Decompose a flat index into per-axis storage indices.
    pub fn unravel(&self, flat: usize, out: &mut [usize]) {
        debug_assert_eq!(out.len(), self.inner.d);
        for (a, o) in out.iter_mut().enumerate() {
            *o = (flat / self.inner.strides[a]) % self.inner.n;
        }
    }

    /// Integer wavenumber vector of a flat spectral index.
    pub fn kvec(&self, flat: usize, out: &mut [i64]) {
        debug_assert_eq!(out.len(), self.inner.d);
        for (a, o) in out.iter_mut().enumerate() {
            let m = (flat / self.inner.strides[a]) % self.inner.n;
            *o = self.inner.wavenumbers[m];
        }
    }

    /// |ξ|² of a flat spectral index.
    pub fn xi_norm_sq(&self, flat: usize) -> f64 {
        let mut acc = 0i64;
        for a in 0..self.inner.d {
            let m = (flat / self.inner.strides[a]) % self.inner.n;
            let k = self.inner.wavenumbers[m];
            acc += k * k;
        }
        acc as f64 * self.dxi() * self.dxi()
    }

    /// Flat spectral index of a reduced integer wavenumber vector.
    pub fn flat_of_kvec(&self, k: &[i64]) -> usize {
        let mut flat = 0usize;
        for (a, &ka) in k.iter().enumerate() {
            flat += self.slot_of(ka) * self.inner.strides[a];
        }
        flat
    }

    fn parity(&self, flat: usize) -> bool {
        let mut sum = 0usize;
        for a in 0..self.inner.d {
            sum += (flat / self.inner.strides[a]) % self.inner.n;
        }
        sum % 2 == 1
    }

    /// In-place FFT along every axis. Direction-dependent phase and 1/√M
    /// normalization produce the centered-box convention documented above.
    fn transform_values(&self, vals: &mut [Complex64], to: Representation) {
        let g = &self.inner;
        let m_total = self.modes();
        debug_assert_eq!(vals.len(), m_total);
        let scale = 1.0 / (m_total as f64).sqrt();
        match to {
            Representation::Spectral => {
                for a in 0..g.d {
                    self.fft_axis(vals, a, &g.forward);
                }
                for (i, v) in vals.iter_mut().enumerate() {
                    let s = if self.parity(i) { -scale } else { scale };
                    *v *= s;
                }
            }
            Representation::Physical => {
                for (i, v) in vals.iter_mut().enumerate() {
                    let s = if self.parity(i) { -scale } else { scale };
                    *v *= s;
                }
                for a in 0..g.d {
                    self.fft_axis(vals, a, &g.inverse);
                }
            }
        }
    }

    /// Unnormalized, uncentered DFT over all axes (plain index-space DFT).
    /// Used for circular convolutions where index displacement, not the
    /// centered box coordinate, is the natural variable.
    pub(crate) fn raw_dft(&self, vals: &mut [Complex64], forward: bool) {
        let g = &self.inner;
        let fft = if forward { &g.forward } else { &g.inverse };
        for a in 0..g.d {
            self.fft_axis(vals, a, fft);
        }
    }

    fn fft_axis(&self, vals: &mut [Complex64], axis: usize, fft: &Arc<dyn Fft<f64>>) {
        let g = &self.inner;
        let n = g.n;
        let stride = g.strides[axis];
        if stride == 1 {
            fft.process(vals);
            return;
        }
        // gather lines of the axis into contiguous chunks, one process call
        let m_total = vals.len();
        let block = n * stride;
        let mut buf = vec![Complex64::default(); m_total];
        let mut pos = 0usize;
        for outer in (0..m_total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for t in 0..n {
                    buf[pos + t] = vals[base + t * stride];
                }
                pos += n;
            }
        }
        fft.process(&mut buf);
        let mut pos = 0usize;
        for outer in (0..m_total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for t in 0..n {
                    vals[base + t * stride] = buf[pos + t];
                }
                pos += n;
            }
        }
    }
}

/// Complex scalar field on a [`Grid`], tagged with its representation.
#[derive(Clone)]
pub struct Field {
    grid: Grid,
    repr: Representation,
    values: Vec<Complex64>,
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("repr", &self.repr)
            .field("l2", &self.norm_sq_lattice().sqrt())
            .finish()
    }
}

impl Field {
    pub fn zeros(grid: &Grid, repr: Representation) -> Field {
        Field { grid: grid.clone(), repr, values: vec![Complex64::default(); grid.modes()] }
    }

    pub fn from_values(grid: &Grid, repr: Representation, values: Vec<Complex64>) -> Result<Field> {
        if values.len() != grid.modes() {
            return Err(LabError::Mismatch(format!(
                "value buffer has {} entries, grid has {} modes",
                values.len(),
                grid.modes()
            )));
        }
        Ok(Field { grid: grid.clone(), repr, values })
    }

    /// Sample a function of the physical coordinates.
    pub fn from_fn_physical(grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Field {
        let d = grid.d();
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0f64; d];
        let values = (0..grid.modes())
            .map(|flat| {
                grid.unravel(flat, &mut idx);
                for a in 0..d {
                    x[a] = grid.x_of(idx[a]);
                }
                f(&x)
            })
            .collect();
        Field { grid: grid.clone(), repr: Representation::Physical, values }
    }

    /// Assemble a spectral field from coefficients indexed by reduced wavenumber.
    pub fn from_fn_spectral(grid: &Grid, f: impl Fn(&[i64]) -> Complex64) -> Field {
        let d = grid.d();
        let mut k = vec![0i64; d];
        let values = (0..grid.modes())
            .map(|flat| {
                grid.kvec(flat, &mut k);
                f(&k)
            })
            .collect();
        Field { grid: grid.clone(), repr: Representation::Spectral, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn repr(&self) -> Representation {
        self.repr
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Transform to the requested representation; no-op if already there.
    pub fn transform(&self, to: Representation) -> Field {
        if self.repr == to {
            return self.clone();
        }
        let mut values = self.values.clone();
        self.grid.transform_values(&mut values, to);
        Field { grid: self.grid.clone(), repr: to, values }
    }

    pub fn to_spectral(&self) -> Field {
        self.transform(Representation::Spectral)
    }

    pub fn to_physical(&self) -> Field {
        self.transform(Representation::Physical)
    }

    /// Plain lattice sum Σ|v_i|² in whichever representation the field holds.
    /// Identical in both representations (Plancherel).
    pub fn norm_sq_lattice(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Pointwise complex conjugate (physical representation).
    pub fn conj_physical(&self) -> Field {
        let p = self.to_physical();
        let values = p.values.iter().map(|v| v.conj()).collect();
        Field { grid: self.grid.clone(), repr: Representation::Physical, values }
    }

    /// Scale every spectral coefficient by a function of the reduced
    /// wavenumber vector. Returns a field in the input's representation.
    pub fn map_spectral(&self, f: impl Fn(&[i64], Complex64) -> Complex64) -> Field {
        let spec = self.to_spectral();
        let d = self.grid.d();
        let mut k = vec![0i64; d];
        let mut values = spec.values;
        for (flat, v) in values.iter_mut().enumerate() {
            self.grid.kvec(flat, &mut k);
            *v = f(&k, *v);
        }
        let out = Field { grid: self.grid.clone(), repr: Representation::Spectral, values };
        out.transform(self.repr)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Spectral partial derivative along one axis: û ↦ i·ξ_a·û. The Nyquist row
/// is zeroed (the odd symbol has no consistent value there). Result is
/// returned in the input's representation.
pub fn spectral_derivative(u: &Field, axis: usize) -> Result<Field> {
    let g = u.grid().clone();
    if axis >= g.d() {
        return Err(LabError::InvalidParam(format!(
            "axis {axis} out of range for d = {}",
            g.d()
        )));
    }
    let spec = u.to_spectral();
    let mut vals = spec.into_values();
    let d = g.d();
    let mut k = vec![0i64; d];
    let nyq = -((g.n() / 2) as i64);
    for (flat, v) in vals.iter_mut().enumerate() {
        g.kvec(flat, &mut k);
        if k[axis] == nyq {
            *v = Complex64::default();
        } else {
            *v *= Complex64::new(0.0, k[axis] as f64 * g.dxi());
        }
    }
    Ok(Field::from_values(&g, Representation::Spectral, vals)?.transform(u.repr()))
}

/// Pointwise linear combination a·f + b·g (fields must share grid and representation).
pub fn axpy(a: Complex64, f: &Field, b: Complex64, g: &Field) -> Result<Field> {
    if f.grid() != g.grid() {
        return Err(LabError::Mismatch("fields live on different grids".into()));
    }
    if f.repr() != g.repr() {
        return Err(LabError::Mismatch("fields have different representations".into()));
    }
    let values = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(x, y)| a * x + b * y)
        .collect();
    Field::from_values(f.grid(), f.repr(), values)
}
