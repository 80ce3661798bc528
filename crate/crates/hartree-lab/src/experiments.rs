//! Rescaling bookkeeping and the almost-conservation sweep
//!
//! The rescaling sends u(x) to λ^(−(d+2−γ)/2) u(x/λ): it spreads the data
//! over a λ times larger region while preserving the equation, and the
//! exponent is chosen so that mass scales like λ^(γ−2) and the homogeneous
//! gradient norm like λ^((γ−4)/2). With
//!
//! ```text
//! λ(N) = N^((1−s)/(s − γ/2 + 1))
//! ```
//!
//! the smoothed gradient energy of the rescaled data stays O(1) as the
//! threshold N grows, which is what makes increments of the modified energy
//! across fixed rescaled-time windows comparable between N values.
//!
//! On a fixed torus the spread-out field must still fit: `rescale` refuses
//! data whose essential support would wrap around. Compression (λ < 1)
//! periodizes instead, with period L/λ; callers comparing against a
//! compressed field should restrict to the fundamental cell.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{evolve, EvolveConfig, ModelParams, Probe};
use crate::error::{LabError, Result};
use crate::functionals::sobolev_norm;
use crate::grid::{make_grid, Field, Grid, Representation};
use crate::initial_data::{rough_noise, RoughSpec};
use crate::symbols::{i_operator, IParams};

/// λ(N) for smoothing threshold N and regularity s. Errors when the
/// scaling exponent degenerates (s <= γ/2 − 1, where the map from N to the
/// box size blows up).
pub fn choose_lambda(n_threshold: f64, s: f64, mp: &ModelParams) -> Result<f64> {
    if !(n_threshold >= 1.0) {
        return Err(LabError::InvalidParam(format!(
            "threshold must be >= 1, got {n_threshold}"
        )));
    }
    let denom = s - 0.5 * mp.gamma() + 1.0;
    if !(denom > 0.0) {
        return Err(LabError::InvalidParam(format!(
            "rescaling needs s > gamma/2 - 1, got s = {s}, gamma = {}",
            mp.gamma()
        )));
    }
    Ok(n_threshold.powf((1.0 - s) / denom))
}

/// Regularity where the almost-conservation gain balances the rescaling
/// cost: 4(γ−2)/(3γ−4).
pub fn s_star(gamma: f64) -> f64 {
    4.0 * (gamma - 2.0) / (3.0 * gamma - 4.0)
}

/// Number of bootstrap intervals the rescaled evolution must cover:
/// (2K)⁴ λ^(3(γ/2−1)) / μ for gradient bound K, per-interval increment μ.
pub fn interval_count(k_bound: f64, lambda: f64, gamma: f64, mu: f64) -> f64 {
    (2.0 * k_bound).powi(4) * lambda.powf(3.0 * (0.5 * gamma - 1.0)) / mu
}

/// Dense evaluation of the spectral interpolant at the compressed points
/// x_j/λ, one axis at a time: out = (E ⊗ ... ⊗ E) û with
/// E[j, m] = exp(i ξ_m x_j / λ). Cost d n^(d+1), exact for any real λ.
fn evaluate_compressed(grid: &Grid, spec_vals: &[Complex64], lambda: f64) -> Vec<Complex64> {
    let d = grid.d();
    let n = grid.n();
    let modes = grid.modes();
    // one matrix serves every axis: the box is a cube
    let mut e = vec![Complex64::default(); n * n];
    for j in 0..n {
        let x = grid.x_of(j) / lambda;
        for m in 0..n {
            let phase = grid.k_of(m) as f64 * grid.dxi() * x;
            e[j * n + m] = Complex64::new(phase.cos(), phase.sin());
        }
    }
    let mut work = spec_vals.to_vec();
    let mut line = vec![Complex64::default(); n];
    for a in 0..d {
        let stride = modes / n.pow(a as u32 + 1);
        let block = stride * n;
        for big in 0..modes / block {
            for small in 0..stride {
                let base = big * block + small;
                for (m, v) in line.iter_mut().enumerate() {
                    *v = work[base + m * stride];
                }
                for j in 0..n {
                    let row = &e[j * n..(j + 1) * n];
                    let mut acc = Complex64::default();
                    for (m, v) in line.iter().enumerate() {
                        acc += row[m] * v;
                    }
                    work[base + j * stride] = acc;
                }
            }
        }
    }
    let scale = 1.0 / (modes as f64).sqrt();
    for v in &mut work {
        *v *= scale;
    }
    work
}

/// Fraction of lattice mass allowed outside the shrunken box before a
/// λ-rescale is refused.
const SUPPORT_LEAK: f64 = 1e-10;

/// u ↦ λ^(−(d+2−γ)/2) u(·/λ) on the same grid. For λ > 1 the essential
/// support of u must fit inside |x|∞ <= L/(2λ), otherwise the spread-out
/// field would wrap; the error reports the box length that would suffice.
pub fn rescale(u: &Field, lambda: f64, mp: &ModelParams) -> Result<Field> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(LabError::InvalidParam(format!("scale must be positive, got {lambda}")));
    }
    let grid = u.grid().clone();
    if grid.d() != mp.d() {
        return Err(LabError::Mismatch(format!(
            "model dimension {} vs grid dimension {}",
            mp.d(),
            grid.d()
        )));
    }
    let phys = u.to_physical();
    let limit = 0.5 * grid.len() / lambda;
    let mut total = 0.0;
    let mut outside = 0.0;
    let mut radius: f64 = 0.0;
    let floor = 1e-7 * phys.max_abs();
    let d = grid.d();
    let mut idx = vec![0usize; d];
    for (flat, v) in phys.values().iter().enumerate() {
        let sq = v.norm_sqr();
        total += sq;
        grid.unravel(flat, &mut idx);
        let linf = idx.iter().map(|&j| grid.x_of(j).abs()).fold(0.0, f64::max);
        if linf > limit {
            outside += sq;
        }
        if v.norm() > floor {
            radius = radius.max(linf);
        }
    }
    if outside > SUPPORT_LEAK * total {
        return Err(LabError::RescaleSupport {
            needed: 2.0 * lambda * radius,
            have: grid.len(),
        });
    }
    let spec = u.to_spectral().into_values();
    let mut vals = evaluate_compressed(&grid, &spec, lambda);
    let prefactor = lambda.powf(-0.5 * (d as f64 + 2.0 - mp.gamma()));
    for v in &mut vals {
        *v *= prefactor;
    }
    Field::from_values(&grid, Representation::Physical, vals)
}

/// Undo the free flow at each snapshot and measure consecutive H^s
/// distances of e^{−itΔ} u(t). For a scattering solution these increments
/// decay; under the free flow they vanish.
pub fn scattering_diagnostic(trajectory: &[(f64, Field)], s: f64) -> Result<Vec<f64>> {
    if trajectory.len() < 2 {
        return Ok(Vec::new());
    }
    let grid = trajectory[0].1.grid().clone();
    let dxi2 = grid.dxi() * grid.dxi();
    let mut prev: Option<Field> = None;
    let mut out = Vec::with_capacity(trajectory.len() - 1);
    for (t, u) in trajectory {
        if u.grid() != &grid {
            return Err(LabError::Mismatch("snapshots must share one grid".into()));
        }
        let pulled = u.to_spectral().map_spectral(|k, v| {
            let xi2: f64 = k.iter().map(|&a| (a * a) as f64).sum::<f64>() * dxi2;
            let phase = xi2 * t;
            v * Complex64::new(phase.cos(), phase.sin())
        });
        if let Some(p) = &prev {
            let diff = crate::grid::axpy(
                Complex64::new(1.0, 0.0),
                &pulled,
                Complex64::new(-1.0, 0.0),
                p,
            )?;
            out.push(sobolev_norm(&diff, s, false)?);
        }
        prev = Some(pulled);
    }
    Ok(out)
}

/// Least-squares slope of log2(y) against log2(x). None unless at least
/// three strictly positive points are supplied.
pub fn fit_log2_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.log2(), y.log2()))
        .collect();
    if logs.len() < 3 {
        return None;
    }
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|(x, _)| x).sum();
    let sy: f64 = logs.iter().map(|(_, y)| y).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = logs.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// One sweep configuration: a family of thresholds run on common rough
/// data, each rescaled by λ(N) and evolved over a fixed window of rescaled
/// time.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub thresholds: Vec<f64>,
    pub s: f64,
    pub mp: ModelParams,
    pub grid_n: usize,
    pub grid_len: f64,
    pub data: RoughSpec,
    pub seed: u64,
    pub dt: f64,
    pub window: f64,
    pub dealias: bool,
    pub sample_every: usize,
    /// also run each threshold with s = 1 and λ = 1, where the smoothing is
    /// the identity: those rows isolate the integrator floor
    pub control_s1: bool,
}

impl SweepSpec {
    pub fn new(thresholds: Vec<f64>, s: f64, mp: ModelParams) -> SweepSpec {
        SweepSpec {
            thresholds,
            s,
            mp,
            grid_n: 256,
            grid_len: 32.0,
            data: RoughSpec::new(s, 4),
            seed: 7,
            dt: 1e-3,
            window: 1.0,
            dealias: true,
            sample_every: 8,
            control_s1: true,
        }
    }
}

/// One row of the sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n_threshold: f64,
    pub s: f64,
    pub lambda: f64,
    /// ‖I u^λ(0)‖ in the homogeneous gradient norm
    pub iu_h1: f64,
    /// sup over the window of |Ẽ(t) − Ẽ(0)|
    pub sup_increment: f64,
    /// ∫ ‖∇(I Ñ(u) − Ñ(I u))‖₂ dt over the window
    pub commutator_l1l2: f64,
    /// false when the evolution aborted; excluded from slope fits
    pub valid: bool,
}

/// Sweep outcome: all rows (controls after main rows) and, when at least
/// three valid main rows exist, log2-log2 slopes of the increment and the
/// commutator against N.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub increment_slope: Option<f64>,
    pub commutator_slope: Option<f64>,
}

fn sweep_row(
    u0: &Field,
    spec: &SweepSpec,
    n_threshold: f64,
    s_row: f64,
    lambda: f64,
) -> Result<SweepRow> {
    let p = IParams::new(n_threshold, s_row)?;
    let data = if lambda == 1.0 { u0.to_physical() } else { rescale(u0, lambda, &spec.mp)? };
    let iu_h1 = sobolev_norm(&i_operator(&data, &p), 1.0, true)?;
    let me_name = Probe::ModifiedEnergy(p).name();
    let comm_name = Probe::CommutatorNorm { p, derivative: true }.name();
    let mut cfg = EvolveConfig::new(spec.dt, spec.window);
    cfg.dealias = spec.dealias;
    cfg.sample_every = spec.sample_every;
    let probes = vec![Probe::ModifiedEnergy(p), Probe::CommutatorNorm { p, derivative: true }];
    match evolve(&data, &spec.mp, &cfg, &probes) {
        Ok(out) => Ok(SweepRow {
            n_threshold,
            s: s_row,
            lambda,
            iu_h1,
            sup_increment: out.series.sup_deviation(&me_name).unwrap_or(f64::NAN),
            commutator_l1l2: out.series.accumulate_left(&comm_name).unwrap_or(f64::NAN),
            valid: true,
        }),
        Err(LabError::NumericalAbort { .. }) => Ok(SweepRow {
            n_threshold,
            s: s_row,
            lambda,
            iu_h1,
            sup_increment: f64::NAN,
            commutator_l1l2: f64::NAN,
            valid: false,
        }),
        Err(e) => Err(e),
    }
}

/// Run the sweep. Rows are independent and run in parallel; the thread
/// count follows the global pool (RAYON_NUM_THREADS).
pub fn sweep_almost_conservation(spec: &SweepSpec) -> Result<SweepResult> {
    if spec.thresholds.is_empty() {
        return Err(LabError::InvalidParam("sweep needs at least one threshold".into()));
    }
    let grid = make_grid(spec.mp.d(), spec.grid_n, spec.grid_len)?;
    let u0 = rough_noise(&grid, &spec.data, spec.seed)?;

    // (threshold, s, λ) per row; λ errors surface before any evolution
    let mut jobs: Vec<(f64, f64, f64)> = Vec::new();
    for &n in &spec.thresholds {
        jobs.push((n, spec.s, choose_lambda(n, spec.s, &spec.mp)?));
    }
    if spec.control_s1 {
        for &n in &spec.thresholds {
            jobs.push((n, 1.0, 1.0));
        }
    }

    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(n, s_row, lambda)| sweep_row(&u0, spec, n, s_row, lambda))
        .collect::<Result<Vec<_>>>()?;

    let main_points = |value: fn(&SweepRow) -> f64| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| r.valid && r.s != 1.0)
            .map(|r| (r.n_threshold, value(r)))
            .collect()
    };
    let increment_slope = fit_log2_slope(&main_points(|r| r.sup_increment));
    let commutator_slope = fit_log2_slope(&main_points(|r| r.commutator_l1l2));
    Ok(SweepResult { rows, increment_slope, commutator_slope })
}
