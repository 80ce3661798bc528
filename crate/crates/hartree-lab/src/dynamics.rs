//! Time evolution of the defocusing Hartree flow
//!
//! ```text
//! i·∂_t u + Δu = V[u]·u,      V[u] = |x|^(-γ) * |u|²
//! ```
//!
//! realized on the lattice as û_t = -i|ξ|²û - i·(V·u)^ with the convolution
//! potential V applied through the Riesz weight |ξ|^(γ-d) (zero mode pinned
//! to 0, i.e. mean-removed). Free flight û(t) = e^(-i|ξ|²t)·û(0).
//!
//! The workhorse integrator is Strang splitting in kick-flight-kick form.
//! Both substeps are isometries of the lattice L², so mass is conserved to
//! rounding regardless of dt. A classical RK4 step on the full right side is
//! kept as a reference integrator for cross-checks.
//!
//! Dealiasing (2/3 rule) is a property of the *stepping*, not of the model:
//! the truncation hits |u|² before the Riesz weight and V·u after the
//! pointwise product (RK4 path). Kicks always use the untruncated pointwise
//! exponential, which is what keeps them exactly unitary. Identity checks
//! (energy decomposition, differentiation law) want `dealias = false` so the
//! semidiscrete algebra is exact.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::functionals::{self, DiagnosticsSeries};
use crate::grid::{Field, Representation};
use crate::symbols::{apply_symbol, SymbolSpec};
use crate::IParams;

/// Spatial dimension and coupling exponent of the Hartree nonlinearity.
/// Requires 0 < γ < d so the convolution weight |ξ|^(γ-d) decays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    d: usize,
    gamma: f64,
}

impl ModelParams {
    pub fn new(d: usize, gamma: f64) -> Result<ModelParams> {
        if d < 1 {
            return Err(LabError::InvalidParam("dimension must be >= 1".into()));
        }
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(LabError::InvalidParam(format!("gamma must be positive, got {gamma}")));
        }
        if gamma >= d as f64 {
            return Err(LabError::InvalidParam(format!(
                "gamma = {gamma} >= d = {d}: convolution symbol |xi|^(gamma-d) does not decay"
            )));
        }
        Ok(ModelParams { d, gamma })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// True in the window 2 < γ < 3 <= d where the scattering theory lives.
    pub fn scattering_regime(&self) -> bool {
        2.0 < self.gamma && self.gamma < 3.0 && self.d >= 3
    }

    /// Riesz convolution weight |ξ|^(γ-d) with zero mode pinned to 0.
    pub fn coupling_symbol(&self) -> SymbolSpec {
        SymbolSpec::riesz_zeroed(self.gamma - self.d as f64)
    }
}

/// Zero every mode with any axis wavenumber above floor(n/3) (2/3 rule).
pub fn dealias_23(u: &Field) -> Field {
    let g = u.grid().clone();
    let cut = (g.n() / 3) as i64;
    u.map_spectral(|k, v| {
        if k.iter().any(|&ka| ka.abs() > cut) {
            Complex64::default()
        } else {
            v
        }
    })
}

fn potential_impl(u: &Field, mp: &ModelParams, dealias: bool) -> Result<Field> {
    if u.grid().d() != mp.d {
        return Err(LabError::Mismatch(format!(
            "field dimension {} vs model dimension {}",
            u.grid().d(),
            mp.d
        )));
    }
    let phys = u.to_physical();
    let mut rho = phys.clone();
    for v in rho.values_mut() {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    let rho = if dealias { dealias_23(&rho) } else { rho };
    let v = apply_symbol(&rho, &mp.coupling_symbol())?;
    Ok(v.to_physical())
}

/// Hartree potential V[u] = |x|^(-γ) * |u|², mean removed. Real up to
/// rounding; returned in physical representation.
pub fn hartree_potential(u: &Field, mp: &ModelParams) -> Result<Field> {
    potential_impl(u, mp, false)
}

/// Cubic nonlinearity Ñ(u) = V[u]·u (exact lattice version, physical rep).
pub fn nonlinearity(u: &Field, mp: &ModelParams) -> Result<Field> {
    let phys = u.to_physical();
    let v = potential_impl(&phys, mp, false)?;
    let vals = phys
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| a * b.re)
        .collect();
    Field::from_values(u.grid(), Representation::Physical, vals)
}

pub(crate) fn rhs_impl(u: &Field, mp: &ModelParams, dealias: bool) -> Result<Field> {
    let spec = u.to_spectral();
    let g = u.grid().clone();
    // i·Δu
    let mut lin = spec.clone().into_values();
    for (flat, v) in lin.iter_mut().enumerate() {
        *v *= Complex64::new(0.0, -g.xi_norm_sq(flat));
    }
    let lin = Field::from_values(&g, Representation::Spectral, lin)?;
    // -i·V·u
    let phys = spec.to_physical();
    let v = potential_impl(&phys, mp, dealias)?;
    let prod: Vec<Complex64> = phys
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| Complex64::new(0.0, -b.re) * a)
        .collect();
    let mut nl = Field::from_values(&g, Representation::Physical, prod)?;
    if dealias {
        nl = dealias_23(&nl);
    }
    crate::grid::axpy(Complex64::new(1.0, 0.0), &lin, Complex64::new(1.0, 0.0), &nl.to_spectral())
}

/// Full right side u_t = i(Δu - V·u) as a spectral field, no truncation.
/// Shared by the reference integrator and the differentiation-law checks.
pub fn rhs(u: &Field, mp: &ModelParams) -> Result<Field> {
    rhs_impl(u, mp, false)
}

fn kick(u: &Field, v: &Field, dt_half: f64) -> Field {
    let vals = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| {
            let phase = -b.re * dt_half;
            a * Complex64::new(phase.cos(), phase.sin())
        })
        .collect();
    Field::from_values(u.grid(), Representation::Physical, vals).expect("same grid")
}

fn free_flight(u: &Field, dt: f64) -> Field {
    let g = u.grid().clone();
    let spec = u.to_spectral();
    let mut vals = spec.into_values();
    for (flat, v) in vals.iter_mut().enumerate() {
        let phase = -g.xi_norm_sq(flat) * dt;
        *v *= Complex64::new(phase.cos(), phase.sin());
    }
    Field::from_values(&g, Representation::Spectral, vals).expect("same grid")
}

/// One Strang step: half kick with V frozen at the current state, full free
/// flight, half kick with V recomputed. Second order; exactly mass
/// preserving (each substep is an isometry).
pub fn step_strang(u: &Field, dt: f64, mp: &ModelParams, dealias: bool) -> Result<Field> {
    let phys = u.to_physical();
    let v1 = potential_impl(&phys, mp, dealias)?;
    let u1 = kick(&phys, &v1, 0.5 * dt);
    let u2 = free_flight(&u1, dt).to_physical();
    let v2 = potential_impl(&u2, mp, dealias)?;
    Ok(kick(&u2, &v2, 0.5 * dt))
}

/// One classical RK4 step on the full right side (reference integrator).
pub fn step_rk4(u: &Field, dt: f64, mp: &ModelParams, dealias: bool) -> Result<Field> {
    let one = Complex64::new(1.0, 0.0);
    let h = Complex64::new(dt, 0.0);
    let spec = u.to_spectral();
    let k1 = rhs_impl(&spec, mp, dealias)?;
    let u2 = crate::grid::axpy(one, &spec, 0.5 * h, &k1)?;
    let k2 = rhs_impl(&u2, mp, dealias)?;
    let u3 = crate::grid::axpy(one, &spec, 0.5 * h, &k2)?;
    let k3 = rhs_impl(&u3, mp, dealias)?;
    let u4 = crate::grid::axpy(one, &spec, h, &k3)?;
    let k4 = rhs_impl(&u4, mp, dealias)?;
    let mut acc = spec.into_values();
    for ((((a, b1), b2), b3), b4) in acc
        .iter_mut()
        .zip(k1.values())
        .zip(k2.values())
        .zip(k3.values())
        .zip(k4.values())
    {
        *a += (dt / 6.0) * (b1 + 2.0 * (b2 + b3) + b4);
    }
    Field::from_values(u.grid(), Representation::Spectral, acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Strang,
    ReferenceRk4,
}

/// Stepping parameters. `snapshot_every = Some(k)` additionally records the
/// full state every k steps (and at both endpoints).
#[derive(Debug, Clone)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_final: f64,
    pub dealias: bool,
    pub sample_every: usize,
    pub integrator: Integrator,
    pub snapshot_every: Option<usize>,
}

impl EvolveConfig {
    pub fn new(dt: f64, t_final: f64) -> EvolveConfig {
        EvolveConfig {
            dt,
            t_final,
            dealias: true,
            sample_every: 1,
            integrator: Integrator::Strang,
            snapshot_every: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(LabError::InvalidParam(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(LabError::InvalidParam(format!(
                "final time must be >= 0, got {}",
                self.t_final
            )));
        }
        if self.sample_every == 0 {
            return Err(LabError::InvalidParam("sample_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// A functional sampled along the flow.
#[derive(Debug, Clone)]
pub enum Probe {
    Mass,
    Energy,
    ModifiedEnergy(IParams),
    SobolevNorm { s: f64, homogeneous: bool },
    /// ∫|u|⁴ dx, the Morawetz left-side integrand at d = 3
    L4Norm4,
    MorawetzAction,
    CommutatorNorm { p: IParams, derivative: bool },
    /// quartic increment form Λ₄(M₄) of the modified energy
    LambdaM4(IParams),
    /// sextic increment form Λ₆(M₆) of the modified energy
    LambdaM6(IParams),
}

impl Probe {
    pub fn name(&self) -> String {
        match self {
            Probe::Mass => "mass".into(),
            Probe::Energy => "energy".into(),
            Probe::ModifiedEnergy(p) => format!("modified_energy[N={}]", p.threshold()),
            Probe::SobolevNorm { s, homogeneous: false } => format!("hs_norm[s={s}]"),
            Probe::SobolevNorm { s, homogeneous: true } => format!("hs_dot_norm[s={s}]"),
            Probe::L4Norm4 => "l4_norm4".into(),
            Probe::MorawetzAction => "morawetz_action".into(),
            Probe::CommutatorNorm { p, derivative: false } => {
                format!("commutator_l2[N={}]", p.threshold())
            }
            Probe::CommutatorNorm { p, derivative: true } => {
                format!("commutator_grad_l2[N={}]", p.threshold())
            }
            Probe::LambdaM4(p) => format!("lambda4_m4[N={}]", p.threshold()),
            Probe::LambdaM6(p) => format!("lambda6_m6[N={}]", p.threshold()),
        }
    }

    pub fn eval(&self, u: &Field, mp: &ModelParams) -> Result<f64> {
        match self {
            Probe::Mass => Ok(functionals::mass(u)),
            Probe::Energy => functionals::energy(u, mp),
            Probe::ModifiedEnergy(p) => functionals::modified_energy(u, p, mp),
            Probe::SobolevNorm { s, homogeneous } => functionals::sobolev_norm(u, *s, *homogeneous),
            Probe::L4Norm4 => Ok(functionals::l4_norm4(u)),
            Probe::MorawetzAction => functionals::interaction_morawetz_action(u),
            Probe::CommutatorNorm { p, derivative } => {
                functionals::i_commutator(u, p, mp, *derivative)
            }
            Probe::LambdaM4(p) => {
                let m4 = crate::multilinear::m4_multiplier(p, mp);
                crate::multilinear::lambda_k_fft(&m4, u)
            }
            Probe::LambdaM6(p) => {
                let m6 = crate::multilinear::m6_multiplier(p, mp);
                crate::multilinear::lambda_k_fft(&m6, u)
            }
        }
    }
}

/// Everything `evolve` hands back.
pub struct EvolveOutcome {
    pub series: DiagnosticsSeries,
    pub final_state: Field,
    pub snapshots: Vec<(f64, Field)>,
}

/// March u₀ to t = T with fixed step, sampling the probes every
/// `sample_every` steps (endpoints always included). Aborts with step index
/// on the first non-finite or exploding state.
pub fn evolve(
    u0: &Field,
    mp: &ModelParams,
    cfg: &EvolveConfig,
    probes: &[Probe],
) -> Result<EvolveOutcome> {
    cfg.validate()?;
    let steps = if cfg.t_final == 0.0 {
        0
    } else {
        (cfg.t_final / cfg.dt).round().max(1.0) as usize
    };
    // land on T exactly; equals cfg.dt whenever T is a multiple of it
    let dt = if steps == 0 { cfg.dt } else { cfg.t_final / steps as f64 };

    let mut series = DiagnosticsSeries::new();
    let mut snapshots = Vec::new();
    let mut u = u0.to_physical();

    let record = |step: usize, t: f64, u: &Field, series: &mut DiagnosticsSeries,
                  snapshots: &mut Vec<(f64, Field)>|
     -> Result<()> {
        let at_end = step == steps;
        if step % cfg.sample_every == 0 || at_end {
            for p in probes {
                series.push(t, &p.name(), p.eval(u, mp)?)?;
            }
        }
        if let Some(every) = cfg.snapshot_every {
            if step % every == 0 || at_end {
                snapshots.push((t, u.clone()));
            }
        }
        Ok(())
    };

    record(0, 0.0, &u, &mut series, &mut snapshots)?;
    for step in 1..=steps {
        u = match cfg.integrator {
            Integrator::Strang => step_strang(&u, dt, mp, cfg.dealias)?,
            Integrator::ReferenceRk4 => step_rk4(&u, dt, mp, cfg.dealias)?,
        };
        let t = step as f64 * dt;
        if !u.is_finite() {
            return Err(LabError::NumericalAbort {
                step,
                t,
                what: "state contains NaN or infinity".into(),
            });
        }
        if u.max_abs() > 1e12 {
            return Err(LabError::NumericalAbort { step, t, what: "state norm exploded".into() });
        }
        record(step, t, &u, &mut series, &mut snapshots)?;
    }

    Ok(EvolveOutcome { series, final_state: u, snapshots })
}
