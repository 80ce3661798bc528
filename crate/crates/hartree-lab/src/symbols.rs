//! Radial Fourier multipliers: the smoothing profile m(ξ), Japanese-bracket
//! and Riesz weights, sharp dyadic shells, and their application to fields.
//!
//! The smoothing profile is the min form
//!
//! ```text
//! m(ξ) = min(1, (N/|ξ|)^(1-s))
//! ```
//!
//! equal to exactly 1.0 below the threshold (so the low-frequency part of
//! I·u is bit-identical to u) and radially decreasing above it. All symbols
//! here are real and radial, hence even; applying one preserves Hermitian
//! spectra of real fields.

use crate::error::{LabError, Result};
use crate::grid::{Field, Grid, Representation};

/// Parameters of the smoothing operator I: threshold N (dyadic, >= 1) and
/// regularity 0 < s <= 1. s = 1 makes I the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IParams {
    n_threshold: f64,
    s: f64,
}

impl IParams {
    pub fn new(n_threshold: f64, s: f64) -> Result<IParams> {
        if !n_threshold.is_finite() || n_threshold < 1.0 {
            return Err(LabError::InvalidParam(format!(
                "threshold N must be >= 1, got {n_threshold}"
            )));
        }
        let as_int = n_threshold.round();
        if as_int != n_threshold || !(as_int as u64).is_power_of_two() {
            return Err(LabError::InvalidParam(format!(
                "threshold N must be dyadic (a power of two), got {n_threshold}"
            )));
        }
        if !s.is_finite() || s <= 0.0 || s > 1.0 {
            return Err(LabError::InvalidParam(format!("s must lie in (0, 1], got {s}")));
        }
        Ok(IParams { n_threshold, s })
    }

    pub fn threshold(&self) -> f64 {
        self.n_threshold
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

/// m(r) for radius r = |ξ|; exactly 1.0 for r <= N.
pub fn m_eval(xi_norm: f64, p: &IParams) -> f64 {
    if xi_norm <= p.n_threshold {
        1.0
    } else {
        (p.n_threshold / xi_norm).powf(1.0 - p.s)
    }
}

/// Real radial symbol vocabulary. `Product` composes pointwise.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolSpec {
    /// the smoothing profile m(ξ)
    IOp(IParams),
    /// ⟨ξ⟩^s = (1 + |ξ|²)^(s/2)
    Bracket { s: f64 },
    /// |ξ|^alpha; for alpha < 0 the value at ξ = 0 must be pinned explicitly
    Riesz { alpha: f64, zero_mode: Option<f64> },
    /// sharp dyadic shell indicator (see [`lp_project`])
    LpShell { j: u32 },
    Product(Vec<SymbolSpec>),
}

impl SymbolSpec {
    /// Riesz weight with the zero mode pinned to 0, the convention used by
    /// every convolution coupling in this crate.
    pub fn riesz_zeroed(alpha: f64) -> SymbolSpec {
        SymbolSpec::Riesz { alpha, zero_mode: Some(0.0) }
    }

    /// Evaluate at radius r = |ξ| >= 0.
    pub fn eval(&self, r: f64) -> Result<f64> {
        match self {
            SymbolSpec::IOp(p) => Ok(m_eval(r, p)),
            SymbolSpec::Bracket { s } => Ok((1.0 + r * r).powf(0.5 * s)),
            SymbolSpec::Riesz { alpha, zero_mode } => {
                if r == 0.0 {
                    if *alpha > 0.0 {
                        Ok(0.0)
                    } else if *alpha == 0.0 {
                        Ok(1.0)
                    } else {
                        zero_mode.ok_or_else(|| {
                            LabError::SingularSymbol(format!("riesz({alpha})"))
                        })
                    }
                } else {
                    Ok(r.powf(*alpha))
                }
            }
            SymbolSpec::LpShell { j } => {
                let inside = if *j == 0 {
                    r <= 1.0
                } else {
                    let hi = (1u64 << j) as f64;
                    r > 0.5 * hi && r <= hi
                };
                Ok(if inside { 1.0 } else { 0.0 })
            }
            SymbolSpec::Product(parts) => {
                let mut acc = 1.0;
                for p in parts {
                    acc *= p.eval(r)?;
                }
                Ok(acc)
            }
        }
    }
}

impl std::fmt::Display for SymbolSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SymbolSpec::IOp(p) => write!(f, "iop(n={},s={})", p.n_threshold, p.s),
            SymbolSpec::Bracket { s } => write!(f, "bracket({s})"),
            SymbolSpec::Riesz { alpha, zero_mode: None } => write!(f, "riesz({alpha})"),
            SymbolSpec::Riesz { alpha, zero_mode: Some(z) } => {
                write!(f, "riesz({alpha},zero={z})")
            }
            SymbolSpec::LpShell { j } => write!(f, "shell({j})"),
            SymbolSpec::Product(parts) => {
                write!(f, "product(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Split `s` on commas that sit at parenthesis depth zero.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

impl std::str::FromStr for SymbolSpec {
    type Err = LabError;

    fn from_str(text: &str) -> Result<SymbolSpec> {
        let text = text.trim();
        let invalid = || LabError::InvalidParam(format!("cannot parse symbol '{text}'"));
        let open = text.find('(').ok_or_else(invalid)?;
        if !text.ends_with(')') {
            return Err(invalid());
        }
        let head = &text[..open];
        let body = &text[open + 1..text.len() - 1];
        let parse_f64 = |v: &str| -> Result<f64> {
            v.trim().parse::<f64>().map_err(|_| invalid())
        };
        match head {
            "iop" => {
                let mut n = None;
                let mut s = None;
                for part in split_top_level(body) {
                    let (key, val) = part.split_once('=').ok_or_else(invalid)?;
                    match key.trim() {
                        "n" => n = Some(parse_f64(val)?),
                        "s" => s = Some(parse_f64(val)?),
                        _ => return Err(invalid()),
                    }
                }
                let p = IParams::new(n.ok_or_else(invalid)?, s.ok_or_else(invalid)?)?;
                Ok(SymbolSpec::IOp(p))
            }
            "bracket" => Ok(SymbolSpec::Bracket { s: parse_f64(body)? }),
            "riesz" => {
                let parts = split_top_level(body);
                let alpha = parse_f64(parts[0])?;
                let zero_mode = match parts.len() {
                    1 => None,
                    2 => {
                        let (key, val) = parts[1].split_once('=').ok_or_else(invalid)?;
                        if key.trim() != "zero" {
                            return Err(invalid());
                        }
                        Some(parse_f64(val)?)
                    }
                    _ => return Err(invalid()),
                };
                Ok(SymbolSpec::Riesz { alpha, zero_mode })
            }
            "shell" => {
                let j = body.trim().parse::<u32>().map_err(|_| invalid())?;
                Ok(SymbolSpec::LpShell { j })
            }
            "product" => {
                let parts = split_top_level(body)
                    .into_iter()
                    .map(|p| p.parse::<SymbolSpec>())
                    .collect::<Result<Vec<_>>>()?;
                Ok(SymbolSpec::Product(parts))
            }
            _ => Err(invalid()),
        }
    }
}

/// Multiply every spectral coefficient of `u` by σ(|ξ|). The result keeps
/// the input's representation; the input is untouched.
pub fn apply_symbol(u: &Field, sigma: &SymbolSpec) -> Result<Field> {
    let g = u.grid().clone();
    let spec = u.to_spectral();
    let mut vals = spec.into_values();
    let d = g.d();
    let mut k = vec![0i64; d];
    for (flat, v) in vals.iter_mut().enumerate() {
        g.kvec(flat, &mut k);
        *v *= sigma.eval(xi_len(&g, &k))?;
    }
    Ok(Field::from_values(&g, Representation::Spectral, vals)?.transform(u.repr()))
}

/// |ξ| of a reduced wavenumber vector.
pub fn xi_len(grid: &Grid, k: &[i64]) -> f64 {
    let sq: i64 = k.iter().map(|&a| a * a).sum();
    (sq as f64).sqrt() * grid.dxi()
}

/// Apply the smoothing operator I: û(ξ) ↦ m(ξ)·û(ξ).
pub fn i_operator(u: &Field, p: &IParams) -> Field {
    apply_symbol(u, &SymbolSpec::IOp(*p)).expect("m is regular everywhere")
}

/// Sharp Littlewood-Paley piece: shell 0 keeps |ξ| <= 1, shell j >= 1 keeps
/// 2^(j-1) < |ξ| <= 2^j (boundary modes belong to the lower shell). Shells
/// entirely beyond the lattice come back as zero fields.
pub fn lp_project(u: &Field, j: u32) -> Field {
    apply_symbol(u, &SymbolSpec::LpShell { j }).expect("indicator is regular everywhere")
}

/// Number of shells needed to cover the whole lattice (corner modes included).
pub fn lp_shell_count(grid: &Grid) -> u32 {
    let xi_max = grid.nyquist() * (grid.d() as f64).sqrt();
    let mut j = 0u32;
    while ((1u64 << j) as f64) < xi_max {
        j += 1;
    }
    j + 1
}

/// Check monotonicity of r ↦ m(r)·r^exp on r >= N by sampling a geometric
/// ladder over [N/4, 64N]. For the min profile this is nondecreasing exactly
/// when exp >= 1 - s.
pub fn monotonicity_probe(p: &IParams, exp: f64) -> bool {
    let n = p.threshold();
    let mut prev: Option<f64> = None;
    let steps = 64;
    for t in 0..=steps {
        // geometric ladder from N/4 to 64N: 8 octaves
        let r = 0.25 * n * 2f64.powf(8.0 * t as f64 / steps as f64);
        if r < n {
            continue;
        }
        let v = m_eval(r, p) * r.powf(exp);
        if let Some(pv) = prev {
            if v < pv * (1.0 - 1e-12) - 1e-300 {
                return false;
            }
        }
        prev = Some(v);
    }
    true
}
