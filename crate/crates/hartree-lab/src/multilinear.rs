//! k-linear frequency forms on the zero-sum hyperplane
//!
//! ```text
//! Λ_k(M; u) = Re  Σ   M(ξ₁,…,ξ_k) ĝ₁(ξ₁)⋯ĝ_k(ξ_k) · Δx^d / M^((k−2)/2)
//!           Σξ_j ≡ 0
//! ```
//!
//! with the alternating-conjugate convention: odd slots carry û, even slots
//! carry ĝ(ξ) = conj(û(−ξ)). The constraint is the lattice one (sums reduce
//! modulo the reciprocal lattice) and every coupling inside a multiplier is
//! evaluated at the reduced representative of its frequency sum. With these
//! conventions the modified energy decomposes exactly as Λ₂ + Λ₄ and the
//! differentiation law holds to rounding.
//!
//! Two evaluation paths exist: direct enumeration of the constraint set over
//! the spectral support (the oracle; budget-guarded), and a factorized path
//! that reduces each multiplier to FFT products via its convolution plan.
//! The plans below split couplings across a single contraction
//! Σ_ζ w(ζ) F̂(ζ) Ĝ(−ζ) = Σ_x (w(D)F)(x) G(x), which is where the stated
//! normalization comes from: all transform factors cancel against
//! M^((k−2)/2), leaving one cell volume.

use num_complex::Complex64;

use crate::dynamics::ModelParams;
use crate::error::{LabError, Result};
use crate::grid::{Field, Grid, Representation};
use crate::symbols::{apply_symbol, m_eval, xi_len, IParams, SymbolSpec};

/// Structural family of a multiplier: plain per-slot product, one pair
/// coupling through a frequency sum, or the sextic shape whose coupling
/// depends on a three-frequency sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructTag {
    Separable,
    PairCoupled,
    TripleCoupled,
}

pub type EvalFn = Box<dyn Fn(&Grid, &[i64]) -> Complex64 + Send + Sync>;

/// A multiplier of even order k together with its pointwise evaluation rule
/// and, when one is compiled, a factorized evaluation plan.
pub struct FreqMultiplier {
    arity: usize,
    tag: StructTag,
    eval: EvalFn,
    plan: Option<ConvPlan>,
}

impl FreqMultiplier {
    /// Wrap a bare evaluation rule (no factorized plan).
    pub fn from_eval(arity: usize, tag: StructTag, eval: EvalFn) -> FreqMultiplier {
        assert!(arity >= 2 && arity % 2 == 0, "multiplier order must be even and >= 2");
        FreqMultiplier { arity, tag, eval, plan: None }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tag(&self) -> StructTag {
        self.tag
    }

    pub fn plan(&self) -> Option<&ConvPlan> {
        self.plan.as_ref()
    }

    /// Evaluate on one frequency tuple, `kvecs` = k·d reduced wavenumbers.
    pub fn eval(&self, grid: &Grid, kvecs: &[i64]) -> Complex64 {
        debug_assert_eq!(kvecs.len(), self.arity * grid.d());
        (self.eval)(grid, kvecs)
    }
}

impl std::fmt::Debug for FreqMultiplier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FreqMultiplier")
            .field("arity", &self.arity)
            .field("tag", &self.tag)
            .field("plan", &self.plan.as_ref().map(|p| p.terms.len()))
            .finish()
    }
}

/// Per-slot spectral weight inside a plan: a radial symbol, optionally
/// multiplied by one frequency component (for gradient-type factors).
#[derive(Debug, Clone)]
pub enum PlanWeight {
    Radial(SymbolSpec),
    AxisRadial { axis: usize, radial: Option<SymbolSpec> },
}

/// Weighted copy of the convention field: odd slots û, even slots the
/// conjugate spectrum conj(û(−ξ)).
#[derive(Debug, Clone)]
pub struct SlotRef {
    pub slot: usize,
    pub weight: Option<PlanWeight>,
}

impl SlotRef {
    pub fn bare(slot: usize) -> SlotRef {
        SlotRef { slot, weight: None }
    }

    pub fn weighted(slot: usize, w: PlanWeight) -> SlotRef {
        SlotRef { slot, weight: Some(w) }
    }
}

/// One side of a contraction: a physical-space product of up to three slot
/// fields with an optional coupling applied to an inner pair's sum
/// frequency.
#[derive(Debug, Clone)]
pub enum Chain {
    Single(SlotRef),
    Pair { a: SlotRef, b: SlotRef, coupling: Option<SymbolSpec> },
    Triple { a: SlotRef, b: SlotRef, inner: Option<SymbolSpec>, c: SlotRef },
}

impl Chain {
    fn slots(&self) -> Vec<usize> {
        match self {
            Chain::Single(s) => vec![s.slot],
            Chain::Pair { a, b, .. } => vec![a.slot, b.slot],
            Chain::Triple { a, b, c, .. } => vec![a.slot, b.slot, c.slot],
        }
    }
}

/// coeff · Σ_ζ mid(ζ) F̂(ζ) Ĝ(−ζ) with F from `left`, G from `right`.
#[derive(Debug, Clone)]
pub struct PlanTerm {
    pub coeff: Complex64,
    pub left: Chain,
    pub right: Chain,
    pub mid: Option<SymbolSpec>,
}

/// Factorized evaluation recipe: a sum of contraction terms. Each slot of
/// the multiplier must appear exactly once per term.
#[derive(Debug, Clone)]
pub struct ConvPlan {
    arity: usize,
    terms: Vec<PlanTerm>,
}

impl ConvPlan {
    pub fn new(arity: usize, terms: Vec<PlanTerm>) -> ConvPlan {
        for t in &terms {
            let mut seen: Vec<usize> = t.left.slots();
            seen.extend(t.right.slots());
            seen.sort_unstable();
            let expect: Vec<usize> = (1..=arity).collect();
            assert_eq!(seen, expect, "plan term must use each slot once");
        }
        ConvPlan { arity, terms }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[PlanTerm] {
        &self.terms
    }
}

impl std::fmt::Display for ConvPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fn weight(w: &Option<PlanWeight>) -> String {
            match w {
                None => String::new(),
                Some(PlanWeight::Radial(s)) => format!(":{s}"),
                Some(PlanWeight::AxisRadial { axis, radial: None }) => format!(":xi{axis}"),
                Some(PlanWeight::AxisRadial { axis, radial: Some(s) }) => {
                    format!(":xi{axis}*{s}")
                }
            }
        }
        fn chain(c: &Chain) -> String {
            match c {
                Chain::Single(s) => format!("g{}{}", s.slot, weight(&s.weight)),
                Chain::Pair { a, b, coupling } => {
                    let inner = format!(
                        "g{}{} g{}{}",
                        a.slot,
                        weight(&a.weight),
                        b.slot,
                        weight(&b.weight)
                    );
                    match coupling {
                        Some(s) => format!("{s}[{inner}]"),
                        None => format!("[{inner}]"),
                    }
                }
                Chain::Triple { a, b, inner, c } => {
                    let pair = format!(
                        "g{}{} g{}{}",
                        a.slot,
                        weight(&a.weight),
                        b.slot,
                        weight(&b.weight)
                    );
                    let core = match inner {
                        Some(s) => format!("{s}[{pair}]"),
                        None => format!("[{pair}]"),
                    };
                    format!("{core} g{}{}", c.slot, weight(&c.weight))
                }
            }
        }
        writeln!(f, "plan(arity {})", self.arity)?;
        for t in &self.terms {
            let mid = match &t.mid {
                Some(s) => format!(" --{s}-- "),
                None => " -- ".to_string(),
            };
            writeln!(f, "  {:+} * <{}{}{}>", t.coeff, chain(&t.left), mid, chain(&t.right))?;
        }
        Ok(())
    }
}

fn weight_table(grid: &Grid, w: &PlanWeight) -> Result<Vec<f64>> {
    let d = grid.d();
    let mut k = vec![0i64; d];
    let mut out = Vec::with_capacity(grid.modes());
    for flat in 0..grid.modes() {
        grid.kvec(flat, &mut k);
        let r = grid.xi_norm_sq(flat).sqrt();
        let v = match w {
            PlanWeight::Radial(s) => s.eval(r)?,
            PlanWeight::AxisRadial { axis, radial } => {
                let base = match radial {
                    Some(s) => s.eval(r)?,
                    None => 1.0,
                };
                k[*axis] as f64 * grid.dxi() * base
            }
        };
        out.push(v);
    }
    Ok(out)
}

/// Spectrum of the conjugate field: out(ξ) = conj(in(−ξ)), index-exact.
fn conj_spectrum(grid: &Grid, spec_vals: &[Complex64]) -> Vec<Complex64> {
    let d = grid.d();
    let mut k = vec![0i64; d];
    let mut neg = vec![0i64; d];
    (0..grid.modes())
        .map(|flat| {
            grid.kvec(flat, &mut k);
            for a in 0..d {
                neg[a] = grid.reduce(-k[a]);
            }
            spec_vals[grid.flat_of_kvec(&neg)].conj()
        })
        .collect()
}

fn slot_field(grid: &Grid, u_spec: &[Complex64], s: &SlotRef) -> Result<Field> {
    let mut vals = if s.slot % 2 == 0 {
        conj_spectrum(grid, u_spec)
    } else {
        u_spec.to_vec()
    };
    if let Some(w) = &s.weight {
        let table = weight_table(grid, w)?;
        for (v, t) in vals.iter_mut().zip(&table) {
            *v *= t;
        }
    }
    Ok(Field::from_values(grid, Representation::Spectral, vals)?.to_physical())
}

fn pw_mul(a: &Field, b: &Field) -> Field {
    let vals = a.values().iter().zip(b.values()).map(|(x, y)| x * y).collect();
    Field::from_values(a.grid(), Representation::Physical, vals).expect("same grid")
}

fn chain_field(grid: &Grid, u_spec: &[Complex64], c: &Chain) -> Result<Field> {
    match c {
        Chain::Single(s) => slot_field(grid, u_spec, s),
        Chain::Pair { a, b, coupling } => {
            let p = pw_mul(&slot_field(grid, u_spec, a)?, &slot_field(grid, u_spec, b)?);
            match coupling {
                Some(s) => apply_symbol(&p, s),
                None => Ok(p),
            }
        }
        Chain::Triple { a, b, inner, c } => {
            let mut p = pw_mul(&slot_field(grid, u_spec, a)?, &slot_field(grid, u_spec, b)?);
            if let Some(s) = inner {
                p = apply_symbol(&p, s)?;
            }
            Ok(pw_mul(&p, &slot_field(grid, u_spec, c)?))
        }
    }
}

/// Evaluate Λ_k(M; u, ū, …) through the multiplier's factorized plan,
/// O(k · M log M). Errors when the multiplier carries no plan (elongated or
/// hand-written rules): use the direct enumeration there.
pub fn lambda_k_fft(m: &FreqMultiplier, u: &Field) -> Result<f64> {
    let plan = m.plan.as_ref().ok_or_else(|| {
        LabError::NoPlan(format!(
            "order-{} multiplier has no factorized plan; evaluate by direct enumeration",
            m.arity
        ))
    })?;
    let grid = u.grid().clone();
    let u_spec = u.to_spectral().into_values();
    let mut acc = Complex64::default();
    for term in &plan.terms {
        let mut f = chain_field(&grid, &u_spec, &term.left)?;
        if let Some(mid) = &term.mid {
            f = apply_symbol(&f, mid)?;
        }
        let g = chain_field(&grid, &u_spec, &term.right)?;
        let dot: Complex64 = f.values().iter().zip(g.values()).map(|(x, y)| x * y).sum();
        acc += term.coeff * dot;
    }
    Ok(acc.re * grid.cell_volume())
}

const BRUTE_BUDGET: u128 = 100_000_000;

/// Direct enumeration of the constrained sum over the spectral supports of
/// `fields` (one field per slot; pass the same field k times for the
/// convention form). Exact up to rounding; the budget guard counts
/// candidate tuples, the product of the first k−1 support sizes.
pub fn lambda_k_bruteforce(m: &FreqMultiplier, fields: &[Field]) -> Result<f64> {
    let k = m.arity;
    if fields.len() != k {
        return Err(LabError::Mismatch(format!(
            "multiplier order {k} but {} fields supplied",
            fields.len()
        )));
    }
    let grid = fields[0].grid().clone();
    if fields.iter().any(|f| f.grid() != &grid) {
        return Err(LabError::Mismatch("all slot fields must share one grid".into()));
    }
    let d = grid.d();

    // per-slot convention spectra: odd slots û, even slots conj(û(−ξ))
    let mut tables: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    for (j, f) in fields.iter().enumerate() {
        let spec = f.to_spectral().into_values();
        tables.push(if (j + 1) % 2 == 0 { conj_spectrum(&grid, &spec) } else { spec });
    }

    // support lists for the first k−1 slots; the last is looked up by index
    let mut sup_k: Vec<Vec<i64>> = Vec::new();
    let mut sup_v: Vec<Vec<Complex64>> = Vec::new();
    let mut kbuf = vec![0i64; d];
    for table in tables.iter().take(k - 1) {
        let mut kk = Vec::new();
        let mut vv = Vec::new();
        for (flat, &v) in table.iter().enumerate() {
            if v != Complex64::default() {
                grid.kvec(flat, &mut kbuf);
                kk.extend_from_slice(&kbuf);
                vv.push(v);
            }
        }
        sup_k.push(kk);
        sup_v.push(vv);
    }

    let mut tuples: u128 = 1;
    for vv in &sup_v {
        tuples = match tuples.checked_mul(vv.len() as u128) {
            Some(t) => t,
            None => u128::MAX,
        };
    }
    if tuples > BRUTE_BUDGET {
        return Err(LabError::Budget { tuples, budget: BRUTE_BUDGET });
    }

    let mut tuple = vec![0i64; k * d];
    let mut sum = vec![0i64; d];
    let mut acc = Complex64::default();
    brute_rec(
        &grid,
        m,
        &sup_k,
        &sup_v,
        tables.last().expect("k >= 2"),
        &mut tuple,
        &mut sum,
        0,
        Complex64::new(1.0, 0.0),
        &mut acc,
    );
    let norm = grid.cell_volume() / (grid.modes() as f64).powi(((k - 2) / 2) as i32);
    Ok(acc.re * norm)
}

#[allow(clippy::too_many_arguments)]
fn brute_rec(
    grid: &Grid,
    m: &FreqMultiplier,
    sup_k: &[Vec<i64>],
    sup_v: &[Vec<Complex64>],
    last_table: &[Complex64],
    tuple: &mut [i64],
    sum: &mut [i64],
    level: usize,
    prod: Complex64,
    acc: &mut Complex64,
) {
    let d = grid.d();
    if level == sup_v.len() {
        let base = level * d;
        for a in 0..d {
            tuple[base + a] = grid.reduce(-sum[a]);
        }
        let flat = grid.flat_of_kvec(&tuple[base..base + d]);
        let v = last_table[flat];
        if v != Complex64::default() {
            *acc += m.eval(grid, tuple) * prod * v;
        }
        return;
    }
    let base = level * d;
    for (i, &v) in sup_v[level].iter().enumerate() {
        let kv = &sup_k[level][i * d..(i + 1) * d];
        tuple[base..base + d].copy_from_slice(kv);
        for a in 0..d {
            sum[a] += kv[a];
        }
        brute_rec(grid, m, sup_k, sup_v, last_table, tuple, sum, level + 1, prod * v, acc);
        for a in 0..d {
            sum[a] -= kv[a];
        }
    }
}

fn reduced_sum(grid: &Grid, kvecs: &[i64], slots: &[usize], out: &mut [i64]) {
    let d = grid.d();
    for a in 0..d {
        let mut s = 0i64;
        for &j in slots {
            s += kvecs[(j - 1) * d + a];
        }
        out[a] = grid.reduce(s);
    }
}

fn slot_norm(grid: &Grid, kvecs: &[i64], slot: usize) -> f64 {
    let d = grid.d();
    xi_len(grid, &kvecs[(slot - 1) * d..slot * d])
}

fn m_symbol(p: &IParams) -> SymbolSpec {
    SymbolSpec::IOp(*p)
}

fn m_squared_symbol(p: &IParams) -> SymbolSpec {
    SymbolSpec::Product(vec![SymbolSpec::IOp(*p), SymbolSpec::IOp(*p)])
}

fn grad_sq_weight(extra_m: usize, p: &IParams) -> PlanWeight {
    let mut parts = vec![SymbolSpec::Riesz { alpha: 2.0, zero_mode: None }];
    for _ in 0..extra_m {
        parts.push(SymbolSpec::IOp(*p));
    }
    PlanWeight::Radial(SymbolSpec::Product(parts))
}

/// −½ (ξ₁·ξ₂) m(ξ₁) m(ξ₂), the order-2 piece of the modified energy:
/// Λ₂ of it equals ½‖∇Iu‖₂².
pub fn kinetic_multiplier(p: &IParams, d: usize) -> FreqMultiplier {
    let pc = *p;
    let eval: EvalFn = Box::new(move |grid: &Grid, kvecs: &[i64]| {
        let dd = grid.d();
        let dxi2 = grid.dxi() * grid.dxi();
        let dot: f64 =
            (0..dd).map(|a| (kvecs[a] * kvecs[dd + a]) as f64).sum::<f64>() * dxi2;
        let m1 = m_eval(slot_norm(grid, kvecs, 1), &pc);
        let m2 = m_eval(slot_norm(grid, kvecs, 2), &pc);
        Complex64::new(-0.5 * dot * m1 * m2, 0.0)
    });
    let terms = (0..d)
        .map(|axis| PlanTerm {
            coeff: Complex64::new(-0.5, 0.0),
            left: Chain::Single(SlotRef::weighted(
                1,
                PlanWeight::AxisRadial { axis, radial: Some(m_symbol(p)) },
            )),
            right: Chain::Single(SlotRef::weighted(
                2,
                PlanWeight::AxisRadial { axis, radial: Some(m_symbol(p)) },
            )),
            mid: None,
        })
        .collect();
    FreqMultiplier {
        arity: 2,
        tag: StructTag::Separable,
        eval,
        plan: Some(ConvPlan::new(2, terms)),
    }
}

/// ¼ |ξ₂+ξ₃|^(γ−d) m₁m₂m₃m₄, the order-4 piece of the modified energy:
/// Λ₄ of it equals the potential part ¼⟨V[Iu], |Iu|²⟩.
pub fn quartic_energy_multiplier(p: &IParams, mp: &ModelParams) -> FreqMultiplier {
    let pc = *p;
    let coupling = mp.coupling_symbol();
    let bsym = coupling.clone();
    let eval: EvalFn = Box::new(move |grid: &Grid, kvecs: &[i64]| {
        let d = grid.d();
        let mut pair = vec![0i64; d];
        reduced_sum(grid, kvecs, &[2, 3], &mut pair);
        let b = bsym.eval(xi_len(grid, &pair)).expect("total symbol");
        let m: f64 = (1..=4).map(|j| m_eval(slot_norm(grid, kvecs, j), &pc)).product();
        Complex64::new(0.25 * b * m, 0.0)
    });
    let term = PlanTerm {
        coeff: Complex64::new(0.25, 0.0),
        left: Chain::Pair {
            a: SlotRef::weighted(2, PlanWeight::Radial(m_symbol(p))),
            b: SlotRef::weighted(3, PlanWeight::Radial(m_symbol(p))),
            coupling: Some(coupling),
        },
        right: Chain::Pair {
            a: SlotRef::weighted(1, PlanWeight::Radial(m_symbol(p))),
            b: SlotRef::weighted(4, PlanWeight::Radial(m_symbol(p))),
            coupling: None,
        },
        mid: None,
    };
    FreqMultiplier {
        arity: 4,
        tag: StructTag::PairCoupled,
        eval,
        plan: Some(ConvPlan::new(4, vec![term])),
    }
}

/// i |ξ₂+ξ₃|^(γ−d) |ξ₁|² m₁ (m₁ − m₂m₃m₄): the quartic increment
/// multiplier. Zero pointwise whenever every |ξ_j| ≤ N/3 or s = 1.
pub fn m4_multiplier(p: &IParams, mp: &ModelParams) -> FreqMultiplier {
    let pc = *p;
    let coupling = mp.coupling_symbol();
    let bsym = coupling.clone();
    let eval: EvalFn = Box::new(move |grid: &Grid, kvecs: &[i64]| {
        let d = grid.d();
        let mut pair = vec![0i64; d];
        reduced_sum(grid, kvecs, &[2, 3], &mut pair);
        let b = bsym.eval(xi_len(grid, &pair)).expect("total symbol");
        let r1 = slot_norm(grid, kvecs, 1);
        let m1 = m_eval(r1, &pc);
        let rest: f64 = (2..=4).map(|j| m_eval(slot_norm(grid, kvecs, j), &pc)).product();
        Complex64::new(0.0, b * r1 * r1 * m1 * (m1 - rest))
    });
    // two-term difference: m₁² piece minus m₁m₂m₃m₄ piece; both terms share
    // the left chain so the difference cancels bit for bit where m ≡ 1
    let term_a = PlanTerm {
        coeff: Complex64::new(0.0, 1.0),
        left: Chain::Pair {
            a: SlotRef::bare(2),
            b: SlotRef::bare(3),
            coupling: Some(coupling.clone()),
        },
        right: Chain::Pair {
            a: SlotRef::weighted(1, grad_sq_weight(2, p)),
            b: SlotRef::bare(4),
            coupling: None,
        },
        mid: None,
    };
    let term_b = PlanTerm {
        coeff: Complex64::new(0.0, -1.0),
        left: Chain::Pair {
            a: SlotRef::weighted(2, PlanWeight::Radial(m_symbol(p))),
            b: SlotRef::weighted(3, PlanWeight::Radial(m_symbol(p))),
            coupling: Some(coupling),
        },
        right: Chain::Pair {
            a: SlotRef::weighted(1, grad_sq_weight(1, p)),
            b: SlotRef::weighted(4, PlanWeight::Radial(m_symbol(p))),
            coupling: None,
        },
        mid: None,
    };
    FreqMultiplier {
        arity: 4,
        tag: StructTag::PairCoupled,
        eval,
        plan: Some(ConvPlan::new(4, vec![term_a, term_b])),
    }
}

/// i |ξ₂+ξ₃|^(γ−d) |ξ₄+ξ₅|^(γ−d) m₁₂₃ (m₁₂₃ − m₄m₅m₆) with
/// m₁₂₃ = m(ξ₁+ξ₂+ξ₃): the sextic increment multiplier.
pub fn m6_multiplier(p: &IParams, mp: &ModelParams) -> FreqMultiplier {
    let pc = *p;
    let coupling = mp.coupling_symbol();
    let bsym = coupling.clone();
    let eval: EvalFn = Box::new(move |grid: &Grid, kvecs: &[i64]| {
        let d = grid.d();
        let mut buf = vec![0i64; d];
        reduced_sum(grid, kvecs, &[2, 3], &mut buf);
        let b23 = bsym.eval(xi_len(grid, &buf)).expect("total symbol");
        reduced_sum(grid, kvecs, &[4, 5], &mut buf);
        let b45 = bsym.eval(xi_len(grid, &buf)).expect("total symbol");
        reduced_sum(grid, kvecs, &[1, 2, 3], &mut buf);
        let m123 = m_eval(xi_len(grid, &buf), &pc);
        let rest: f64 = (4..=6).map(|j| m_eval(slot_norm(grid, kvecs, j), &pc)).product();
        Complex64::new(0.0, b23 * b45 * m123 * (m123 - rest))
    });
    let left = Chain::Triple {
        a: SlotRef::bare(2),
        b: SlotRef::bare(3),
        inner: Some(coupling.clone()),
        c: SlotRef::bare(1),
    };
    let term_a = PlanTerm {
        coeff: Complex64::new(0.0, 1.0),
        left: left.clone(),
        right: Chain::Triple {
            a: SlotRef::bare(4),
            b: SlotRef::bare(5),
            inner: Some(coupling.clone()),
            c: SlotRef::bare(6),
        },
        mid: Some(m_squared_symbol(p)),
    };
    let term_b = PlanTerm {
        coeff: Complex64::new(0.0, -1.0),
        left,
        right: Chain::Triple {
            a: SlotRef::weighted(4, PlanWeight::Radial(m_symbol(p))),
            b: SlotRef::weighted(5, PlanWeight::Radial(m_symbol(p))),
            inner: Some(coupling),
            c: SlotRef::weighted(6, PlanWeight::Radial(m_symbol(p))),
        },
        mid: Some(m_symbol(p)),
    };
    FreqMultiplier {
        arity: 6,
        tag: StructTag::TripleCoupled,
        eval,
        plan: Some(ConvPlan::new(6, vec![term_a, term_b])),
    }
}

/// i |ξ₂+ξ₃|^(γ−d) m₁² |ξ₁|²: the right side of the differentiation law
/// for the kinetic form.
pub fn diff_law_rhs_multiplier(p: &IParams, mp: &ModelParams) -> FreqMultiplier {
    let pc = *p;
    let coupling = mp.coupling_symbol();
    let bsym = coupling.clone();
    let eval: EvalFn = Box::new(move |grid: &Grid, kvecs: &[i64]| {
        let d = grid.d();
        let mut pair = vec![0i64; d];
        reduced_sum(grid, kvecs, &[2, 3], &mut pair);
        let b = bsym.eval(xi_len(grid, &pair)).expect("total symbol");
        let r1 = slot_norm(grid, kvecs, 1);
        let m1 = m_eval(r1, &pc);
        Complex64::new(0.0, b * m1 * m1 * r1 * r1)
    });
    let term = PlanTerm {
        coeff: Complex64::new(0.0, 1.0),
        left: Chain::Pair { a: SlotRef::bare(2), b: SlotRef::bare(3), coupling: Some(coupling) },
        right: Chain::Pair {
            a: SlotRef::weighted(1, grad_sq_weight(2, p)),
            b: SlotRef::bare(4),
            coupling: None,
        },
        mid: None,
    };
    FreqMultiplier {
        arity: 4,
        tag: StructTag::PairCoupled,
        eval,
        plan: Some(ConvPlan::new(4, vec![term])),
    }
}

/// Plain per-slot product Π w_j(|ξ_j|) with a real coefficient. Plans are
/// compiled for orders 2, 4 and 6; higher orders evaluate by enumeration.
pub fn separable(coeff: f64, weights: Vec<SymbolSpec>) -> FreqMultiplier {
    let k = weights.len();
    assert!(k >= 2 && k % 2 == 0, "separable multiplier needs an even order >= 2");
    let ws = weights.clone();
    let eval: EvalFn = Box::new(move |grid: &Grid, kvecs: &[i64]| {
        let mut acc = coeff;
        for (j, w) in ws.iter().enumerate() {
            acc *= w.eval(slot_norm(grid, kvecs, j + 1)).expect("total symbol");
        }
        Complex64::new(acc, 0.0)
    });
    let slot = |j: usize| SlotRef::weighted(j, PlanWeight::Radial(weights[j - 1].clone()));
    let plan = match k {
        2 => Some(ConvPlan::new(
            2,
            vec![PlanTerm {
                coeff: Complex64::new(coeff, 0.0),
                left: Chain::Single(slot(1)),
                right: Chain::Single(slot(2)),
                mid: None,
            }],
        )),
        4 => Some(ConvPlan::new(
            4,
            vec![PlanTerm {
                coeff: Complex64::new(coeff, 0.0),
                left: Chain::Pair { a: slot(1), b: slot(2), coupling: None },
                right: Chain::Pair { a: slot(3), b: slot(4), coupling: None },
                mid: None,
            }],
        )),
        6 => Some(ConvPlan::new(
            6,
            vec![PlanTerm {
                coeff: Complex64::new(coeff, 0.0),
                left: Chain::Triple { a: slot(1), b: slot(2), inner: None, c: slot(3) },
                right: Chain::Triple { a: slot(4), b: slot(5), inner: None, c: slot(6) },
                mid: None,
            }],
        )),
        _ => None,
    };
    FreqMultiplier { arity: k, tag: StructTag::Separable, eval, plan }
}

/// Elongation: replace argument j by a sum of l+1 arguments, producing an
/// order k+l rule. The result carries no plan; evaluate by enumeration.
pub fn elongate(m: FreqMultiplier, j: usize, l: usize) -> Result<FreqMultiplier> {
    if l % 2 != 0 {
        return Err(LabError::InvalidParam(format!("elongation count must be even, got {l}")));
    }
    if j < 1 || j > m.arity {
        return Err(LabError::InvalidParam(format!(
            "elongation slot {j} outside 1..={}",
            m.arity
        )));
    }
    if l == 0 {
        return Ok(m);
    }
    let k_new = m.arity + l;
    let k_old = m.arity;
    let tag = m.tag;
    let inner = m.eval;
    let eval: EvalFn = Box::new(move |grid: &Grid, kvecs: &[i64]| {
        let d = grid.d();
        let mut collapsed = vec![0i64; k_old * d];
        // slots before j copy through
        collapsed[..(j - 1) * d].copy_from_slice(&kvecs[..(j - 1) * d]);
        // slot j becomes the reduced sum of l+1 consecutive arguments
        for a in 0..d {
            let mut s = 0i64;
            for t in 0..=l {
                s += kvecs[(j - 1 + t) * d + a];
            }
            collapsed[(j - 1) * d + a] = grid.reduce(s);
        }
        // remaining slots shift down by l
        collapsed[j * d..].copy_from_slice(&kvecs[(j + l) * d..]);
        inner(grid, &collapsed)
    });
    Ok(FreqMultiplier { arity: k_new, tag, eval, plan: None })
}

/// Two-path residual of the differentiation law at one snapshot: the chain
/// rule d/dt Λ₂ with ∂_t û from the equation, against Λ₄ of the stated
/// right-side multiplier. Relative discrepancy; 0 for the zero field.
pub fn diff_law_residual(u: &Field, mp: &ModelParams, p: &IParams) -> Result<f64> {
    let grid = u.grid().clone();
    let d = grid.d();
    let spec = u.to_spectral();
    let udot = crate::dynamics::rhs(u, mp)?.to_spectral();
    let kin = kinetic_multiplier(p, d);
    let mut k = vec![0i64; d];
    let mut pair = vec![0i64; 2 * d];
    let mut chain_rule = 0.0;
    for (flat, v) in spec.values().iter().enumerate() {
        grid.kvec(flat, &mut k);
        pair[..d].copy_from_slice(&k);
        for a in 0..d {
            pair[d + a] = grid.reduce(-k[a]);
        }
        let diag = kin.eval(&grid, &pair).re;
        chain_rule += diag * 2.0 * (udot.values()[flat] * v.conj()).re;
    }
    chain_rule *= grid.cell_volume();
    let rhs_form = lambda_k_fft(&diff_law_rhs_multiplier(p, mp), u)?;
    let denom = chain_rule.abs().max(rhs_form.abs());
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((chain_rule - rhs_form).abs() / denom)
}

/// Single-snapshot residual of the modified-energy production identity:
/// chain-rule d/dt Ẽ(u) against Λ₄(M₄) + Λ₆(M₆). Exact to rounding for the
/// untruncated semidiscrete flow.
pub fn instantaneous_increment_residual(
    u: &Field,
    p: &IParams,
    mp: &ModelParams,
) -> Result<f64> {
    let grid = u.grid().clone();
    let v = crate::symbols::i_operator(&u.to_spectral(), p);
    let vdot = crate::symbols::i_operator(&crate::dynamics::rhs(u, mp)?, p);
    // dE(v)/dt = Re⟨v_t, −Δv + Ñ(v)⟩
    let mut lap_vals = v.to_spectral().into_values();
    for (flat, val) in lap_vals.iter_mut().enumerate() {
        *val *= grid.xi_norm_sq(flat);
    }
    let neg_lap = Field::from_values(&grid, Representation::Spectral, lap_vals)?;
    let nl = crate::dynamics::nonlinearity(&v, mp)?;
    let target = crate::grid::axpy(
        Complex64::new(1.0, 0.0),
        &neg_lap.to_physical(),
        Complex64::new(1.0, 0.0),
        &nl,
    )?;
    let vdot_phys = vdot.to_physical();
    let chain: f64 = vdot_phys
        .values()
        .iter()
        .zip(target.values())
        .map(|(a, b)| (a * b.conj()).re)
        .sum::<f64>()
        * grid.cell_volume();
    let forms = lambda_k_fft(&m4_multiplier(p, mp), u)? + lambda_k_fft(&m6_multiplier(p, mp), u)?;
    let denom = chain.abs().max(forms.abs());
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((chain - forms).abs() / denom)
}

/// |[Ẽ(end) − Ẽ(start)] − ∫(Λ₄(M₄) + Λ₆(M₆)) dt| over a sampled trajectory,
/// normalized by max(|Ẽ(start)|, 1). Trapezoid rule on the snapshot cadence.
pub fn increment_residual(
    trajectory: &[(f64, Field)],
    p: &IParams,
    mp: &ModelParams,
) -> Result<f64> {
    if trajectory.len() < 2 {
        return Err(LabError::InvalidParam(
            "increment residual needs at least two snapshots".into(),
        ));
    }
    let m4 = m4_multiplier(p, mp);
    let m6 = m6_multiplier(p, mp);
    let e_start = crate::functionals::modified_energy(&trajectory[0].1, p, mp)?;
    let e_end =
        crate::functionals::modified_energy(&trajectory[trajectory.len() - 1].1, p, mp)?;
    let mut integral = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (t, u) in trajectory {
        let val = lambda_k_fft(&m4, u)? + lambda_k_fft(&m6, u)?;
        if let Some((t0, v0)) = prev {
            if *t <= t0 {
                return Err(LabError::Mismatch(format!(
                    "snapshot times must increase: {t0} then {t}"
                )));
            }
            integral += 0.5 * (val + v0) * (t - t0);
        }
        prev = Some((*t, val));
    }
    Ok(((e_end - e_start) - integral).abs() / e_start.abs().max(1.0))
}
