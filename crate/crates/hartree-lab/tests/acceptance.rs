//! The acceptance gate. Each test checks one headline capability and prints
//! a single pass/fail line; run with
//!
//!     cargo test --test acceptance -- --nocapture
//!
//! to see the whole table. The thresholds are frozen from measured runs and
//! from the exact identities the multilinear calculus must satisfy.

use std::sync::OnceLock;
use std::time::Instant;

use hartree_lab::dynamics::{evolve, EvolveConfig, ModelParams, Probe};
use hartree_lab::experiments::{
    choose_lambda, fit_log2_slope, interval_count, rescale, s_star, scattering_diagnostic,
    sweep_almost_conservation, SweepResult, SweepSpec,
};
use hartree_lab::functionals::{
    energy, interaction_morawetz_action, interaction_morawetz_action_direct, mass, modified_energy,
    morawetz_lhs, sobolev_norm,
};
use hartree_lab::initial_data::{gaussian, random_spectrum, RoughSpec};
use hartree_lab::multilinear::{
    diff_law_residual, lambda_k_bruteforce, lambda_k_fft, m4_multiplier, m6_multiplier,
};
use hartree_lab::verify::run_verification;
use hartree_lab::{make_grid, Field, IParams};

fn gate(num: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "pass" } else { "FAIL" };
    println!("criterion {num:02} {name}: {verdict} ({detail})");
    assert!(pass, "criterion {num:02} {name}: {detail}");
}

fn column(series: &hartree_lab::functionals::DiagnosticsSeries, name: &str) -> Vec<(f64, f64)> {
    series
        .rows()
        .iter()
        .filter(|(_, n, _)| n == name)
        .map(|(t, _, v)| (*t, *v))
        .collect()
}

#[test]
fn criterion_01_exact_identity_suite() {
    let start = Instant::now();
    let report = run_verification().expect("suite should run");
    let elapsed = start.elapsed();
    let pass = report.all_passed() && elapsed.as_secs() < 60;
    gate(
        1,
        "exact identity suite",
        pass,
        &format!("{} checks in {:.1}s", report.checks.len(), elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_02_differentiation_law() {
    let g = make_grid(3, 8, 6.0).unwrap();
    let mp = ModelParams::new(3, 2.5).unwrap();
    let p = IParams::new(2.0, 0.6).unwrap();
    let u = random_spectrum(&g, 3, 23);
    let r = diff_law_residual(&u, &mp, &p).unwrap();
    gate(2, "differentiation law", r <= 1e-8, &format!("residual {r:.3e} <= 1e-8"));
}

/// Windowed increment identity: the change of the modified energy over
/// [0, T] minus the trapezoid quadrature of the two multilinear production
/// terms. Both the integrator and the quadrature are second order, so the
/// residual must shrink by about 4 when dt halves.
fn windowed_increment_residual(dt: f64) -> f64 {
    let g = make_grid(3, 8, 6.0).unwrap();
    let mp = ModelParams::new(3, 2.5).unwrap();
    let p = IParams::new(2.0, 0.6).unwrap();
    let u0 = random_spectrum(&g, 2, 41);
    let probes = [Probe::ModifiedEnergy(p), Probe::LambdaM4(p), Probe::LambdaM6(p)];
    let mut ec = EvolveConfig::new(dt, 0.5);
    ec.sample_every = 1;
    // the probes measure the plain lattice flow; density filtering would
    // evolve a different Hamiltonian and leave an O(1) residual
    ec.dealias = false;
    let out = evolve(&u0, &mp, &ec, &probes).unwrap();

    let me = column(&out.series, &probes[0].name());
    let l4 = column(&out.series, &probes[1].name());
    let l6 = column(&out.series, &probes[2].name());
    let mut integral = 0.0;
    for i in 1..l4.len() {
        let lo = l4[i - 1].1 + l6[i - 1].1;
        let hi = l4[i].1 + l6[i].1;
        integral += 0.5 * (lo + hi) * (l4[i].0 - l4[i - 1].0);
    }
    ((me.last().unwrap().1 - me[0].1) - integral).abs()
}

#[test]
fn criterion_03_increment_identity_convergence() {
    let coarse = windowed_increment_residual(0.02);
    let fine = windowed_increment_residual(0.01);
    let ratio = coarse / fine;
    gate(
        3,
        "increment identity second-order convergence",
        (3.4..=4.6).contains(&ratio),
        &format!("residual {coarse:.3e} -> {fine:.3e}, ratio {ratio:.2} in [3.4, 4.6]"),
    );
}

#[test]
fn criterion_04_conservation_laws() {
    let g = make_grid(3, 16, 16.0).unwrap();
    let mp = ModelParams::new(3, 2.5).unwrap();
    let u0 = gaussian(&g, 0.4, 1.5, &[0.0; 3]);

    let mut ec = EvolveConfig::new(1e-3, 1.0);
    ec.sample_every = 100;
    let out = evolve(&u0, &mp, &ec, &[Probe::Mass]).unwrap();
    let masses = column(&out.series, "mass");
    let m0 = masses[0].1;
    let drift = masses.iter().map(|(_, m)| (m - m0).abs() / m0).fold(0.0, f64::max);

    // energy order needs the undealiased flow: the probe's conserved
    // quantity belongs to the plain lattice convolution
    let mut points = Vec::new();
    for dt in [1e-2, 5e-3, 2.5e-3] {
        let mut ec = EvolveConfig::new(dt, 0.5);
        ec.sample_every = 10;
        ec.dealias = false;
        let out = evolve(&u0, &mp, &ec, &[Probe::Energy]).unwrap();
        let es = column(&out.series, "energy");
        let e0 = es[0].1;
        let dev = es.iter().map(|(_, e)| (e - e0).abs() / e0).fold(0.0, f64::max);
        points.push((dt, dev));
    }
    let slope = fit_log2_slope(&points).unwrap();

    let pass = drift <= 1e-10 && (slope - 2.0).abs() <= 0.3;
    gate(
        4,
        "mass and energy conservation",
        pass,
        &format!("mass drift {drift:.3e} <= 1e-10 over 1000 steps, energy order {slope:.2} in 2.0 +- 0.3"),
    );
}

/// One sweep feeds criteria 5 and 6. A one-dimensional reduction keeps the
/// thresholds spread over three octaves at CI runtime; the full
/// three-dimensional variant lives in `full_sweep_in_three_dimensions`.
fn ci_sweep() -> &'static SweepResult {
    static SWEEP: OnceLock<SweepResult> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let mp = ModelParams::new(1, 0.5).unwrap();
        let mut spec = SweepSpec::new(vec![4.0, 8.0, 16.0, 32.0], 0.6, mp);
        spec.grid_n = 4096;
        spec.grid_len = 64.0;
        spec.data = RoughSpec { s_data: 0.6, shells: 7, envelope_width: 1.5, amplitude: 1.0 };
        spec.dt = 1e-3;
        spec.window = 1.0;
        spec.sample_every = 50;
        sweep_almost_conservation(&spec).unwrap()
    })
}

#[test]
fn criterion_05_almost_conservation_scaling() {
    let result = ci_sweep();
    let all_valid = result.rows.iter().all(|r| r.valid);
    let slope = result.increment_slope.unwrap_or(f64::NAN);

    let controls: Vec<f64> =
        result.rows.iter().filter(|r| r.s == 1.0).map(|r| r.sup_increment).collect();
    let floor = controls.iter().copied().fold(f64::INFINITY, f64::min);
    let controls_at_floor = !controls.is_empty() && controls.iter().all(|c| *c <= 10.0 * floor);

    let pass = all_valid && slope <= -0.7 && controls_at_floor;
    gate(
        5,
        "almost-conservation scaling",
        pass,
        &format!("increment slope {slope:.2} <= -0.7, control floor {floor:.2e}"),
    );
}

#[test]
fn criterion_06_commutator_decay() {
    let slope = ci_sweep().commutator_slope.unwrap_or(f64::NAN);
    gate(6, "commutator decay", slope <= -0.7, &format!("slope {slope:.2} <= -0.7"));
}

#[test]
fn criterion_07_vanishing_property() {
    // data in |xi| <= N/3 on a grid that still carries frequencies above N,
    // so the vanishing is a statement about the multiplier, not the grid
    let g = make_grid(3, 8, 5.0).unwrap();
    let mp = ModelParams::new(3, 2.5).unwrap();
    let p = IParams::new(8.0, 0.6).unwrap();
    let u = random_spectrum(&g, 1, 9);
    let m4 = m4_multiplier(&p, &mp);
    let m6 = m6_multiplier(&p, &mp);
    let brute4 = lambda_k_bruteforce(&m4, &[u.clone(), u.clone(), u.clone(), u.clone()]).unwrap();
    let brute6 = lambda_k_bruteforce(&m6, &vec![u.clone(); 6]).unwrap();
    let fft4 = lambda_k_fft(&m4, &u).unwrap();
    let fft6 = lambda_k_fft(&m6, &u).unwrap();
    let m = mass(&u);
    let statics = brute4 == 0.0 && brute6 == 0.0 && fft4 == 0.0 && fft6.abs() <= 1e-12 * m.powi(3);

    // along the flow the first nonlinear generation of a band-b state stays
    // inside 3b <= N, so the increment must sit at the stepping floor, which
    // the s = 1 run (where the smoothing is the identity) measures directly
    let g1 = make_grid(1, 512, 16.0).unwrap();
    let mp1 = ModelParams::new(1, 0.5).unwrap();
    let p1 = IParams::new(32.0, 0.6).unwrap();
    let band = random_spectrum(&g1, 27, 3);
    let probes = [Probe::ModifiedEnergy(p1), Probe::Energy];
    let mut ec = EvolveConfig::new(1e-3, 0.2);
    ec.sample_every = 10;
    let out = evolve(&band, &mp1, &ec, &probes).unwrap();
    let me = column(&out.series, &probes[0].name());
    let ctrl = column(&out.series, "energy");
    let sup = |col: &[(f64, f64)]| {
        col.iter().map(|(_, v)| (v - col[0].1).abs()).fold(0.0, f64::max)
    };
    let (inc, inc_ctrl) = (sup(&me), sup(&ctrl));
    let at_floor = inc <= (10.0 * inc_ctrl).max(1e-12 * me[0].1.abs());

    gate(
        7,
        "vanishing below a third of the threshold",
        statics && at_floor,
        &format!(
            "brute {brute4:.1e}/{brute6:.1e}, fft {fft4:.1e}/{fft6:.1e}, increment {inc:.2e} vs floor {inc_ctrl:.2e}"
        ),
    );
}

#[test]
fn criterion_08_interaction_functional() {
    let g = make_grid(3, 8, 6.0).unwrap();
    let u = random_spectrum(&g, 3, 17);
    let fast = interaction_morawetz_action(&u).unwrap();
    let slow = interaction_morawetz_action_direct(&u).unwrap();
    let rel = (fast - slow).abs() / slow.abs().max(1e-30);

    let g16 = make_grid(3, 16, 16.0).unwrap();
    let mp = ModelParams::new(3, 2.5).unwrap();
    let p = IParams::new(4.0, 0.6).unwrap();
    let u0 = gaussian(&g16, 0.4, 1.5, &[0.0; 3]);
    let mut ec = EvolveConfig::new(5e-3, 0.5);
    ec.sample_every = 5;
    ec.snapshot_every = Some(5);
    let out = evolve(&u0, &mp, &ec, &[Probe::Mass]).unwrap();
    let half: Vec<(f64, Field)> =
        out.snapshots.iter().filter(|(t, _)| *t <= 0.25 + 1e-12).cloned().collect();
    let lhs_half = morawetz_lhs(&half, &p).unwrap();
    let lhs_full = morawetz_lhs(&out.snapshots, &p).unwrap();
    let ratio = lhs_full / lhs_half;

    let pass = rel <= 1e-9 && ratio < 2.0;
    gate(
        8,
        "interaction functional and sublinear growth",
        pass,
        &format!("fft vs direct {rel:.2e} <= 1e-9, lhs(2T)/lhs(T) = {ratio:.3} < 2"),
    );
}

#[test]
fn criterion_09_rescaling_bookkeeping() {
    let mp = ModelParams::new(3, 2.5).unwrap();
    let mut worst_lambda: f64 = 0.0;
    for n in [2.0, 4.0, 8.0] {
        let lam = choose_lambda(n, 0.5, &mp).unwrap();
        worst_lambda = worst_lambda.max((lam - n * n).abs() / (n * n));
    }
    let star_err = (s_star(2.5) - 4.0 / 7.0).abs();
    let count = interval_count(1.0, 4.0, 2.5, 0.1);
    let count_expected = 16.0 * (2.0f64).powf(1.5) * 10.0;
    let count_err = (count - count_expected).abs() / count_expected;

    let g = make_grid(3, 64, 32.0).unwrap();
    let u = gaussian(&g, 0.5, 1.0, &[0.0; 3]);
    let v = rescale(&u, 2.0, &mp).unwrap();
    let mass_err = {
        let measured = mass(&v) / mass(&u);
        let expected = (2.0f64).powf(2.5 - 2.0);
        (measured - expected).abs() / expected
    };
    let grad_err = {
        let measured = sobolev_norm(&v, 1.0, true).unwrap() / sobolev_norm(&u, 1.0, true).unwrap();
        let expected = (2.0f64).powf((2.5 - 4.0) / 2.0);
        (measured - expected).abs() / expected
    };

    let pass = worst_lambda <= 1e-12
        && star_err <= 1e-15
        && count_err <= 1e-12
        && mass_err <= 1e-8
        && grad_err <= 1e-8;
    gate(
        9,
        "rescaling bookkeeping",
        pass,
        &format!(
            "lambda {worst_lambda:.1e}, s* {star_err:.1e}, intervals {count_err:.1e}, mass {mass_err:.2e}, gradient {grad_err:.2e}"
        ),
    );
}

#[test]
fn criterion_10_uniform_bound_analogue() {
    let g = make_grid(3, 32, 16.0).unwrap();
    let mp = ModelParams::new(3, 2.5).unwrap();
    let u0 = gaussian(&g, 0.35, 1.0, &[0.0; 3]);
    let mut ec = EvolveConfig::new(1e-2, 10.0);
    ec.sample_every = 10;
    ec.snapshot_every = Some(100);
    let probes = [Probe::SobolevNorm { s: 0.6, homogeneous: false }];
    let out = evolve(&u0, &mp, &ec, &probes).unwrap();

    let hs = column(&out.series, &probes[0].name());
    let h0 = hs[0].1;
    let sup = hs.iter().map(|(_, v)| *v).fold(0.0, f64::max);

    let increments = scattering_diagnostic(&out.snapshots, 0.6).unwrap();
    let ratio = increments.first().unwrap() / increments.last().unwrap();

    let pass = sup <= 3.0 * h0 && ratio >= 2.0;
    gate(
        10,
        "uniform bound and dispersive decay",
        pass,
        &format!("sup ||u||_Hs / initial = {:.3} <= 3, increment decay {ratio:.1}x >= 2", sup / h0),
    );
}

/// The three-dimensional sweep. Ignored by default: about half a minute, and
/// the grid bounds pin the usable thresholds to one octave per side. On a
/// 64-per-axis box of length 16 the cutoff rule 2N < pi n / L caps N at 4
/// while data support under rescaling (length / 2 lambda must hold several
/// envelope widths) caps lambda, hence s = 0.85 to keep lambda = N^(1/4).
/// Run with: cargo test --test acceptance -- --ignored --nocapture
#[test]
#[ignore]
fn full_sweep_in_three_dimensions() {
    let mp = ModelParams::new(3, 2.5).unwrap();
    let mut spec = SweepSpec::new(vec![1.0, 2.0, 4.0], 0.85, mp);
    spec.grid_n = 64;
    spec.grid_len = 16.0;
    spec.data = RoughSpec { s_data: 0.85, shells: 3, envelope_width: 0.8, amplitude: 1.0 };
    spec.dt = 1e-2;
    spec.window = 1.0;
    spec.sample_every = 10;
    let result = sweep_almost_conservation(&spec).unwrap();

    for r in &result.rows {
        println!(
            "  N = {:>2}  s = {:<4}  lambda = {:>6.3}  sup increment = {:.6e}  valid = {}",
            r.n_threshold, r.s, r.lambda, r.sup_increment, r.valid
        );
    }
    let all_valid = result.rows.iter().all(|r| r.valid);
    let slope = result.increment_slope.unwrap_or(f64::NAN);
    gate(
        5,
        "almost-conservation scaling (three-dimensional)",
        all_valid && slope <= -0.5,
        &format!("increment slope {slope:.2} <= -0.5"),
    );
}
